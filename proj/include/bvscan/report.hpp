// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#pragma once

// Scan orchestration (parse, extract, encode, solve) and report output.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bvscan/chain.hpp"
#include "bvscan/encoders.hpp"
#include "bvscan/guard.hpp"
#include "bvscan/solver.hpp"

namespace bvscan::report {

struct ScanOptions {
    fe::DataModel model = fe::DataModel::ilp32();
    solver::SolveBudget budget;
    unsigned jobs = 1;
    std::string dump_dir; // write one .smt2 file per finding when set
    uint64_t seed = 0;
    enc::EncoderConfig encoder;
    /// Leave out timestamps and timings so identical runs give identical bytes.
    bool reproducible = false;
};

/// One encoding of one candidate site.
struct SiteEncoding {
    fe::SourceSpan site;
    std::string function;
    ex::PatternKind kind = ex::PatternKind::MulOverflow;
    enc::Encoding encoding;
};

using HexAssignment = std::vector<std::pair<std::string, std::string>>; // name -> zero-padded hex

struct Finding {
    std::string id; // BVS-0001, sequential per run
    std::string cwe;
    std::string threat_tag;
    fe::SourceSpan site;
    std::string function;
    std::string kind;
    std::string variant;
    solver::Outcome outcome = solver::Outcome::Unknown;
    std::string reason; // budget descriptor when Unknown
    std::optional<HexAssignment> witness;
    HexAssignment defined; // values of defined variables under the witness
    std::string severity;
    std::string description;
    double solve_time_ms = 0;
    std::string smt2_file;
};

struct FileError {
    std::string file;
    std::string message;
};

struct Skipped {
    fe::SourceSpan site;
    std::string function;
    std::string reason;
};

struct StageRef {
    fe::SourceSpan site;
    std::string kind;
    std::string variant;
    std::string cwe;
    [[nodiscard]] std::string str() const;
};

struct ChainFinding {
    std::string id; // CHN-0001
    std::string label;
    StageRef stage1;
    StageRef stage2;
    std::string bridge;
    solver::Outcome outcome = solver::Outcome::Unknown;
    solver::Outcome stage1_outcome = solver::Outcome::Unknown;
    solver::Outcome stage2_outcome = solver::Outcome::Unknown;
    std::optional<HexAssignment> witness;
    std::optional<std::string> bridge_value;
    double solve_time_ms = 0;
};

struct GuardRecord {
    guard::GuardSpec spec;
    std::optional<guard::BenchReport> bench;
};

struct Report {
    std::string tool_version = BVSCAN_VERSION;
    std::string data_model = "ILP32";
    solver::SolveBudget budget;
    uint64_t seed = 0;
    std::string generated_at;
    bool reproducible = false;
    std::vector<Finding> findings;
    std::vector<ChainFinding> chains;
    std::vector<GuardRecord> guards;
    std::vector<FileError> errors;
    std::vector<Skipped> skipped;
};

struct Counts {
    size_t sat = 0;
    size_t unsat = 0;
    size_t unknown = 0;
    [[nodiscard]] size_t total() const { return sat + unsat + unknown; }
};

struct Summary {
    Counts findings;
    std::vector<std::pair<std::string, Counts>> by_cwe; // sorted by CWE
    Counts chains;
    size_t errors = 0;
};

Summary summarize(const Report& r);

/// Files named directly, plus every *.c below named directories (sorted).
/// Paths that do not exist become errors.
std::vector<std::string> collect_sources(const std::vector<std::string>& paths, std::vector<FileError>& errors);

struct Collected {
    std::vector<SiteEncoding> encodings;
    std::vector<FileError> errors;
    std::vector<Skipped> skipped;
};

/// Parses, extracts and encodes; a file that fails to load becomes an error
/// entry and the rest of the files are still processed.
Collected collect(const std::vector<std::string>& paths, const ScanOptions& options);

/// Solves every encoding (up to options.jobs at a time) into a report.
Report scan(const std::vector<std::string>& paths, const ScanOptions& options);
Report solve_encodings(const Collected& collected, const ScanOptions& options);

/// Chains between encodings of the same file, plus one out-of-bounds sink
/// per distinct output width as a second stage.
std::vector<ChainFinding> run_chains(const std::vector<SiteEncoding>& encodings, uint64_t sink_bound,
                                     const ScanOptions& options);

HexAssignment to_hex(const bv::Assignment& values, const std::map<std::string, unsigned>& widths);

std::string to_json(const Report& r);
std::string to_text(const Report& r);

/// 2 when errors or Unknown verdicts are present, else 1 when anything is
/// Sat, else 0.
int exit_code(const Report& r);

std::string utc_timestamp();

} // namespace bvscan::report
