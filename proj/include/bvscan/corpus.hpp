// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#pragma once

// Fixture manifests and the regression run over corpus/<name>/{source.c,
// manifest}. A manifest is a kv file:
//
//   type=fixture source=source.c data_model=ILP32 upstream="..."
//   type=expect line=13 kind=SeqComparePair verdict=sat
//   type=expect line=6 kind=SignCastBoundary variant=wd3 verdict=unsat
//   type=witness line=13 kind=SeqComparePair values="sack_start=0x80000000 rcv_nxt=0 snd_una=0" holds=true
//
// Expectations may also pin severity and cwe.

#include <string>
#include <vector>

#include "bvscan/bv.hpp"
#include "bvscan/sat.hpp"

namespace bvscan::corpus {

struct Expectation {
    uint32_t line = 0;
    std::string kind;
    std::string variant;
    std::string verdict; // sat / unsat / unknown
    std::string severity; // checked when non-empty
    std::string cwe;      // checked when non-empty
    size_t manifest_line = 0;
};

struct WitnessCheck {
    uint32_t line = 0;
    std::string kind;
    std::string variant;
    bv::Assignment values;
    bool holds = true;
    size_t manifest_line = 0;
};

struct Manifest {
    std::string name; // directory name
    std::string dir;
    std::string source;
    std::string data_model = "ILP32";
    std::string upstream;
    std::vector<Expectation> expectations;
    std::vector<WitnessCheck> witnesses;
};

/// Reads <dir>/manifest. Throws kv::FormatError on malformed records.
Manifest load_manifest(const std::string& dir);

struct Mismatch {
    std::string fixture;
    std::string what; // missing, unexpected, verdict, severity, cwe, witness, error
    std::string detail;
};

struct FixtureResult {
    std::string name;
    size_t findings = 0;
    size_t matched = 0;
    size_t witnesses_checked = 0;
    double elapsed_ms = 0;
    std::vector<Mismatch> mismatches;
};

struct RegressionResult {
    std::vector<FixtureResult> fixtures;
    [[nodiscard]] bool passed() const;
    /// One line per mismatch, "fixture: what: detail"; empty on a pass.
    [[nodiscard]] std::string diff() const;
};

/// Scans the fixture under its data model and compares findings with the
/// manifest. Each expectation must match exactly one finding on (line, kind,
/// variant) and no finding may be left over. Witnesses are checked by
/// concrete evaluation of the matching encoding.
FixtureResult run_fixture(const Manifest& m, const sat::SolveBudget& budget = {});

/// Every subdirectory holding a source.c; one without a manifest fails.
RegressionResult run_regression(const std::string& corpus_dir, const sat::SolveBudget& budget = {});

} // namespace bvscan::corpus
