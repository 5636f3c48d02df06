// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include "bvscan/corpus.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <sstream>

#include "bvscan/kv.hpp"
#include "bvscan/report.hpp"

namespace bvscan::corpus {

namespace fs = std::filesystem;

namespace {

std::string key_str(uint32_t line, const std::string& kind, const std::string& variant) {
    return "line " + std::to_string(line) + " " + kind + (variant.empty() ? "" : "/" + variant);
}

bv::Assignment parse_values(const kv::Record& r) {
    bv::Assignment out;
    std::istringstream in(r.get("values"));
    std::string item;
    while (in >> item) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw r.error("witness value '" + item + "' is not NAME=VALUE");
        }
        size_t used = 0;
        const std::string text = item.substr(eq + 1);
        uint64_t v = 0;
        try {
            v = std::stoull(text, &used, 0);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size()) {
            throw r.error("witness value '" + item + "' is not a number");
        }
        out[item.substr(0, eq)] = v;
    }
    return out;
}

bool parse_bool(const kv::Record& r, const std::string& key) {
    const std::string v = r.get(key);
    if (v == "true") {
        return true;
    }
    if (v == "false") {
        return false;
    }
    throw r.error(key + " must be true or false");
}

} // namespace

Manifest load_manifest(const std::string& dir) {
    Manifest m;
    m.dir = dir;
    m.name = fs::path(dir).filename().string();
    if (m.name.empty()) {
        m.name = fs::path(dir).parent_path().filename().string();
    }
    bool have_fixture = false;
    for (const auto& r : kv::parse_file((fs::path(dir) / "manifest").string())) {
        const std::string type = r.get("type");
        if (type == "fixture") {
            m.source = r.get("source");
            m.data_model = r.find("data_model").value_or("ILP32");
            m.upstream = r.find("upstream").value_or("");
            have_fixture = true;
        } else if (type == "expect") {
            m.expectations.push_back({
                .line = static_cast<uint32_t>(r.get_uint("line")),
                .kind = r.get("kind"),
                .variant = r.find("variant").value_or(""),
                .verdict = r.get("verdict"),
                .severity = r.find("severity").value_or(""),
                .cwe = r.find("cwe").value_or(""),
                .manifest_line = r.line,
            });
        } else if (type == "witness") {
            m.witnesses.push_back({
                .line = static_cast<uint32_t>(r.get_uint("line")),
                .kind = r.get("kind"),
                .variant = r.find("variant").value_or(""),
                .values = parse_values(r),
                .holds = parse_bool(r, "holds"),
                .manifest_line = r.line,
            });
        } else {
            throw r.error("unknown record type '" + type + "'");
        }
    }
    if (!have_fixture) {
        throw kv::FormatError((fs::path(dir) / "manifest").string(), 0, "no type=fixture record");
    }
    return m;
}

FixtureResult run_fixture(const Manifest& m, const sat::SolveBudget& budget) {
    FixtureResult res{.name = m.name};
    const auto start = std::chrono::steady_clock::now();
    const auto fail = [&](const std::string& what, const std::string& detail) {
        res.mismatches.push_back({m.name, what, detail});
    };

    report::ScanOptions options;
    options.budget = budget;
    options.reproducible = true;
    try {
        options.model = fe::DataModel::from_label(m.data_model);
    } catch (const std::exception& e) {
        fail("error", e.what());
        return res;
    }
    const std::string source = (fs::path(m.dir) / m.source).string();
    const report::Collected collected = report::collect({source}, options);
    for (const auto& e : collected.errors) {
        fail("error", e.message);
    }
    const report::Report r = report::solve_encodings(collected, options);
    res.findings = r.findings.size();

    std::vector<bool> used(r.findings.size(), false);
    for (const auto& want : m.expectations) {
        const std::string key = key_str(want.line, want.kind, want.variant);
        std::vector<size_t> hits;
        for (size_t i = 0; i < r.findings.size(); ++i) {
            const auto& f = r.findings[i];
            if (!used[i] && f.site.line == want.line && f.kind == want.kind && f.variant == want.variant) {
                hits.push_back(i);
            }
        }
        if (hits.empty()) {
            fail("missing", key + " (manifest line " + std::to_string(want.manifest_line) + ")");
            continue;
        }
        // Equal keys pair up in column order, so duplicates match one-to-one.
        const size_t i = hits.front();
        used[i] = true;
        ++res.matched;
        const auto& f = r.findings[i];
        const std::string got = solver::outcome_name(f.outcome);
        if (got != want.verdict) {
            fail("verdict", key + ": expected " + want.verdict + ", got " + got);
        }
        if (!want.severity.empty() && f.severity != want.severity) {
            fail("severity", key + ": expected " + want.severity + ", got " + f.severity);
        }
        if (!want.cwe.empty() && f.cwe != want.cwe) {
            fail("cwe", key + ": expected " + want.cwe + ", got " + f.cwe);
        }
    }
    for (size_t i = 0; i < r.findings.size(); ++i) {
        if (!used[i]) {
            const auto& f = r.findings[i];
            fail("unexpected", key_str(f.site.line, f.kind, f.variant) + " " + solver::outcome_name(f.outcome));
        }
    }

    for (const auto& w : m.witnesses) {
        const std::string key = key_str(w.line, w.kind, w.variant);
        std::vector<const enc::Encoding*> hits;
        for (const auto& se : collected.encodings) {
            if (se.site.line == w.line && ex::kind_name(se.kind) == w.kind && se.encoding.variant == w.variant) {
                hits.push_back(&se.encoding);
            }
        }
        if (hits.size() != 1) {
            fail("witness", key + ": " + std::to_string(hits.size()) + " encodings match, expected 1");
            continue;
        }
        ++res.witnesses_checked;
        try {
            const bool holds = bv::eval_formula(hits.front()->formula, w.values);
            if (holds != w.holds) {
                fail("witness", key + ": formula evaluates to " + (holds ? "true" : "false") + " under manifest line " +
                                    std::to_string(w.manifest_line));
            }
        } catch (const bv::MissingVar& e) {
            fail("witness", key + ": " + e.what());
        }
    }
    res.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return res;
}

bool RegressionResult::passed() const {
    return std::all_of(fixtures.begin(), fixtures.end(), [](const FixtureResult& f) { return f.mismatches.empty(); });
}

std::string RegressionResult::diff() const {
    std::string out;
    for (const auto& f : fixtures) {
        for (const auto& m : f.mismatches) {
            out += m.fixture + ": " + m.what + ": " + m.detail + "\n";
        }
    }
    return out;
}

RegressionResult run_regression(const std::string& corpus_dir, const sat::SolveBudget& budget) {
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(corpus_dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / "source.c")) {
            dirs.push_back(entry.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    RegressionResult out;
    for (const auto& dir : dirs) {
        try {
            out.fixtures.push_back(run_fixture(load_manifest(dir.string()), budget));
        } catch (const std::exception& e) {
            FixtureResult bad{.name = dir.filename().string()};
            bad.mismatches.push_back({bad.name, "error", e.what()});
            out.fixtures.push_back(std::move(bad));
        }
    }
    return out;
}

} // namespace bvscan::corpus
