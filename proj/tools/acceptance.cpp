// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT

// Acceptance run: one PASS/FAIL line per criterion. Tolerances live in the
// constants below. Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "bvscan/chain.hpp"
#include "bvscan/corpus.hpp"
#include "bvscan/guard.hpp"
#include "bvscan/policy.hpp"
#include "bvscan/report.hpp"
#include "formula_oracle.hpp"

namespace {

using namespace bvscan;
using Clock = std::chrono::steady_clock;

constexpr double kSingleQueryLimitS = 1.0;
constexpr double kCorpusLimitS = 30.0;
constexpr double kChainLimitS = 1.0;
constexpr double kGuardLimitS = 10.0;
constexpr size_t kBenchSafe = 2000;
constexpr size_t kBenchUnsafe = 2000;
constexpr double kMinThroughput = 1e6;
constexpr int kRandomFormulas = 10000;
constexpr double kPropertyLimitS = 300.0;

const std::string kCorpus = BVSCAN_CORPUS_DIR;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int n, const char* title, const std::function<Outcome()>& body) {
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %d %s  %s: %s\n", n, o.pass ? "PASS" : "FAIL", title, o.detail.c_str());
    std::fflush(stdout);
}

report::ScanOptions quiet() {
    report::ScanOptions o;
    o.reproducible = true;
    return o;
}

const report::SiteEncoding& find_encoding(const report::Collected& c, uint32_t line, ex::PatternKind kind,
                                          const std::string& variant = "") {
    for (const auto& se : c.encodings) {
        if (se.site.line == line && se.kind == kind && se.encoding.variant == variant) {
            return se;
        }
    }
    throw std::runtime_error(std::string("no ") + ex::kind_name(kind) + " encoding at line " + std::to_string(line));
}

const report::Finding& find_finding(const report::Report& r, uint32_t line, const std::string& kind,
                                    const std::string& variant = "") {
    for (const auto& f : r.findings) {
        if (f.site.line == line && f.kind == kind && f.variant == variant) {
            return f;
        }
    }
    throw std::runtime_error("no " + kind + " finding at line " + std::to_string(line));
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

Outcome sack() {
    const auto t0 = Clock::now();
    const report::Report r = report::scan({kCorpus + "/openbsd_sack"}, quiet());
    const double s = seconds_since(t0);
    const auto& f = find_finding(r, 13, "SeqComparePair");
    const auto collected = report::collect({kCorpus + "/openbsd_sack"}, quiet());
    const auto& e = find_encoding(collected, 13, ex::PatternKind::SeqComparePair).encoding;
    const bool witness = bv::eval_formula(e.formula, {{"sack_start", 0x80000000}, {"rcv_nxt", 0}, {"snd_una", 0}});
    const bool sat = f.outcome == solver::Outcome::Sat;
    return {sat && witness && s < kSingleQueryLimitS,
            std::string("verdict ") + solver::outcome_name(f.outcome) + ", witness (0x80000000, 0, 0) " +
                (witness ? "holds" : "fails") + ", scan " + fmt("%.3f s", s)};
}

Outcome allocation() {
    const auto collected = report::collect({kCorpus + "/alloc_size"}, quiet());
    const auto& open = find_encoding(collected, 7, ex::PatternKind::MulOverflow).encoding;
    const auto& bounded = find_encoding(collected, 17, ex::PatternKind::MulOverflow).encoding;

    auto t0 = Clock::now();
    const auto v1 = solver::check(open.formula, {});
    const double s1 = seconds_since(t0);
    t0 = Clock::now();
    const auto v2 = solver::check(bounded.formula, {});
    const double s2 = seconds_since(t0);

    bool wraps = false;
    std::string witness = "-";
    if (v1.sat()) {
        const auto defined = open.defined_values(v1.witness);
        const uint64_t n = v1.witness.at("n");
        const uint64_t product = defined.at("product");
        wraps = product < n;
        witness = "n=" + bv::hex(n, 32) + " product=" + bv::hex(product, 32);
    }
    return {v1.sat() && wraps && v2.unsat() && s1 < kSingleQueryLimitS && s2 < kSingleQueryLimitS,
            std::string("unbounded ") + solver::outcome_name(v1.outcome) + " (" + witness + ", " + fmt("%.3f s", s1) +
                "), bounded " + solver::outcome_name(v2.outcome) + " (" + fmt("%.3f s", s2) + ")"};
}

Outcome parity() {
    const auto t0 = Clock::now();
    const corpus::RegressionResult reg = corpus::run_regression(kCorpus);
    const double s = seconds_since(t0);

    const report::Report r = report::scan({kCorpus}, quiet());
    std::string missing;
    const auto verdict = [&](const std::string& fixture, uint32_t line, const std::string& kind,
                             const std::string& variant, solver::Outcome want) {
        for (const auto& f : r.findings) {
            if (f.site.file.find("/" + fixture + "/") != std::string::npos && f.site.line == line && f.kind == kind &&
                f.variant == variant) {
                if (f.outcome == want) {
                    return;
                }
                break;
            }
        }
        missing += " " + fixture + ":" + std::to_string(line) + (variant.empty() ? "" : "/" + variant);
    };
    using solver::Outcome;
    verdict("cfe_resourceid", 10, "TruncCast", "", Outcome::Sat);
    verdict("wolfssl_mldsa", 11, "ShiftSignedUB", "wd1", Outcome::Sat);
    verdict("wolfssl_mldsa", 11, "ShiftSignedUB", "wd2", Outcome::Unsat);
    verdict("mosquitto_proxy_v2", 7, "SubUnderflow", "", Outcome::Sat);
    verdict("fprime_fpy", 19, "GuardBypassMul", "phase1", Outcome::Sat);
    verdict("fprime_fpy", 19, "GuardBypassMul", "phase2", Outcome::Sat);
    verdict("openbsd_sack", 13, "SeqComparePair", "", Outcome::Sat);
    verdict("openbsd_tcp_input", 17, "SignCastBoundary", "wd1", Outcome::Sat);
    verdict("openbsd_tcp_input", 17, "SignCastBoundary", "wd3", Outcome::Unsat);

    std::string detail = std::to_string(reg.fixtures.size()) + " fixtures, regression " +
                         (reg.passed() ? "clean" : "diff: " + reg.diff()) + ", " + fmt("%.3f s", s);
    if (!missing.empty()) {
        detail += ", wrong or missing:" + missing;
    }
    return {reg.passed() && missing.empty() && s < kCorpusLimitS, detail};
}

Outcome shift_range() {
    const auto collected = report::collect({kCorpus + "/wolfssl_mldsa"}, quiet());
    const auto& e = find_encoding(collected, 11, ex::PatternKind::ShiftSignedUB, "wd1").encoding;
    std::set<uint64_t> hits;
    int evaluations = 0;
    for (uint64_t w1 = 0; w1 <= 43; ++w1) {
        ++evaluations;
        if (bv::eval_formula(e.formula, {{"w1", w1}})) {
            hits.insert(w1);
        }
    }
    std::set<uint64_t> want;
    for (uint64_t w1 = 2; w1 <= 43; ++w1) {
        want.insert(w1);
    }
    const std::string range =
        hits.empty() ? "{}" : "{" + std::to_string(*hits.begin()) + ".." + std::to_string(*hits.rbegin()) + "}";
    return {hits == want && evaluations == 44,
            std::to_string(hits.size()) + " of " + std::to_string(evaluations) + " values, set " + range};
}

Outcome chains() {
    const auto run = [](const chain::ChainSpec& spec, const bv::Assignment& known, uint64_t bridge, std::string& out) {
        const auto cv = chain::run_chain(spec);
        const bool holds = bv::eval_formula(chain::compose(spec), known);
        const uint64_t value = bv::eval_term(spec.stage1.output_term(), known);
        const double s = cv.solve_time_ms / 1000;
        out += (out.empty() ? "" : "; ") + spec.label + " " + solver::outcome_name(cv.verdict.outcome) + " " + fmt("%.1f ms", cv.solve_time_ms) +
               ", bridge " + bv::hex(value, 32) + (holds ? "" : " (witness fails)");
        return cv.verdict.sat() && holds && value == bridge && s < kChainLimitS;
    };
    std::string detail;
    const bool first = run(chain::make_chain(enc::encode_seq_lt(bv::var("sack_start", 32), bv::var("rcv_nxt", 32)),
                                             enc::encode_oob_sink(32, 4096), "size_arg"),
                           {{"sack_start", 0x91de51f1}, {"rcv_nxt", 0xc3582921}}, 0xce8628d0, detail);
    const bool second = run(chain::make_chain(enc::encode_tlv_underflow(bv::var("input_len", 32),
                                                                        bv::var("tlv_len", 32), 3),
                                              enc::encode_oob_sink(32, 4096), "size_arg"),
                            {{"input_len", 0}, {"tlv_len", 5}}, 0xfffffff8, detail);
    return {first && second, detail};
}

Outcome guards() {
    const auto check = [](const enc::Encoding& e, const std::string& var, guard::Direction dir,
                          const bv::Assignment& bindings, uint64_t want, std::string& out) {
        const auto t0 = Clock::now();
        const auto g = guard::derive_guard(e, var, dir, bindings);
        const double s = seconds_since(t0);
        const uint64_t neighbor = dir == guard::Direction::SafeMin ? g.threshold - 1 : g.threshold + 1;
        bv::Assignment at_neighbor = g.neighbor_witness;
        const bool tight = g.unsafe_neighbor == neighbor && at_neighbor.at(var) == neighbor &&
                           bv::eval_formula(e.formula, at_neighbor) &&
                           solver::check(bv::substitute(e.formula, [&] {
                                             bv::Assignment a = bindings;
                                             a[var] = neighbor;
                                             return a;
                                         }()),
                                         {})
                               .sat();
        const int limit = static_cast<int>(g.width) + 2;
        out += (out.empty() ? "" : "; ") + var + " " + guard::direction_name(dir) + " " + std::to_string(g.threshold) + " (" +
               std::to_string(g.solver_calls) + "/" + std::to_string(limit) + " calls, " + fmt("%.3f s", s) +
               (tight ? ", tight" : ", not tight") + ")";
        return g.threshold == want && tight && g.solver_calls <= limit && s < kGuardLimitS;
    };
    std::string detail;
    const auto mq = report::collect({kCorpus + "/mosquitto_proxy_v2"}, quiet());
    const bool min_ok = check(find_encoding(mq, 7, ex::PatternKind::SubUnderflow).encoding, "len",
                              guard::Direction::SafeMin, {{"tlv_len", 5}}, 8, detail);
    const auto cfe = report::collect({kCorpus + "/cfe_resourceid"}, quiet());
    const bool max_ok = check(find_encoding(cfe, 16, ex::PatternKind::MulOverflow).encoding, "count",
                              guard::Direction::SafeMax, {}, 89478485, detail);
    return {min_ok && max_ok, detail};
}

Outcome bench() {
    const auto cfe = report::collect({kCorpus + "/cfe_resourceid"}, quiet());
    const auto g =
        guard::derive_guard(find_encoding(cfe, 16, ex::PatternKind::MulOverflow).encoding, "count", guard::Direction::SafeMax);
    const auto b = guard::run_bench(g, kBenchSafe, kBenchUnsafe, 42);
    std::ostringstream d;
    d << b.safe_count << " safe + " << b.unsafe_count << " unsafe, FP=" << b.false_positives
      << " FN=" << b.false_negatives << ", " << fmt("%.2f", b.throughput / 1e6) << " M checks/s, mean "
      << fmt("%.2f", b.mean_ns) << " ns, median " << fmt("%.2f", b.median_ns) << " ns, p99 " << fmt("%.2f", b.p99_ns)
      << " ns";
    return {b.safe_count == kBenchSafe && b.unsafe_count == kBenchUnsafe && b.false_positives == 0 &&
                b.false_negatives == 0 && b.throughput >= kMinThroughput,
            d.str()};
}

Outcome policy_check() {
    const auto config = policy::parse_config(kv::parse_file(kCorpus + "/policy/config.kv"));
    std::map<std::string, policy::Decision> by_id;
    for (const auto& r : kv::parse_file(kCorpus + "/policy/actions.kv")) {
        const auto a = policy::parse_action(r);
        by_id.emplace(a.id, policy::evaluate(a, config));
    }
    const auto join = [](const policy::Decision& d) {
        std::string s = std::string(policy::verdict_name(d.verdict)) + " [";
        for (size_t i = 0; i < d.failed.size(); ++i) {
            s += (i ? "," : "") + d.failed[i];
        }
        return s + "]";
    };
    const auto& email = by_id.at("external_email");
    const auto& c5 = by_id.at("unapproved_content");
    using F = std::vector<std::string>;
    return {email.verdict == policy::Verdict::Unsafe && email.failed == F{"C1", "C2", "C4", "C5", "C6"} &&
                c5.verdict == policy::Verdict::Unsafe && c5.failed == F{"C5"},
            "email action " + join(email) + ", digest-only variant " + join(c5)};
}

Outcome properties() {
    const auto t0 = Clock::now();
    // solver against brute force, with every Sat witness checked
    testing::FormulaGen gen(20260419);
    int agree = 0;
    int sat = 0;
    int bad_witness = 0;
    for (int i = 0; i < kRandomFormulas; ++i) {
        const bv::Formula f = gen.next();
        const auto v = solver::check(f, {}, static_cast<uint64_t>(i));
        if (v.unknown()) {
            continue;
        }
        if (v.sat() == testing::exists_solution(f)) {
            ++agree;
        }
        if (v.sat()) {
            ++sat;
            bad_witness += bv::eval_formula(f, v.witness) ? 0 : 1;
        }
    }

    // ring laws at several widths
    std::mt19937_64 rng(99);
    int law_failures = 0;
    int law_checks = 0;
    for (const unsigned w : {1U, 7U, 8U, 16U, 31U, 32U, 64U}) {
        const bv::Term x = bv::var("x", w);
        const bv::Term y = bv::var("y", w);
        const bv::Term z = bv::var("z", w);
        const std::vector<std::pair<bv::Term, bv::Term>> laws{
            {bv::add(x, y), bv::add(y, x)},
            {bv::add(bv::add(x, y), z), bv::add(x, bv::add(y, z))},
            {bv::mul(x, y), bv::mul(y, x)},
            {bv::mul(bv::mul(x, y), z), bv::mul(x, bv::mul(y, z))},
            {bv::mul(x, bv::add(y, z)), bv::add(bv::mul(x, y), bv::mul(x, z))},
            {bv::sub(x, y), bv::add(x, bv::neg(y))},
            {bv::add(x, bv::constant(0, w)), x},
            {bv::mul(x, bv::constant(1, w)), x},
        };
        for (int i = 0; i < 2000; ++i) {
            const bv::Assignment a{{"x", rng() & bv::mask(w)}, {"y", rng() & bv::mask(w)}, {"z", rng() & bv::mask(w)}};
            for (const auto& [l, r] : laws) {
                ++law_checks;
                law_failures += bv::eval_term(l, a) == bv::eval_term(r, a) ? 0 : 1;
            }
        }
    }

    // byte-identical reports under a fixed seed, sequential and parallel
    report::ScanOptions o = quiet();
    o.seed = 7;
    const std::string a = report::to_json(report::scan({kCorpus}, o));
    o.jobs = 4;
    const std::string b = report::to_json(report::scan({kCorpus}, o));
    const bool deterministic = a == b;

    const double s = seconds_since(t0);
    std::ostringstream d;
    d << agree << "/" << kRandomFormulas << " formulas agree (" << sat << " sat, " << bad_witness
      << " bad witnesses), ring laws " << (law_checks - law_failures) << "/" << law_checks << ", reports "
      << (deterministic ? "identical" : "differ") << ", " << fmt("%.1f s", s);
    return {agree == kRandomFormulas && bad_witness == 0 && law_failures == 0 && deterministic &&
                s < kPropertyLimitS,
            d.str()};
}

} // namespace

int main() {
    criterion(1, "sequence compare wrap", sack);
    criterion(2, "allocation overflow and its bound", allocation);
    criterion(3, "corpus verdict parity", parity);
    criterion(4, "shift overflow range", shift_range);
    criterion(5, "escalation chains", chains);
    criterion(6, "guard derivation", guards);
    criterion(7, "guard benchmark", bench);
    criterion(8, "action policy", policy_check);
    criterion(9, "property suites", properties);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures;
}
