// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include "bvscan/guard.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace bvscan::guard {

const char* direction_name(Direction d) { return d == Direction::SafeMin ? "safe-min" : "safe-max"; }

Direction direction_from_name(const std::string& name) {
    if (name == "safe-min") {
        return Direction::SafeMin;
    }
    if (name == "safe-max") {
        return Direction::SafeMax;
    }
    throw GuardError("unknown guard direction '" + name + "' (expected safe-min or safe-max)");
}

GuardSpec derive_guard(const enc::Encoding& e, const std::string& variable, Direction direction,
                       const bv::Assignment& bindings, const solver::SolveBudget& budget, const std::string& source_id) {
    const auto start = std::chrono::steady_clock::now();
    if (bindings.count(variable) != 0) {
        throw GuardError("guard variable '" + variable + "' is also bound to a constant");
    }
    const bv::Formula f = bindings.empty() ? e.formula : bv::substitute(e.formula, bindings);
    const auto var_it = f.free_vars().find(variable);
    if (var_it == f.free_vars().end()) {
        throw GuardError("'" + variable + "' is not an input of " + e.description);
    }
    const unsigned width = var_it->second;
    const uint64_t top = bv::mask(width);
    const bv::Term x = bv::var(variable, width);

    int calls = 0;
    const auto probe = [&](const bv::Formula& g) {
        ++calls;
        solver::Verdict v = solver::check(g, budget);
        if (v.unknown()) {
            throw GuardError("solver gave up during guard derivation: " + v.reason);
        }
        return v;
    };

    const solver::Verdict open = probe(f);
    if (open.unsat()) {
        throw WholeDomainSafe(e.description + " is unsatisfiable without a guard");
    }
    GuardSpec spec{.variable = variable, .direction = direction, .width = width, .source_encoding = source_id};

    // Invariant: `safe` is a probe value whose side is Unsat, `unsafe` is an
    // actual witness value with its witness kept.
    uint64_t unsafe = open.witness.at(variable);
    bv::Assignment unsafe_witness = open.witness;
    uint64_t safe = 0;
    if (direction == Direction::SafeMax) {
        if (probe(bv::conj({f, bv::ule(x, bv::constant(0, width))})).sat()) {
            throw NoSafeRegion(e.description + " is satisfiable with " + variable + " = 0");
        }
        safe = 0;
        while (unsafe - safe > 1) {
            const uint64_t mid = safe + (unsafe - safe) / 2;
            const solver::Verdict v = probe(bv::conj({f, bv::ule(x, bv::constant(mid, width))}));
            if (v.sat()) {
                unsafe = v.witness.at(variable);
                unsafe_witness = v.witness;
            } else {
                safe = mid;
            }
        }
    } else {
        if (probe(bv::conj({f, bv::uge(x, bv::constant(top, width))})).sat()) {
            throw NoSafeRegion(e.description + " is satisfiable with " + variable + " = " + bv::hex(top, width));
        }
        safe = top;
        while (safe - unsafe > 1) {
            const uint64_t mid = unsafe + (safe - unsafe) / 2;
            const solver::Verdict v = probe(bv::conj({f, bv::uge(x, bv::constant(mid, width))}));
            if (v.sat()) {
                unsafe = v.witness.at(variable);
                unsafe_witness = v.witness;
            } else {
                safe = mid;
            }
        }
    }
    if (!bv::eval_formula(f, unsafe_witness)) {
        throw GuardError("boundary witness does not satisfy the predicate");
    }
    for (const auto& [name, value] : bindings) {
        unsafe_witness[name] = value;
    }
    spec.threshold = safe;
    spec.unsafe_neighbor = unsafe;
    spec.neighbor_witness = std::move(unsafe_witness);
    spec.solver_calls = calls;
    spec.derivation_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return spec;
}

namespace {

// Hides the value from the optimizer so every loop iteration really checks.
inline void opaque(uint64_t& v) { asm volatile("" : "+r"(v)); }

} // namespace

BenchReport run_bench(const GuardSpec& spec, size_t n_safe, size_t n_unsafe, uint64_t seed, size_t calls_per_sample) {
    if (n_safe == 0 || n_unsafe == 0 || calls_per_sample == 0) {
        throw GuardError("benchmark needs at least one safe and one unsafe input");
    }
    const uint64_t top = bv::mask(spec.width);
    uint64_t safe_lo = 0;
    uint64_t safe_hi = spec.threshold;
    uint64_t unsafe_lo = spec.threshold + 1;
    uint64_t unsafe_hi = top;
    if (spec.direction == Direction::SafeMin) {
        safe_lo = spec.threshold;
        safe_hi = top;
        unsafe_lo = 0;
        unsafe_hi = spec.threshold - 1;
    }
    if ((spec.direction == Direction::SafeMin && spec.threshold == 0) ||
        (spec.direction == Direction::SafeMax && spec.threshold >= top)) {
        throw GuardError("degenerate guard: every input is safe");
    }

    std::mt19937_64 rng(seed);
    std::vector<std::pair<uint64_t, bool>> inputs;
    inputs.reserve(n_safe + n_unsafe);
    std::uniform_int_distribution<uint64_t> safe_dist(safe_lo, safe_hi);
    std::uniform_int_distribution<uint64_t> unsafe_dist(unsafe_lo, unsafe_hi);
    for (size_t i = 0; i < n_safe; ++i) {
        inputs.emplace_back(safe_dist(rng), true);
    }
    for (size_t i = 0; i < n_unsafe; ++i) {
        inputs.emplace_back(unsafe_dist(rng), false);
    }
    std::shuffle(inputs.begin(), inputs.end(), rng);

    BenchReport report{.safe_count = n_safe, .unsafe_count = n_unsafe, .calls_per_sample = calls_per_sample};
    std::vector<double> samples;
    samples.reserve(inputs.size());
    uint64_t sink = 0;
    double total_ns = 0;
    for (const auto& [value, safe] : inputs) {
        const bool allowed = check_guard(spec, value) == GuardDecision::Allow;
        report.false_positives += (safe && !allowed) ? 1 : 0;
        report.false_negatives += (!safe && allowed) ? 1 : 0;

        const auto t0 = std::chrono::steady_clock::now();
        for (size_t i = 0; i < calls_per_sample; ++i) {
            uint64_t x = value;
            opaque(x);
            sink += static_cast<uint64_t>(check_guard(spec, x));
        }
        const auto t1 = std::chrono::steady_clock::now();
        const double ns = std::chrono::duration<double, std::nano>(t1 - t0).count();
        total_ns += ns;
        samples.push_back(ns / static_cast<double>(calls_per_sample));
    }
    opaque(sink);

    std::sort(samples.begin(), samples.end());
    double sum = 0;
    for (const double s : samples) {
        sum += s;
    }
    const size_t n = samples.size();
    report.mean_ns = sum / static_cast<double>(n);
    report.median_ns = n % 2 == 1 ? samples[n / 2] : (samples[n / 2 - 1] + samples[n / 2]) / 2;
    report.p99_ns = samples[static_cast<size_t>(std::ceil(0.99 * static_cast<double>(n))) - 1];
    report.throughput = total_ns > 0 ? static_cast<double>(n * calls_per_sample) * 1e9 / total_ns : 0;
    return report;
}

} // namespace bvscan::guard
