// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#pragma once

// Offline derivation of a one-comparison input guard from an encoding, and
// the runtime check that enforces it.

#include <cstdint>
#include <stdexcept>
#include <string>

#include "bvscan/encoders.hpp"
#include "bvscan/solver.hpp"

namespace bvscan::guard {

enum class Direction {
    SafeMin, // values >= threshold are safe
    SafeMax, // values <= threshold are safe
};

const char* direction_name(Direction d);
Direction direction_from_name(const std::string& name); // "safe-min" / "safe-max"

struct GuardSpec {
    std::string variable;
    Direction direction = Direction::SafeMax;
    uint64_t threshold = 0;
    unsigned width = 32;
    std::string source_encoding;
    double derivation_time_ms = 0;
    int solver_calls = 0;
    /// The input just past the threshold, with a witness proving it unsafe.
    uint64_t unsafe_neighbor = 0;
    bv::Assignment neighbor_witness;
};

class GuardError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The predicate is satisfiable even at the most extreme value of the variable.
class NoSafeRegion : public GuardError {
  public:
    using GuardError::GuardError;
};

/// The predicate is unsatisfiable without any guard.
class WholeDomainSafe : public GuardError {
  public:
    using GuardError::GuardError;
};

/// Binary search for the tightest threshold under which `e` (with the given
/// variables fixed) becomes unsatisfiable. Starts from the unconstrained
/// witness and keeps the Sat witness at the boundary as the tightness proof,
/// so at most width + 2 solver calls are made.
GuardSpec derive_guard(const enc::Encoding& e, const std::string& variable, Direction direction,
                       const bv::Assignment& bindings = {}, const solver::SolveBudget& budget = {},
                       const std::string& source_id = "");

enum class GuardDecision : uint8_t { Block = 0, Allow = 1 };

inline GuardDecision check_guard(const GuardSpec& spec, uint64_t value) noexcept {
    const uint64_t at_least = static_cast<uint64_t>(value >= spec.threshold);
    const uint64_t at_most = static_cast<uint64_t>(value <= spec.threshold);
    const uint64_t is_min = static_cast<uint64_t>(spec.direction == Direction::SafeMin);
    return static_cast<GuardDecision>((is_min & at_least) | ((is_min ^ 1U) & at_most));
}

struct BenchReport {
    size_t safe_count = 0;
    size_t unsafe_count = 0;
    size_t false_positives = 0; // safe inputs blocked
    size_t false_negatives = 0; // unsafe inputs allowed
    double mean_ns = 0;
    double median_ns = 0;
    double p99_ns = 0;
    double throughput = 0; // checks per second
    size_t calls_per_sample = 0;
};

/// Draws n_safe and n_unsafe inputs uniformly from each side of the
/// threshold and times check_guard on each in batches.
BenchReport run_bench(const GuardSpec& spec, size_t n_safe, size_t n_unsafe, uint64_t seed = 0,
                      size_t calls_per_sample = 1024);

} // namespace bvscan::guard
