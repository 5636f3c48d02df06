// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace bvscan::sat {

/// Propositional problem in DIMACS convention: variables 1..num_vars, a
/// negative literal is the negated variable.
struct Cnf {
    int num_vars = 0;
    std::vector<std::vector<int>> clauses;
    /// (bitvector variable, bit index) -> CNF variable. Bit 0 is the LSB.
    std::map<std::pair<std::string, unsigned>, int> var_map;

    [[nodiscard]] std::string to_dimacs() const;
};

struct SolveBudget {
    uint64_t max_conflicts = 10'000'000;
    double max_wall_time = 60.0; // seconds
};

using Clock = std::chrono::steady_clock;

enum class SatStatus { Sat, Unsat, Unknown };

struct SatStats {
    uint64_t conflicts = 0;
    uint64_t decisions = 0;
    uint64_t propagations = 0;
    uint64_t restarts = 0;
    uint64_t learnts = 0;
};

struct SatResult {
    SatStatus status = SatStatus::Unknown;
    /// Indexed by CNF variable; entry 0 unused. Only filled when Sat.
    std::vector<bool> model;
    /// Budget descriptor when Unknown.
    std::string reason;
    SatStats stats;
};

/// CDCL search: two watched literals, first-UIP learning, activity-based
/// branching with ties broken by lowest variable index, phase saving and
/// Luby restarts with a 64-conflict unit. `seed` only perturbs initial
/// phases; seed 0 starts every variable false. Deterministic for a fixed seed.
SatResult sat_solve(const Cnf& cnf, const SolveBudget& budget, uint64_t seed = 0);
SatResult sat_solve(const Cnf& cnf, const SolveBudget& budget, uint64_t seed, Clock::time_point deadline);

/// True when `model` satisfies every clause.
bool satisfies(const Cnf& cnf, const std::vector<bool>& model);

uint64_t luby(uint64_t i);

} // namespace bvscan::sat
