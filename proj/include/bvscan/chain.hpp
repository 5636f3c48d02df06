// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#pragma once

// Two-stage escalation chains: the corrupted value of one encoding feeds an
// input of another, and both must hold at once.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bvscan/encoders.hpp"
#include "bvscan/solver.hpp"

namespace bvscan::chain {

class ChainError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct ChainSpec {
    enc::Encoding stage1;
    enc::Encoding stage2;
    /// Input of stage2 that receives stage1's output value.
    std::string bridge;
    std::string label; // e.g. "CWE-190->CWE-125"
    /// Positions in the list given to enumerate_chains; used for ordering.
    size_t stage1_index = 0;
    size_t stage2_index = 0;
};

/// Builds a spec, checking that stage1 has an output and that the bridge is
/// a free variable of stage2 with the same width.
ChainSpec make_chain(enc::Encoding stage1, enc::Encoding stage2, const std::string& bridge);

/// stage1 ∧ stage2[bridge := stage1 output]. Variables with the same name in
/// both stages are the same variable and must agree in width.
bv::Formula compose(const ChainSpec& spec);

/// Every ordered pair (i, j), i != j, where encoding i has an output and
/// encoding j a bridge input of the same width. Ordered by (i, j, input).
std::vector<ChainSpec> enumerate_chains(const std::vector<enc::Encoding>& encodings);

struct ChainVerdict {
    solver::Verdict verdict;
    solver::Verdict stage1;
    solver::Verdict stage2;
    double solve_time_ms = 0;
    /// stage1's output under the chain witness.
    std::optional<uint64_t> bridge_value;
};

/// A chain verdict that contradicts its stages: Sat while a stage alone is
/// Unsat, or a witness that does not project onto the stages.
class ChainInconsistency : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Solves the composed formula and both stages alone, then checks that a Sat
/// chain has Sat stages and that its witness, projected onto each stage,
/// satisfies that stage.
ChainVerdict run_chain(const ChainSpec& spec, const solver::SolveBudget& budget = {}, uint64_t seed = 0);

} // namespace bvscan::chain
