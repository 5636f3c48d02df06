// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>

#include "bvscan/bv.hpp"
#include "bvscan/sat.hpp"

namespace bvscan::solver {

using sat::Cnf;
using sat::SolveBudget;

/// Tseitin bit-blasting. Ripple-carry adders for add/sub, a shift-add ladder
/// for mul, barrel shifters for variable shift amounts, direct wiring for
/// extract and extensions, and LSB-to-MSB comparator chains. Gates over
/// constant inputs fold away, so constant multipliers and shift amounts cost
/// no extra clauses. Every bit of every free variable gets a CNF variable.
Cnf bitblast(const bv::Formula& f);

enum class Outcome { Sat, Unsat, Unknown };

const char* outcome_name(Outcome o);

struct Verdict {
    Outcome outcome = Outcome::Unknown;
    /// Total over the formula's free variables when Sat, empty otherwise.
    bv::Assignment witness;
    /// Budget descriptor when Unknown.
    std::string reason;
    sat::SatStats stats;
    int cnf_vars = 0;
    size_t cnf_clauses = 0;

    [[nodiscard]] bool sat() const { return outcome == Outcome::Sat; }
    [[nodiscard]] bool unsat() const { return outcome == Outcome::Unsat; }
    [[nodiscard]] bool unknown() const { return outcome == Outcome::Unknown; }
};

/// A decoded model failed to satisfy the formula. Always a bit-blasting bug.
class WitnessValidationFailure : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Decides `f`. Sat witnesses are decoded bit by bit and checked with
/// eval_formula before they are returned.
Verdict check(const bv::Formula& f, const SolveBudget& budget, uint64_t seed = 0);

/// SMT-LIB v2 text (QF_BV): declarations, one assertion, check-sat, get-model.
std::string emit_smtlib(const bv::Formula& f);

} // namespace bvscan::solver
