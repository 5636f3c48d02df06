// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#pragma once

// Candidate arithmetic sites found by walking a type-resolved unit.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bvscan/bv.hpp"
#include "bvscan/frontend.hpp"

namespace bvscan::ex {

enum class PatternKind {
    MulOverflow,
    AddOverflow,
    SubUnderflow,
    ShiftSignedUB,
    TruncCast,
    SignCastBoundary,
    SeqComparePair,
    GuardBypassMul,
    IndexBound,
};

const char* kind_name(PatternKind k);
std::optional<PatternKind> kind_from_name(std::string_view name);

/// One input of a candidate. `term` is the operand translated to a bitvector
/// at the width the site is encoded at.
struct Operand {
    std::string role;
    std::string name; // source text of the operand
    fe::IntType type;
    fe::ExprPtr expr;
    bv::Term term;
};

struct Candidate {
    PatternKind kind = PatternKind::MulOverflow;
    fe::SourceSpan site;
    std::vector<Operand> operands;
    std::string notes;
    std::string function;
    /// "guarded" when an early return in the same function already rejects
    /// the underflowing operands; the finding is still reported.
    std::string severity = "flagged";
    /// Bit width of the arithmetic at the site. Narrower than the C type when
    /// the result is immediately truncated.
    unsigned width = 32;
    /// Kind-specific constants: multiplier, bound, shamt, range_max, cap,
    /// target_width, rel1/rel2, mul_on_rhs, guard_rel.
    std::map<std::string, uint64_t> params;
    /// IndexBound: the candidate whose result reaches the index.
    std::shared_ptr<const Candidate> feeder;

    [[nodiscard]] const Operand& operand(std::string_view role) const;
    [[nodiscard]] bool has_param(const std::string& key) const { return params.count(key) != 0; }
};

/// Classification rules:
///  - unsigned * or + used as a call argument, an if-condition operand or a
///    subtraction operand: MulOverflow / AddOverflow; a constant multiplier
///    in an early-return if-condition is GuardBypassMul instead;
///  - unsigned - whose subtrahend is not trivially smaller: SubUnderflow;
///  - signed << by a constant that can push the operand's maximum (from a
///    @range annotation or its type) past the signed maximum: ShiftSignedUB;
///  - explicit or implicit conversion to a narrower type: TruncCast, unless
///    the operand is itself a candidate, which is then encoded at the narrow
///    width;
///  - unsigned difference converted to the same-width signed type:
///    SignCastBoundary;
///  - && over two signed-difference sequence comparisons sharing a variable:
///    SeqComparePair;
///  - array index computed from any candidate above: IndexBound.
/// Candidates come out sorted by source position.
std::vector<Candidate> extract(const fe::TranslationUnit& unit, const fe::DataModel& model);

/// Pushes a truncation to `width` low bits through the ring operations so the
/// arithmetic happens at the narrow width.
bv::Term truncate_term(const bv::Term& t, unsigned width);

} // namespace bvscan::ex
