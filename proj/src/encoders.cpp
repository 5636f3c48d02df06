// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include "bvscan/encoders.hpp"

namespace bvscan::enc {

using bv::Formula;
using bv::Term;

const Term& Encoding::output_term() const {
    if (!output_var) {
        throw EncodingError(description + ": encoding has no output value");
    }
    return defs.at(*output_var);
}

bv::Assignment Encoding::defined_values(const bv::Assignment& witness) const {
    bv::Assignment out;
    for (const auto& [name, term] : defs) {
        out[name] = bv::eval_term(term, witness);
    }
    return out;
}

namespace {

std::string label(const Term& t);

std::string operand_label(const Term& t) {
    const std::string s = label(t);
    return s.find(' ') == std::string::npos ? s : "(" + s + ")";
}

// C-like infix text for descriptions; extensions and extracts are invisible.
std::string label(const Term& t) {
    const auto binary = [&](const char* op) { return operand_label(t.kid(0)) + " " + op + " " + operand_label(t.kid(1)); };
    switch (t.op()) {
    case bv::Op::Var: return t.name();
    case bv::Op::Const: return t.value() <= 0xFFFF ? std::to_string(t.value()) : bv::hex(t.value(), t.width());
    case bv::Op::ZeroExt:
    case bv::Op::SignExt:
    case bv::Op::Extract: return label(t.kid(0));
    case bv::Op::Not: return "~" + operand_label(t.kid(0));
    case bv::Op::Add: return binary("+");
    case bv::Op::Sub: return binary("-");
    case bv::Op::Mul: return binary("*");
    case bv::Op::Shl: return binary("<<");
    case bv::Op::LShr:
    case bv::Op::AShr: return binary(">>");
    case bv::Op::Or: return binary("|");
    case bv::Op::And: return binary("&");
    }
    return bv::to_string(t);
}

Term c(uint64_t value, unsigned width) { return bv::constant(value & bv::mask(width), width); }

void same_width(const Term& a, const Term& b, const char* what) {
    if (a.width() != b.width()) {
        throw EncodingError(std::string(what) + ": operand widths differ (" + std::to_string(a.width()) + " vs " +
                            std::to_string(b.width()) + ")");
    }
}

std::vector<std::string> var_names(const Term& t) {
    std::vector<std::string> out;
    for (const auto& [name, width] : bv::term_vars(t)) {
        out.push_back(name);
    }
    return out;
}

bv::Rel complement(bv::Rel r) {
    switch (r) {
    case bv::Rel::Eq: return bv::Rel::Ne;
    case bv::Rel::Ne: return bv::Rel::Eq;
    case bv::Rel::Ult: return bv::Rel::Uge;
    case bv::Rel::Ule: return bv::Rel::Ugt;
    case bv::Rel::Ugt: return bv::Rel::Ule;
    case bv::Rel::Uge: return bv::Rel::Ult;
    }
    return r;
}

SeqRel seq_rel(uint64_t binop) {
    switch (static_cast<fe::BinOp>(binop)) {
    case fe::BinOp::Lt: return SeqRel::Lt;
    case fe::BinOp::Le: return SeqRel::Le;
    case fe::BinOp::Gt: return SeqRel::Gt;
    case fe::BinOp::Ge: return SeqRel::Ge;
    default: throw EncodingError("sequence comparison with a non-ordering relation");
    }
}

bv::Rel unsigned_rel(uint64_t binop) {
    switch (static_cast<fe::BinOp>(binop)) {
    case fe::BinOp::Lt: return bv::Rel::Ult;
    case fe::BinOp::Le: return bv::Rel::Ule;
    case fe::BinOp::Gt: return bv::Rel::Ugt;
    case fe::BinOp::Ge: return bv::Rel::Uge;
    default: throw EncodingError("guard with a non-ordering relation");
    }
}

const char* seq_text(SeqRel r) {
    switch (r) {
    case SeqRel::Lt: return "<";
    case SeqRel::Le: return "<=";
    case SeqRel::Gt: return ">";
    case SeqRel::Ge: return ">=";
    }
    return "?";
}

} // namespace

Formula seq_relation(SeqRel rel, const Term& a, const Term& b) {
    same_width(a, b, "sequence comparison");
    const unsigned w = a.width();
    const Term d = bv::sub(a, b);
    const Term half = c(bv::msb(w), w);
    switch (rel) {
    case SeqRel::Lt: return bv::uge(d, half);
    case SeqRel::Gt: return bv::conj({bv::ugt(d, c(0, w)), bv::ult(d, half)});
    case SeqRel::Le: return bv::disj({bv::uge(d, half), bv::eq(d, c(0, w))});
    case SeqRel::Ge: return bv::ult(d, half);
    }
    throw EncodingError("unknown sequence relation");
}

Encoding encode_seq_lt(const Term& a, const Term& b) {
    return Encoding{
        .formula = seq_relation(SeqRel::Lt, a, b),
        .cwe = "CWE-190",
        .description = "sequence order " + label(a) + " < " + label(b) + " through a wrapped difference",
        .output_var = "diff",
        .defs = {{"diff", bv::sub(a, b)}},
    };
}

Encoding encode_seq_pair(const Term& a1, const Term& b1, SeqRel rel1, const Term& a2, const Term& b2, SeqRel rel2) {
    same_width(a1, a2, "sequence comparison pair");
    return Encoding{
        .formula = bv::conj({seq_relation(rel1, a1, b1), seq_relation(rel2, a2, b2)}),
        .cwe = "CWE-190",
        .description = "both " + label(a1) + " " + seq_text(rel1) + " " + label(b1) + " and " + label(a2) + " " +
                       seq_text(rel2) + " " + label(b2) + " hold in wrapped sequence space",
        .output_var = "diff",
        .defs = {{"diff", bv::sub(a1, b1)}},
    };
}

Encoding encode_seq_compare_pair(const Term& sack_start, const Term& rcv_nxt, const Term& snd_una) {
    if (sack_start.width() != 32 || rcv_nxt.width() != 32 || snd_una.width() != 32) {
        throw EncodingError("sequence numbers are 32 bits wide");
    }
    return encode_seq_pair(sack_start, rcv_nxt, SeqRel::Lt, snd_una, sack_start, SeqRel::Lt);
}

Encoding encode_alloc_overflow(const Term& n, uint64_t element_size, std::optional<uint64_t> bound) {
    const unsigned w = n.width();
    if ((element_size & bv::mask(w)) == 0) {
        throw EncodingError("element size must be non-zero");
    }
    const Term product = bv::mul(n, c(element_size, w));
    std::vector<Formula> parts{bv::ugt(n, c(0, w)), bv::ult(product, n)};
    if (bound) {
        parts.push_back(bv::ule(n, c(*bound, w)));
    }
    return Encoding{
        .formula = bv::conj(std::move(parts)),
        .cwe = "CWE-190",
        .description = label(n) + " * " + std::to_string(element_size) + " wraps below " + label(n) +
                       (bound ? " with " + label(n) + " <= " + bv::hex(*bound, w) : ""),
        .output_var = "product",
        .defs = {{"product", product}},
        .bridge_inputs = var_names(n),
    };
}

Encoding encode_mul_overflow(const Term& a, const Term& b) {
    same_width(a, b, "multiplication");
    const unsigned w = a.width();
    Formula overflow = bv::truth();
    if (2 * w <= bv::max_width) {
        const Term wide = bv::mul(bv::zero_ext(w, a), bv::zero_ext(w, b));
        overflow = bv::ugt(bv::extract(2 * w - 1, w, wide), c(0, w));
    } else {
        // Split into 32-bit halves: the product overflows when both high
        // halves are non-zero or the middle partial products carry out.
        const unsigned h = w / 2;
        const auto hi = [h](const Term& t) { return bv::zero_ext(h, bv::extract(2 * h - 1, h, t)); };
        const auto lo = [h](const Term& t) { return bv::zero_ext(h, bv::extract(h - 1, 0, t)); };
        const Term middle = bv::add(bv::add(bv::mul(hi(a), lo(b)), bv::mul(lo(a), hi(b))),
                                    bv::lshr(bv::mul(lo(a), lo(b)), c(h, w)));
        overflow = bv::disj({bv::conj({bv::ne(hi(a), c(0, w)), bv::ne(hi(b), c(0, w))}),
                             bv::uge(middle, c(uint64_t{1} << h, w))});
    }
    return Encoding{
        .formula = overflow,
        .cwe = "CWE-190",
        .description = label(a) + " * " + label(b) + " exceeds " + std::to_string(w) + " bits",
        .output_var = "product",
        .defs = {{"product", bv::mul(a, b)}},
    };
}

Encoding encode_add_overflow(const Term& a, const Term& b) {
    same_width(a, b, "addition");
    const Term sum = bv::add(a, b);
    return Encoding{
        .formula = bv::ult(sum, a),
        .cwe = "CWE-190",
        .description = label(a) + " + " + label(b) + " wraps",
        .output_var = "sum",
        .defs = {{"sum", sum}},
    };
}

Encoding encode_sub_underflow(const Term& a, const Term& b) {
    same_width(a, b, "subtraction");
    return Encoding{
        .formula = bv::ult(a, b),
        .cwe = "CWE-191",
        .description = label(a) + " - " + label(b) + " wraps below zero",
        .output_var = "result",
        .defs = {{"result", bv::sub(a, b)}},
    };
}

Encoding encode_tlv_underflow(const Term& len, const Term& tlv_len, uint64_t header, const EncoderConfig& config) {
    same_width(len, tlv_len, "TLV length");
    const unsigned w = len.width();
    const Term hdr = c(header, w);
    const Term inner = bv::add(hdr, tlv_len);
    const Term result = bv::sub(bv::sub(len, hdr), tlv_len);
    return Encoding{
        .formula = bv::conj({bv::ugt(inner, len), bv::ugt(result, c(config.tlv_wrap, w))}),
        .cwe = "CWE-191",
        .description = label(len) + " - (" + std::to_string(header) + " + " + label(tlv_len) +
                       ") wraps to a length past " + bv::hex(config.tlv_wrap & bv::mask(w), w),
        .output_var = "result",
        .defs = {{"result", result}},
        .bridge_inputs = var_names(tlv_len),
    };
}

std::pair<Encoding, Encoding> encode_shift_signed_ub(const Term& value, uint64_t shamt, uint64_t range_max) {
    const unsigned w = value.width();
    if (shamt == 0 || shamt >= w) {
        throw EncodingError("shift amount " + std::to_string(shamt) + " outside 1.." + std::to_string(w - 1));
    }
    const uint64_t signed_max = bv::mask(w - 1);
    Formula exceeds = bv::truth();
    if (2 * w <= bv::max_width) {
        const Term wide = bv::shl(bv::zero_ext(w, value), c(shamt, 2 * w));
        exceeds = bv::ugt(wide, c(signed_max, 2 * w));
    } else {
        exceeds = bv::ne(bv::lshr(value, c(w - 1 - shamt, w)), c(0, w));
    }
    const Term shifted = bv::shl(value, c(shamt, w));
    const std::string text = label(value) + " << " + std::to_string(shamt);
    Encoding vulnerable{
        .formula = bv::conj({bv::ule(value, c(range_max, w)), exceeds}),
        .cwe = "CWE-190",
        .description = text + " exceeds the signed maximum for " + label(value) + " <= " + std::to_string(range_max),
        .output_var = "shifted",
        .defs = {{"shifted", shifted}},
        .variant = "wd1",
    };
    Encoding fixed{
        .formula = bv::ugt(shifted, c(bv::mask(w), w)),
        .cwe = "CWE-190",
        .description = text + " after an unsigned cast exceeds " + std::to_string(w) + " bits",
        .output_var = "shifted",
        .defs = {{"shifted", shifted}},
        .variant = "wd2",
    };
    return {std::move(vulnerable), std::move(fixed)};
}

Encoding encode_trunc_cast(const Term& value, unsigned to_width) {
    const unsigned w = value.width();
    if (to_width == 0 || to_width >= w) {
        throw EncodingError("truncation to " + std::to_string(to_width) + " bits from " + std::to_string(w));
    }
    const Term low = bv::extract(to_width - 1, 0, value);
    return Encoding{
        .formula = bv::conj({bv::ugt(bv::extract(w - 1, to_width, value), c(0, w - to_width)),
                             bv::ne(bv::zero_ext(w - to_width, low), value)}),
        .cwe = "CWE-195",
        .description = "conversion of " + label(value) + " to " + std::to_string(to_width) + " bits drops set bits",
        .output_var = "truncated",
        .defs = {{"truncated", low}},
    };
}

Encoding encode_signed_cast_boundary(const Term& minuend, const Term& subtrahend, bool guarded) {
    same_width(minuend, subtrahend, "signed conversion");
    const unsigned w = minuend.width();
    const Term diff = bv::sub(minuend, subtrahend);
    const Term boundary = c(bv::msb(w), w);
    Formula f = bv::eq(diff, boundary);
    if (guarded) {
        f = bv::conj({bv::ult(diff, boundary), f});
    }
    return Encoding{
        .formula = f,
        .cwe = "CWE-195",
        .description = label(minuend) + " - " + label(subtrahend) + " converts to the signed minimum" +
                       (guarded ? " despite a diff < " + bv::hex(bv::msb(w), w) + " guard" : ""),
        .output_var = "diff",
        .defs = {{"diff", diff}},
        .variant = guarded ? "wd3" : "wd1",
    };
}

std::pair<Encoding, Encoding> encode_guard_bypass(const Term& size, const Term& other, uint64_t multiplier,
                                                  const GuardShape& guard, uint64_t cap) {
    const unsigned w = size.width();
    const unsigned ow = other.width();
    if ((multiplier & bv::mask(w)) == 0) {
        throw EncodingError("multiplier must be non-zero");
    }
    if (cap == 0 || !bv::fits(cap, ow)) {
        throw EncodingError("capacity " + std::to_string(cap) + " does not fit " + std::to_string(ow) + " bits");
    }
    const Formula phase1 = bv::conj({
        bv::ugt(size, c(bv::mask(w) / multiplier, w)),
        bv::uge(other, c(multiplier, ow)),
        bv::ult(other, c(cap, ow)),
        bv::atom(complement(guard.rel), guard.lhs, guard.rhs),
    });
    const Term offset = bv::sub(other, bv::resize(size, ow, false));
    const std::string mul_text = label(size) + " * " + std::to_string(multiplier);
    Encoding first{
        .formula = phase1,
        .cwe = "CWE-190",
        .description = mul_text + " wraps and passes the early-return guard on " + label(other),
        .output_var = "product",
        .defs = {{"product", bv::mul(size, c(multiplier, w))}},
        .bridge_inputs = var_names(size),
        .variant = "phase1",
    };
    Encoding second{
        .formula = bv::conj({phase1, bv::ugt(offset, c(cap, ow))}),
        .cwe = "CWE-125",
        .description = "after the bypass, " + label(other) + " - " + label(size) + " indexes past " +
                       std::to_string(cap) + " bytes",
        .output_var = "offset",
        .defs = {{"offset", offset}},
        .bridge_inputs = var_names(size),
        .variant = "phase2",
    };
    return {std::move(first), std::move(second)};
}

std::pair<Encoding, Encoding> encode_guard_bypass(const Term& size, const Term& stack_size, uint64_t stack_cap) {
    same_width(size, stack_size, "guard bypass");
    const GuardShape guard{bv::Rel::Ult, stack_size, bv::mul(size, c(2, size.width()))};
    return encode_guard_bypass(size, stack_size, 2, guard, stack_cap);
}

Encoding encode_oob_sink(unsigned width, uint64_t bound, const std::string& name) {
    const Term size = bv::var(name, width);
    return Encoding{
        .formula = bv::ugt(size, c(bound, width)),
        .cwe = "CWE-125",
        .description = "read of " + name + " bytes from a " + std::to_string(bound) + "-byte buffer",
        .bridge_inputs = {name},
    };
}

namespace {

std::vector<Encoding> dispatch(const ex::Candidate& cand, const EncoderConfig& config) {
    using ex::PatternKind;
    const auto term = [&](const char* role) { return cand.operand(role).term; };
    switch (cand.kind) {
    case PatternKind::MulOverflow:
        if (cand.has_param("multiplier")) {
            std::optional<uint64_t> bound;
            if (cand.has_param("bound")) {
                bound = cand.params.at("bound");
            }
            return {encode_alloc_overflow(term("n"), cand.params.at("multiplier"), bound)};
        }
        return {encode_mul_overflow(term("lhs"), term("rhs"))};
    case PatternKind::AddOverflow: return {encode_add_overflow(term("lhs"), term("rhs"))};
    case PatternKind::SubUnderflow: {
        const Term minuend = term("minuend");
        const Term subtrahend = term("subtrahend");
        if (subtrahend.op() == bv::Op::Add) {
            for (size_t i = 0; i < 2; ++i) {
                if (subtrahend.kid(i).is_const()) {
                    return {encode_tlv_underflow(minuend, subtrahend.kid(1 - i), subtrahend.kid(i).value(), config)};
                }
            }
        }
        return {encode_sub_underflow(minuend, subtrahend)};
    }
    case PatternKind::ShiftSignedUB: {
        auto [wd1, wd2] =
            encode_shift_signed_ub(term("value"), cand.params.at("shamt"), cand.params.at("range_max"));
        return {std::move(wd1), std::move(wd2)};
    }
    case PatternKind::TruncCast:
        return {encode_trunc_cast(term("value"), static_cast<unsigned>(cand.params.at("target_width")))};
    case PatternKind::SignCastBoundary:
        return {encode_signed_cast_boundary(term("minuend"), term("subtrahend"), false),
                encode_signed_cast_boundary(term("minuend"), term("subtrahend"), true)};
    case PatternKind::SeqComparePair:
        return {encode_seq_pair(term("a1"), term("b1"), seq_rel(cand.params.at("rel1")), term("a2"), term("b2"),
                                seq_rel(cand.params.at("rel2")))};
    case PatternKind::GuardBypassMul: {
        const GuardShape guard{unsigned_rel(cand.params.at("guard_rel")), term("guard_lhs"), term("guard_rhs")};
        const uint64_t cap = cand.has_param("cap") ? cand.params.at("cap") : config.oob_bound;
        auto [p1, p2] = encode_guard_bypass(term("size"), term("other"), cand.params.at("multiplier"), guard, cap);
        return {std::move(p1), std::move(p2)};
    }
    case PatternKind::IndexBound: {
        if (!cand.feeder) {
            throw EncodingError("index candidate without the arithmetic that computes it");
        }
        Encoding base = dispatch(*cand.feeder, config).front();
        const Term index = term("index");
        const uint64_t cap = cand.has_param("cap") ? cand.params.at("cap") : config.oob_bound;
        base.formula = bv::conj({base.formula, bv::uge(index, c(cap, index.width()))});
        base.cwe = "CWE-125";
        base.description = "index " + cand.operand("index").name + " reaches past " + std::to_string(cap) +
                           " elements when " + base.description;
        base.defs.insert_or_assign("index", index);
        base.output_var = "index";
        base.bridge_inputs.clear();
        base.variant.clear();
        return {std::move(base)};
    }
    }
    throw EncodingError("unmapped pattern kind");
}

} // namespace

std::vector<Encoding> encode_candidate(const ex::Candidate& cand, const EncoderConfig& config) {
    std::vector<Encoding> out = dispatch(cand, config);
    for (auto& e : out) {
        e.severity = cand.severity;
    }
    return out;
}

} // namespace bvscan::enc
