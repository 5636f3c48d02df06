// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#pragma once

// Vulnerability predicates over bitvectors. Each encoding is satisfiable
// exactly when the modeled weakness can occur; a witness is an input that
// triggers it.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bvscan/bv.hpp"
#include "bvscan/extract.hpp"

namespace bvscan::enc {

class EncodingError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct Encoding {
    bv::Formula formula;
    std::string cwe; // "CWE-190", "CWE-191", "CWE-195" or "CWE-125"
    std::string threat_tag = "T1";
    std::string description;
    /// Name of the corrupted value, defined in `defs`. Chaining feeds it into
    /// another encoding's bridge input.
    std::optional<std::string> output_var;
    std::map<std::string, bv::Term> defs;
    /// Free variables that may receive another encoding's corrupted value.
    std::vector<std::string> bridge_inputs;
    std::string severity = "flagged";
    /// Distinguishes paired encodings of one site: wd1/wd2, wd1/wd3,
    /// phase1/phase2. Empty for single encodings.
    std::string variant;

    [[nodiscard]] const bv::Term& output_term() const;
    /// Values of every defined variable under a witness of `formula`.
    [[nodiscard]] bv::Assignment defined_values(const bv::Assignment& witness) const;
};

struct EncoderConfig {
    uint64_t oob_bound = 4096; // capacity for out-of-bounds predicates without a known array size
    uint64_t tlv_wrap = 0xFF;  // a wrapped TLV length above this walks past the record
};

enum class SeqRel { Lt, Le, Gt, Ge };

/// Signed-difference sequence order a REL b, i.e. (int)(a - b) REL 0.
bv::Formula seq_relation(SeqRel rel, const bv::Term& a, const bv::Term& b);

/// a precedes b in sequence space; output `diff` = a - b.
Encoding encode_seq_lt(const bv::Term& a, const bv::Term& b);

/// Both sequence comparisons hold at once; output `diff` = a1 - b1.
Encoding encode_seq_pair(const bv::Term& a1, const bv::Term& b1, SeqRel rel1, const bv::Term& a2, const bv::Term& b2,
                         SeqRel rel2);

/// The SACK hole test: start < rcv_nxt and snd_una < start.
Encoding encode_seq_compare_pair(const bv::Term& sack_start, const bv::Term& rcv_nxt, const bv::Term& snd_una);

/// n * element_size wraps below n. Throws EncodingError for element_size 0.
Encoding encode_alloc_overflow(const bv::Term& n, uint64_t element_size, std::optional<uint64_t> bound = std::nullopt);

/// Exact unsigned product overflow of two non-constant operands.
Encoding encode_mul_overflow(const bv::Term& a, const bv::Term& b);

Encoding encode_add_overflow(const bv::Term& a, const bv::Term& b);

/// Generic a - b with b > a.
Encoding encode_sub_underflow(const bv::Term& a, const bv::Term& b);

/// len - (header + tlv_len) with the inner record longer than len.
Encoding encode_tlv_underflow(const bv::Term& len, const bv::Term& tlv_len, uint64_t header,
                              const EncoderConfig& config = {});

/// Signed left shift of a value bounded by range_max. The first encoding is
/// the vulnerable form (the shifted value exceeds the signed maximum, checked
/// at double width so wrapped bits are not lost); the second is the
/// unsigned-cast-first form, whose result always fits.
std::pair<Encoding, Encoding> encode_shift_signed_ub(const bv::Term& value, uint64_t shamt, uint64_t range_max);

/// Conversion of `value` to to_width bits that changes the value.
Encoding encode_trunc_cast(const bv::Term& value, unsigned to_width);

/// Unsigned difference that lands on the signed minimum after conversion;
/// the guarded form adds diff < 2^(w-1) and is unsatisfiable.
Encoding encode_signed_cast_boundary(const bv::Term& minuend, const bv::Term& subtrahend, bool guarded);

/// Early-return guard `guard_lhs REL guard_rhs` whose multiplication wraps,
/// letting an oversized `size` through. Phase one is the overflow bypass,
/// phase two the resulting out-of-bounds offset other - size.
struct GuardShape {
    bv::Rel rel;
    bv::Term lhs;
    bv::Term rhs;
};
std::pair<Encoding, Encoding> encode_guard_bypass(const bv::Term& size, const bv::Term& other, uint64_t multiplier,
                                                  const GuardShape& guard, uint64_t cap);

/// The Fpy shape: `if (stack_size < size * 2) return;`.
std::pair<Encoding, Encoding> encode_guard_bypass(const bv::Term& size, const bv::Term& stack_size, uint64_t stack_cap);

/// A read of size_arg bytes from a buffer of `bound` bytes.
Encoding encode_oob_sink(unsigned width, uint64_t bound, const std::string& name = "size_arg");

/// Encodings for one candidate, in variant order.
std::vector<Encoding> encode_candidate(const ex::Candidate& c, const EncoderConfig& config = {});

} // namespace bvscan::enc
