// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "bvscan/encoders.hpp"
#include "bvscan/solver.hpp"
#include "doctest.h"

using namespace bvscan;
using bv::Term;

namespace {

Term v(const char* name, unsigned w) { return bv::var(name, w); }
Term k(uint64_t value, unsigned w) { return bv::constant(value, w); }

solver::Verdict solve(const bv::Formula& f) {
    const auto verdict = solver::check(f, sat::SolveBudget{});
    REQUIRE_FALSE(verdict.unknown());
    return verdict;
}

// Counts assignments of two 8-bit variables satisfying `f` and compares the
// set with `oracle`, which states the weakness in plain C arithmetic.
void same_set_2x8(const bv::Formula& f, const char* x, const char* y,
                  const std::function<bool(unsigned, unsigned)>& oracle) {
    size_t mismatches = 0;
    size_t count = 0;
    for (unsigned a = 0; a < 256; ++a) {
        for (unsigned b = 0; b < 256; ++b) {
            const bool got = bv::eval_formula(f, {{x, a}, {y, b}});
            count += got ? 1 : 0;
            mismatches += got != oracle(a, b) ? 1 : 0;
        }
    }
    CHECK(mismatches == 0);
    // the solver agrees on existence
    CHECK(solve(f).sat() == (count > 0));
}

std::vector<ex::Candidate> extract_fixture(const std::string& name) {
    std::ifstream in(std::string(BVSCAN_CORPUS_DIR) + "/" + name + "/source.c");
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    const auto model = fe::DataModel::ilp32();
    return ex::extract(fe::load_source(ss.str(), name, model), model);
}

const ex::Candidate& first_of(const std::vector<ex::Candidate>& cs, ex::PatternKind kind) {
    for (const auto& c : cs) {
        if (c.kind == kind) {
            return c;
        }
    }
    FAIL("no candidate of kind " << ex::kind_name(kind));
    throw std::logic_error("unreachable");
}

} // namespace

TEST_CASE("sequence pair: sat, reference witness, forced equality") {
    const Term s = v("sack_start", 32);
    const Term r = v("rcv_nxt", 32);
    const Term u = v("snd_una", 32);
    const auto e = enc::encode_seq_compare_pair(s, r, u);
    CHECK(e.cwe == "CWE-190");
    CHECK(e.threat_tag == "T1");
    const auto verdict = solve(e.formula);
    CHECK(verdict.sat());
    CHECK(bv::eval_formula(e.formula, verdict.witness));
    const bv::Assignment known{{"sack_start", 0x80000000}, {"rcv_nxt", 0}, {"snd_una", 0}};
    CHECK(bv::eval_formula(e.formula, known));
    CHECK(e.defined_values(known).at("diff") == 0x80000000);
    CHECK(solve(bv::conj({e.formula, bv::eq(s, r)})).unsat());
    CHECK_THROWS_AS(enc::encode_seq_compare_pair(v("a", 16), v("b", 16), v("c", 16)), enc::EncodingError);
}

TEST_CASE("sequence pair: 8-bit analogue matches exhaustive enumeration") {
    const auto e = enc::encode_seq_pair(v("s", 8), v("r", 8), enc::SeqRel::Lt, v("u", 8), v("s", 8), enc::SeqRel::Lt);
    uint64_t encoded = 0;
    uint64_t brute = 0;
    bv::Assignment env{{"s", 0}, {"r", 0}, {"u", 0}};
    for (unsigned s = 0; s < 256; ++s) {
        for (unsigned r = 0; r < 256; ++r) {
            for (unsigned u = 0; u < 256; ++u) {
                env["s"] = s;
                env["r"] = r;
                env["u"] = u;
                encoded += bv::eval_formula(e.formula, env) ? 1 : 0;
                brute += (static_cast<int8_t>(static_cast<uint8_t>(s - r)) < 0 &&
                          static_cast<int8_t>(static_cast<uint8_t>(u - s)) < 0)
                             ? 1
                             : 0;
            }
        }
    }
    CHECK(encoded == brute);
    CHECK(brute == 256u * 128u * 128u);
}

TEST_CASE("sequence relations follow the signed difference") {
    for (const auto rel : {enc::SeqRel::Lt, enc::SeqRel::Le, enc::SeqRel::Gt, enc::SeqRel::Ge}) {
        const auto f = enc::seq_relation(rel, v("a", 8), v("b", 8));
        same_set_2x8(f, "a", "b", [rel](unsigned a, unsigned b) {
            const int d = static_cast<int8_t>(static_cast<uint8_t>(a - b));
            switch (rel) {
            case enc::SeqRel::Lt: return d < 0;
            case enc::SeqRel::Le: return d <= 0;
            case enc::SeqRel::Gt: return d > 0;
            case enc::SeqRel::Ge: return d >= 0;
            }
            return false;
        });
    }
}

TEST_CASE("allocation overflow: witness, bounded form, identity multiplier") {
    const Term n = v("n", 32);
    const auto open = enc::encode_alloc_overflow(n, 16);
    const auto verdict = solve(open.formula);
    REQUIRE(verdict.sat());
    const uint64_t wn = verdict.witness.at("n");
    CHECK(((wn * 16) & 0xFFFFFFFF) < wn);
    const bv::Assignment known{{"n", 0x2222221e}};
    CHECK(bv::eval_formula(open.formula, known));
    CHECK(open.defined_values(known).at("product") == 0x222221e0);
    CHECK(open.output_var == "product");
    CHECK(open.bridge_inputs == std::vector<std::string>{"n"});

    CHECK(solve(enc::encode_alloc_overflow(n, 16, 0x0FFFFFFF).formula).unsat());
    CHECK(solve(enc::encode_alloc_overflow(n, 16, 0x10000000).formula).sat());
    CHECK(solve(enc::encode_alloc_overflow(n, 1).formula).unsat());
    CHECK(solve(enc::encode_alloc_overflow(n, 1, 5).formula).unsat());
    CHECK_THROWS_AS(enc::encode_alloc_overflow(n, 0), enc::EncodingError);
}

TEST_CASE("allocation overflow: a wrapped-below product is always a real overflow") {
    // 8-bit exhaustive: every satisfying n really overflows, and for
    // multipliers up to 2 every overflow is caught.
    for (uint64_t m = 1; m < 256; ++m) {
        const auto e = enc::encode_alloc_overflow(v("n", 8), m);
        for (uint64_t n = 0; n < 256; ++n) {
            const bool hit = bv::eval_formula(e.formula, {{"n", n}});
            CHECK(hit == (n > 0 && ((n * m) & 0xFF) < n));
            if (hit) {
                CHECK(n * m > 255);
            }
            if (m <= 2) {
                CHECK(hit == (n * m > 255));
            }
        }
    }
}

TEST_CASE("multiplication overflow of two variables is exact") {
    same_set_2x8(enc::encode_mul_overflow(v("a", 8), v("b", 8)).formula, "a", "b",
                 [](unsigned a, unsigned b) { return a * b > 255; });
    // 64-bit split form against 128-bit products
    const auto e = enc::encode_mul_overflow(v("a", 64), v("b", 64));
    uint64_t x = 0x9E3779B97F4A7C15;
    const auto next = [&x] {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        return x;
    };
    for (int i = 0; i < 4000; ++i) {
        uint64_t a = next();
        uint64_t b = next();
        a >>= (a & 63); // spread magnitudes so both outcomes occur
        b >>= (b & 63);
        const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
        CHECK(bv::eval_formula(e.formula, {{"a", a}, {"b", b}}) == ((p >> 64) != 0));
    }
    for (const auto& [a, b] : std::vector<std::pair<uint64_t, uint64_t>>{
             {0xFFFFFFFF, 0x100000001}, {0x100000000, 0x100000000}, {0xFFFFFFFFFFFFFFFF, 1}, {0x8000000000000000, 2}}) {
        const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
        CHECK(bv::eval_formula(e.formula, {{"a", a}, {"b", b}}) == ((p >> 64) != 0));
    }
    CHECK(solve(enc::encode_mul_overflow(v("a", 32), v("b", 32)).formula).sat());
}

TEST_CASE("addition overflow and generic subtraction underflow") {
    same_set_2x8(enc::encode_add_overflow(v("a", 8), v("b", 8)).formula, "a", "b",
                 [](unsigned a, unsigned b) { return a + b > 255; });
    same_set_2x8(enc::encode_sub_underflow(v("a", 8), v("b", 8)).formula, "a", "b",
                 [](unsigned a, unsigned b) { return b > a; });
    // 3 + tlv_len at 32 bits cannot wrap when tlv_len is 16 bits wide
    const auto add = enc::encode_add_overflow(k(3, 32), bv::zero_ext(16, v("tlv_len", 16)));
    CHECK(solve(add.formula).unsat());
}

TEST_CASE("TLV underflow: reference witness, missing guard, wrap case") {
    const Term len = v("len", 16);
    const Term tlv = v("tlv_len", 16);
    const auto e = enc::encode_tlv_underflow(len, tlv, 3);
    CHECK(e.cwe == "CWE-191");
    CHECK(solve(e.formula).sat());
    const bv::Assignment known{{"len", 1}, {"tlv_len", 5}};
    CHECK(bv::eval_formula(e.formula, known));
    CHECK(e.defined_values(known).at("result") == 0xfff9);
    const auto guarded = bv::conj({e.formula, bv::ule(bv::add(k(3, 16), tlv), len)});
    CHECK(solve(guarded).unsat());
    CHECK_FALSE(bv::eval_formula(e.formula, {{"len", 0xFFFF}, {"tlv_len", 0xFFFF}}));
}

TEST_CASE("TLV underflow: 8-bit analogue matches exhaustive enumeration") {
    const auto e = enc::encode_tlv_underflow(v("l", 8), v("t", 8), 3, enc::EncoderConfig{.tlv_wrap = 0x0F});
    same_set_2x8(e.formula, "l", "t", [](unsigned l, unsigned t) {
        const unsigned inner = (3 + t) & 0xFF;
        const unsigned rest = (l - 3 - t) & 0xFF;
        return inner > l && rest > 0x0F;
    });
}

TEST_CASE("signed shift: vulnerable and fixed forms") {
    const Term w1 = v("w1", 32);
    const auto [wd1, wd2] = enc::encode_shift_signed_ub(w1, 30, 43);
    CHECK(wd1.variant == "wd1");
    CHECK(wd2.variant == "wd2");
    CHECK(solve(wd1.formula).sat());
    CHECK(bv::eval_formula(wd1.formula, {{"w1", 2}}));
    CHECK(wd1.defined_values({{"w1", 2}}).at("shifted") == 0x80000000);
    CHECK(solve(wd2.formula).unsat());

    // satisfying set at shift 30 over the 44 valid coefficients is exactly 2..43
    std::set<uint64_t> hits;
    for (uint64_t x = 0; x < 44; ++x) {
        if (bv::eval_formula(wd1.formula, {{"w1", x}})) {
            hits.insert(x);
        }
    }
    CHECK(hits.size() == 42);
    CHECK(*hits.begin() == 2);
    CHECK(*hits.rbegin() == 43);

    const auto [wd1b, wd2b] = enc::encode_shift_signed_ub(w1, 28, 15);
    const auto verdict = solve(wd1b.formula);
    REQUIRE(verdict.sat());
    CHECK(verdict.witness.at("w1") >= 8);
    CHECK(verdict.witness.at("w1") <= 15);
    CHECK(solve(bv::conj({wd1b.formula, bv::ult(w1, k(8, 32))})).unsat());
    CHECK(solve(wd2b.formula).unsat());

    CHECK_THROWS_AS(enc::encode_shift_signed_ub(w1, 0, 43), enc::EncodingError);
    CHECK_THROWS_AS(enc::encode_shift_signed_ub(w1, 32, 43), enc::EncodingError);
}

TEST_CASE("signed shift: 8-bit analogue and 64-bit form") {
    for (uint64_t shamt = 1; shamt < 8; ++shamt) {
        for (uint64_t range = 0; range < 256; range += 17) {
            const auto [wd1, wd2] = enc::encode_shift_signed_ub(v("x", 8), shamt, range);
            for (uint64_t x = 0; x < 256; ++x) {
                CHECK(bv::eval_formula(wd1.formula, {{"x", x}}) == (x <= range && (x << shamt) > 127));
                CHECK_FALSE(bv::eval_formula(wd2.formula, {{"x", x}}));
            }
        }
    }
    const auto [wd1, wd2] = enc::encode_shift_signed_ub(v("x", 64), 60, 100);
    CHECK(bv::eval_formula(wd1.formula, {{"x", 8}}));
    CHECK_FALSE(bv::eval_formula(wd1.formula, {{"x", 7}}));
    CHECK_FALSE(bv::eval_formula(wd1.formula, {{"x", 101}}));
}

TEST_CASE("truncation: reference witness and top-half constraint") {
    const Term id = v("id", 64);
    const auto e = enc::encode_trunc_cast(id, 32);
    CHECK(e.cwe == "CWE-195");
    CHECK(solve(e.formula).sat());
    const bv::Assignment known{{"id", 0x0000000100000000}};
    CHECK(bv::eval_formula(e.formula, known));
    CHECK(e.defined_values(known).at("truncated") == 0);
    CHECK(solve(bv::conj({e.formula, bv::eq(bv::extract(63, 32, id), k(0, 32))})).unsat());
    CHECK_THROWS_AS(enc::encode_trunc_cast(id, 64), enc::EncodingError);
}

TEST_CASE("truncation: 16 to 8 bits matches exhaustive enumeration") {
    const auto e = enc::encode_trunc_cast(v("x", 16), 8);
    uint64_t count = 0;
    for (uint64_t x = 0; x < 0x10000; ++x) {
        const bool hit = bv::eval_formula(e.formula, {{"x", x}});
        CHECK(hit == (static_cast<uint8_t>(x) != x));
        count += hit ? 1 : 0;
    }
    CHECK(count == 0x10000 - 0x100);
}

TEST_CASE("signed cast boundary: unguarded and guarded") {
    const Term a = v("rcv_nxt", 32);
    const Term b = v("th_seq", 32);
    const auto wd1 = enc::encode_signed_cast_boundary(a, b, false);
    const auto wd3 = enc::encode_signed_cast_boundary(a, b, true);
    CHECK(solve(wd1.formula).sat());
    CHECK(solve(wd3.formula).unsat());
    const bv::Assignment known{{"rcv_nxt", 0x80000000}, {"th_seq", 0}};
    CHECK(bv::eval_formula(wd1.formula, known));
    CHECK(wd1.defined_values(known).at("diff") == 0x80000000);
    same_set_2x8(enc::encode_signed_cast_boundary(v("a", 8), v("b", 8), false).formula, "a", "b",
                 [](unsigned x, unsigned y) { return static_cast<int8_t>(static_cast<uint8_t>(x - y)) == -128; });
}

TEST_CASE("guard bypass: both phases and the reference directive size") {
    const Term size = v("size", 32);
    const Term stack = v("stack_size", 32);
    const auto [p1, p2] = enc::encode_guard_bypass(size, stack, 1024);
    CHECK(p1.cwe == "CWE-190");
    CHECK(p2.cwe == "CWE-125");
    CHECK(solve(p1.formula).sat());
    const bv::Assignment known{{"size", 0x80000001}, {"stack_size", 2}};
    CHECK(bv::eval_formula(p1.formula, known));
    CHECK(p1.defined_values(known).at("product") == 2);
    const auto verdict = solve(p2.formula);
    REQUIRE(verdict.sat());
    CHECK(p2.defined_values(verdict.witness).at("offset") > 1024);
}

TEST_CASE("guard bypass: exact guard arithmetic closes the bypass (16-bit exhaustive)") {
    // With size <= cap / 2 the product cannot wrap, so passing the guard
    // keeps stack_size - size within the buffer.
    constexpr uint64_t cap = 64;
    const Term size = v("size", 16);
    const Term stack = v("stack_size", 16);
    const auto fixed = bv::conj({bv::ule(size, k(cap / 2, 16)), bv::uge(stack, k(2, 16)), bv::ult(stack, k(cap, 16)),
                                 bv::uge(stack, bv::mul(size, k(2, 16))),
                                 bv::ugt(bv::sub(stack, size), k(cap, 16))});
    size_t hits = 0;
    for (uint64_t s = 0; s < 0x10000; ++s) {
        for (uint64_t st = 0; st < cap; ++st) {
            hits += bv::eval_formula(fixed, {{"size", s}, {"stack_size", st}}) ? 1 : 0;
        }
    }
    CHECK(hits == 0);
    CHECK(solve(fixed).unsat());

    // and the unfixed phase 1 at 8 bits is the C-level bypass condition
    const auto [p1, p2] = enc::encode_guard_bypass(v("size", 8), v("stack_size", 8), 64);
    same_set_2x8(p1.formula, "size", "stack_size", [](unsigned sz, unsigned st) {
        const bool passes = !(st < ((sz * 2) & 0xFF));
        return sz > 127 && st >= 2 && st < 64 && passes;
    });
}

TEST_CASE("out-of-bounds sink") {
    const auto e = enc::encode_oob_sink(32, 4096);
    CHECK(e.bridge_inputs == std::vector<std::string>{"size_arg"});
    CHECK(bv::eval_formula(e.formula, {{"size_arg", 4097}}));
    CHECK_FALSE(bv::eval_formula(e.formula, {{"size_arg", 4096}}));
    CHECK(solve(enc::encode_oob_sink(32, 0xFFFFFFFF).formula).unsat());
}

TEST_CASE("candidates encode to the same formulas as the direct encoders") {
    const auto alloc = extract_fixture("alloc_size");
    CHECK(bv::to_string(enc::encode_candidate(alloc.at(0)).at(0).formula) ==
          bv::to_string(enc::encode_alloc_overflow(v("n", 32), 16).formula));
    CHECK(bv::to_string(enc::encode_candidate(alloc.at(1)).at(0).formula) ==
          bv::to_string(enc::encode_alloc_overflow(v("n", 32), 16, 0x0FFFFFFF).formula));

    const auto cfe = extract_fixture("cfe_resourceid");
    CHECK(bv::to_string(enc::encode_candidate(first_of(cfe, ex::PatternKind::TruncCast)).at(0).formula) ==
          bv::to_string(enc::encode_trunc_cast(v("id", 64), 32).formula));

    const auto sack = extract_fixture("openbsd_sack");
    CHECK(bv::to_string(enc::encode_candidate(first_of(sack, ex::PatternKind::SeqComparePair)).at(0).formula) ==
          bv::to_string(
              enc::encode_seq_compare_pair(v("sack_start", 32), v("rcv_nxt", 32), v("snd_una", 32)).formula));

    const auto mosq = extract_fixture("mosquitto_proxy_v2");
    const auto tlv = enc::encode_candidate(first_of(mosq, ex::PatternKind::SubUnderflow)).at(0);
    CHECK(bv::to_string(tlv.formula) == bv::to_string(enc::encode_tlv_underflow(v("len", 16), v("tlv_len", 16), 3).formula));

    const auto fpy = extract_fixture("fprime_fpy");
    const auto bypass = enc::encode_candidate(first_of(fpy, ex::PatternKind::GuardBypassMul));
    const auto [p1, p2] = enc::encode_guard_bypass(v("directive_get_size", 32), v("stack_size", 32), 1024);
    REQUIRE(bypass.size() == 2);
    CHECK(bv::to_string(bypass[0].formula) == bv::to_string(p1.formula));
    CHECK(bv::to_string(bypass[1].formula) == bv::to_string(p2.formula));
}

TEST_CASE("every corpus encoding carries a consistent CWE and output") {
    const std::map<ex::PatternKind, std::set<std::string>> allowed{
        {ex::PatternKind::MulOverflow, {"CWE-190"}},      {ex::PatternKind::AddOverflow, {"CWE-190"}},
        {ex::PatternKind::SubUnderflow, {"CWE-191"}},     {ex::PatternKind::ShiftSignedUB, {"CWE-190"}},
        {ex::PatternKind::TruncCast, {"CWE-195"}},        {ex::PatternKind::SignCastBoundary, {"CWE-195"}},
        {ex::PatternKind::SeqComparePair, {"CWE-190"}},   {ex::PatternKind::GuardBypassMul, {"CWE-190", "CWE-125"}},
        {ex::PatternKind::IndexBound, {"CWE-125"}},
    };
    for (const char* name : {"alloc_size", "cfe_resourceid", "fprime_fpy", "mosquitto_proxy_v2", "openbsd_sack",
                             "openbsd_tcp_input", "wolfssl_mldsa"}) {
        for (const auto& c : extract_fixture(name)) {
            for (const auto& e : enc::encode_candidate(c)) {
                CHECK(allowed.at(c.kind).count(e.cwe) == 1);
                CHECK(e.severity == c.severity);
                if (e.output_var) {
                    CHECK(e.defs.count(*e.output_var) == 1);
                }
                for (const auto& b : e.bridge_inputs) {
                    CHECK(e.formula.free_vars().count(b) == 1);
                }
            }
        }
    }
}
