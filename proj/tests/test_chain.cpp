// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include <random>

#include "bvscan/chain.hpp"
#include "doctest.h"

using namespace bvscan;

namespace {

bv::Term v(const char* name, unsigned w) { return bv::var(name, w); }

chain::ChainSpec sack_to_sink() {
    return chain::make_chain(enc::encode_seq_lt(v("sack_start", 32), v("rcv_nxt", 32)), enc::encode_oob_sink(32, 4096),
                             "size_arg");
}

chain::ChainSpec tlv_to_sink() {
    return chain::make_chain(enc::encode_tlv_underflow(v("input_len", 32), v("tlv_len", 32), 3),
                             enc::encode_oob_sink(32, 4096), "size_arg");
}

} // namespace

TEST_CASE("sequence wrap feeding a read size: reference witness and solver agree") {
    const auto spec = sack_to_sink();
    const bv::Formula joint = chain::compose(spec);
    const bv::Assignment w{{"sack_start", 0x91de51f1}, {"rcv_nxt", 0xc3582921}};
    CHECK(bv::eval_formula(joint, w));
    CHECK(bv::eval_term(spec.stage1.output_term(), w) == 0xce8628d0);

    const auto cv = chain::run_chain(spec);
    REQUIRE(cv.verdict.sat());
    CHECK(cv.stage1.sat());
    CHECK(cv.stage2.sat());
    REQUIRE(cv.bridge_value);
    CHECK(*cv.bridge_value >= 0x80000000);
    CHECK(spec.label == "CWE-190->CWE-125");
}

TEST_CASE("TLV underflow feeding a read size: zero input length gives 0xfffffff8") {
    const auto spec = tlv_to_sink();
    const bv::Assignment w{{"input_len", 0}, {"tlv_len", 5}};
    CHECK(bv::eval_formula(chain::compose(spec), w));
    CHECK(bv::eval_term(spec.stage1.output_term(), w) == 0xfffffff8);
    const auto cv = chain::run_chain(spec);
    REQUIRE(cv.verdict.sat());
    CHECK(spec.label == "CWE-191->CWE-125");
}

TEST_CASE("a chain is no weaker than either stage") {
    // stage two alone is impossible, so the chain must be too
    const auto spec =
        chain::make_chain(enc::encode_seq_lt(v("a", 32), v("b", 32)), enc::encode_oob_sink(32, 0xffffffff), "size_arg");
    const auto cv = chain::run_chain(spec);
    CHECK(cv.stage2.unsat());
    CHECK(cv.verdict.unsat());
    CHECK_FALSE(cv.bridge_value);
}

TEST_CASE("8-bit chains match exhaustive search over every sink bound") {
    // stage one: a - b underflows, output a - b; stage two: bound < size
    std::mt19937_64 rng(7);
    for (uint64_t bound = 0; bound < 256; bound += 1 + rng() % 5) {
        const auto spec = chain::make_chain(enc::encode_sub_underflow(v("a", 8), v("b", 8)),
                                            enc::encode_oob_sink(8, bound), "size_arg");
        bool expected = false;
        for (unsigned a = 0; a < 256 && !expected; ++a) {
            for (unsigned b = 0; b < 256 && !expected; ++b) {
                expected = a < b && ((a - b) & 0xFF) > bound;
            }
        }
        const auto cv = chain::run_chain(spec);
        REQUIRE_FALSE(cv.verdict.unknown());
        CHECK_MESSAGE(cv.verdict.sat() == expected, "bound " << bound);
        if (cv.verdict.sat()) {
            CHECK(cv.stage1.sat());
            CHECK(cv.stage2.sat());
            CHECK(*cv.bridge_value > bound);
        }
    }
}

TEST_CASE("witness projects onto both stages") {
    const auto spec = tlv_to_sink();
    const auto cv = chain::run_chain(spec);
    REQUIRE(cv.verdict.sat());
    bv::Assignment first;
    for (const auto& [name, width] : spec.stage1.formula.free_vars()) {
        first[name] = cv.verdict.witness.count(name) ? cv.verdict.witness.at(name) : 0;
    }
    CHECK(bv::eval_formula(spec.stage1.formula, first));
    CHECK(bv::eval_formula(spec.stage2.formula, {{"size_arg", *cv.bridge_value}}));
}

TEST_CASE("make_chain rejects malformed bridges") {
    const auto sink = enc::encode_oob_sink(32, 4096);
    // a sink has no output value
    CHECK_THROWS_AS(chain::make_chain(sink, sink, "size_arg"), chain::ChainError);
    const auto seq = enc::encode_seq_lt(v("x", 32), v("y", 32));
    CHECK_THROWS_AS(chain::make_chain(seq, sink, "nope"), chain::ChainError);
    CHECK_THROWS_AS(chain::make_chain(seq, enc::encode_oob_sink(16, 10), "size_arg"), chain::ChainError);
}

TEST_CASE("compose rejects shared names with different widths") {
    const auto first = enc::encode_seq_lt(v("x", 32), v("y", 32));
    auto second = enc::encode_oob_sink(32, 4096);
    second.formula = bv::conj({second.formula, bv::ugt(v("x", 16), bv::constant(1, 16))});
    const auto spec = chain::make_chain(first, second, "size_arg");
    CHECK_THROWS_AS((void)chain::compose(spec), chain::ChainError);
    CHECK(chain::enumerate_chains({first, second}).empty());
}

TEST_CASE("enumerate_chains pairs by output and bridge width, in index order") {
    const std::vector<enc::Encoding> pool{
        enc::encode_seq_lt(v("a", 32), v("b", 32)),                     // output 32
        enc::encode_oob_sink(16, 100),                                  // input 16
        enc::encode_oob_sink(32, 4096),                                 // input 32
        enc::encode_tlv_underflow(v("len", 16), v("tlv_len", 16), 3), // output 16, input tlv_len 16
    };
    const auto chains = chain::enumerate_chains(pool);
    std::vector<std::pair<size_t, size_t>> got;
    for (const auto& c : chains) {
        got.emplace_back(c.stage1_index, c.stage2_index);
    }
    const std::vector<std::pair<size_t, size_t>> want{{0, 2}, {3, 1}};
    CHECK(got == want);
}
