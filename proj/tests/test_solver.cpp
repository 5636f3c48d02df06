// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include <optional>
#include <random>
#include <set>

#include "bvscan/solver.hpp"
#include "doctest.h"
#include "formula_oracle.hpp"

using namespace bvscan;
using namespace bvscan::bv;
using solver::check;
using solver::Outcome;
using testing::ColumnEval;
using testing::exists_solution;
using testing::FormulaGen;

namespace {

Formula sack_formula() {
    const Term s = var("sack_start", 32);
    const Term r = var("rcv_nxt", 32);
    const Term u = var("snd_una", 32);
    const Term half = constant(0x80000000, 32);
    return conj({uge(sub(s, r), half), uge(sub(u, s), half)});
}

Formula alloc_formula(std::optional<uint64_t> bound) {
    const Term n = var("n", 32);
    std::vector<Formula> parts{ugt(n, constant(0, 32)), ult(mul(n, constant(16, 32)), n)};
    if (bound) {
        parts.push_back(ule(n, constant(*bound, 32)));
    }
    return conj(parts);
}

} // namespace

TEST_CASE("column oracle agrees with eval_formula on samples") {
    FormulaGen gen(2024);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
        const Formula f = gen.next();
        if (f.free_vars().size() > 2) {
            continue;
        }
        ColumnEval oracle(f.free_vars());
        const auto col = oracle.formula(f);
        for (int s = 0; s < 20; ++s) {
            const size_t p = rng() % oracle.points();
            REQUIRE(static_cast<bool>(col[p]) == eval_formula(f, oracle.assignment(p)));
        }
    }
}

TEST_CASE("8-bit solver agrees with exhaustive enumeration on 10000 random formulas") {
    FormulaGen gen(77);
    int sat = 0;
    int unsat = 0;
    int three_vars = 0;
    for (int i = 0; i < 10000; ++i) {
        const Formula f = gen.next();
        three_vars += f.free_vars().size() == 3 ? 1 : 0;
        const bool expected = exists_solution(f);
        const auto v = check(f, {}, static_cast<uint64_t>(i % 4));
        REQUIRE_MESSAGE(!v.unknown(), to_string(f));
        REQUIRE_MESSAGE(v.sat() == expected, to_string(f));
        if (v.sat()) {
            ++sat;
            REQUIRE(v.witness.size() == f.free_vars().size());
            REQUIRE(eval_formula(f, v.witness));
        } else {
            ++unsat;
        }
    }
    CHECK(sat > 1000);
    CHECK(unsat > 1000);
    CHECK(three_vars > 50);
}

TEST_CASE("constant pinning yields unit literals") {
    const Formula f = eq(var("x", 8), constant(0xAB, 8));
    const auto cnf = solver::bitblast(f);
    CHECK(cnf.var_map.size() == 8);
    const auto v = check(f, {});
    REQUIRE(v.sat());
    CHECK(v.witness.at("x") == 0xAB);
}

TEST_CASE("every free variable bit is mapped") {
    const auto cnf = solver::bitblast(sack_formula());
    CHECK(cnf.num_vars >= 96);
    CHECK(cnf.var_map.size() == 96);
    for (const auto& [key, v] : cnf.var_map) {
        CHECK(v <= cnf.num_vars);
    }
}

TEST_CASE("only a trivially false formula produces an empty clause") {
    const auto has_empty = [](const solver::Cnf& cnf) {
        return std::any_of(cnf.clauses.begin(), cnf.clauses.end(), [](const auto& c) { return c.empty(); });
    };
    CHECK_FALSE(has_empty(solver::bitblast(sack_formula())));
    CHECK(has_empty(solver::bitblast(ult(var("x", 8), constant(0, 8)))));
    CHECK(check(ult(var("x", 8), constant(0, 8)), {}).unsat());
}

TEST_CASE("8-bit allocation solution set matches brute force") {
    const Term n = var("n", 8);
    const Formula f = conj({ugt(n, constant(0, 8)), ult(mul(n, constant(16, 8)), n)});
    std::set<uint64_t> expected;
    for (uint64_t v = 0; v < 256; ++v) {
        if (eval_formula(f, {{"n", v}})) {
            expected.insert(v);
        }
    }
    // Enumerate solver models by blocking each one found.
    std::set<uint64_t> found;
    Formula g = f;
    while (true) {
        const auto v = check(g, {});
        if (!v.sat()) {
            break;
        }
        found.insert(v.witness.at("n"));
        g = conj({g, ne(n, constant(v.witness.at("n"), 8))});
    }
    CHECK(found == expected);
    CHECK(!expected.empty());
}

TEST_CASE("sequence comparison pair is satisfiable and the reference witness validates") {
    const Formula f = sack_formula();
    const auto v = check(f, {});
    REQUIRE(v.sat());
    CHECK(eval_formula(f, v.witness));
    CHECK(eval_formula(f, {{"sack_start", 0x80000000}, {"rcv_nxt", 0}, {"snd_una", 0}}));
}

TEST_CASE("bounded allocation is unsat, unbounded is sat") {
    const auto open = check(alloc_formula(std::nullopt), {});
    REQUIRE(open.sat());
    const uint64_t n = open.witness.at("n");
    CHECK(((n * 16) & 0xffffffff) < n);
    CHECK(check(alloc_formula(0x0FFFFFFF), {}).unsat());
    CHECK(check(alloc_formula(0x10000000), {}).sat());
}

TEST_CASE("variable by variable multiplication at 32 bits") {
    const Term a = var("a", 32);
    const Term b = var("b", 32);
    const Formula f = conj({eq(mul(a, b), constant(0x0000ff01, 32)), ugt(a, constant(1, 32)), ugt(b, constant(1, 32)),
                            ult(a, constant(0x10000, 32)), ult(b, constant(0x10000, 32))});
    const auto v = check(f, {});
    REQUIRE(v.sat());
    CHECK(v.witness.at("a") * v.witness.at("b") == 0xff01);
}

TEST_CASE("empty conjunction is sat with a total witness") {
    const auto v = check(truth(), {});
    CHECK(v.sat());
    CHECK(v.witness.empty());
    const auto w = check(disj({truth(), eq(var("q", 16), constant(3, 16))}), {});
    REQUIRE(w.sat());
    CHECK(w.witness.count("q") == 1);
}

TEST_CASE("tiny wall budget yields unknown") {
    SUBCASE("check") {
        sat::SolveBudget b;
        b.max_wall_time = 0.000001;
        const auto v = check(sack_formula(), b);
        CHECK(v.unknown());
        CHECK_FALSE(v.reason.empty());
    }
    SUBCASE("invalid") {
        sat::SolveBudget b;
        b.max_wall_time = -1;
        CHECK_THROWS_AS(check(sack_formula(), b), std::invalid_argument);
    }
}

TEST_CASE("identical inputs give identical verdicts and witnesses") {
    FormulaGen gen(5);
    for (int i = 0; i < 200; ++i) {
        const Formula f = gen.next();
        for (const uint64_t seed : {0ull, 9ull}) {
            const auto a = check(f, {}, seed);
            const auto b = check(f, {}, seed);
            CHECK(a.outcome == b.outcome);
            CHECK(a.witness == b.witness);
        }
    }
}

TEST_CASE("smt-lib text") {
    const std::string eq0 = solver::emit_smtlib(eq(var("x", 32), constant(0, 32)));
    CHECK(eq0 == "(set-logic QF_BV)\n(declare-fun x () (_ BitVec 32))\n(assert (= x #x00000000))\n(check-sat)\n(get-model)\n");
    const std::string odd = solver::emit_smtlib(ult(zero_ext(3, extract(4, 0, var("a.b", 8))), constant(5, 8)));
    CHECK(odd.find("|a.b|") != std::string::npos);
    CHECK(odd.find("((_ zero_extend 3) ((_ extract 4 0) |a.b|))") != std::string::npos);
    CHECK(solver::emit_smtlib(ult(extract(4, 0, var("v", 8)), constant(5, 5))).find("#b00101") != std::string::npos);
    CHECK(solver::emit_smtlib(sack_formula()) == solver::emit_smtlib(sack_formula()));
}
