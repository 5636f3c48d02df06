// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT

// Writes random 16/32/64-bit formulas as SMT-LIB files, each named after the
// built-in solver's verdict, for comparison with an external solver.
// usage: random_smt2 DIR COUNT SEED

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "bvscan/solver.hpp"

namespace {

using namespace bvscan::bv;

class WideGen {
  public:
    explicit WideGen(uint64_t seed) : rng_(seed) {}

    Formula next() {
        width_ = std::array<unsigned, 3>{16, 32, 64}[pick(3)];
        std::vector<Formula> parts;
        for (unsigned i = 0, n = 1 + pick(3); i < n; ++i) {
            parts.push_back(atom(static_cast<Rel>(pick(6)), term(3), term(2)));
        }
        return pick(3) == 0 ? disj(parts) : conj(parts);
    }

  private:
    unsigned pick(unsigned n) { return static_cast<unsigned>(rng_() % n); }

    Term leaf() {
        if (pick(3) == 0) {
            const uint64_t edge[] = {0, 1, msb(width_), mask(width_), msb(width_) - 1, rng_() & mask(width_)};
            return constant(edge[pick(6)], width_);
        }
        static const char* names[] = {"x", "y", "z"};
        return var(names[pick(3)], width_);
    }

    Term term(unsigned depth) {
        if (depth == 0 || pick(4) == 0) {
            return leaf();
        }
        switch (pick(10)) {
        case 0: return add(term(depth - 1), term(depth - 1));
        case 1: return sub(term(depth - 1), term(depth - 1));
        case 2: return mul(term(depth - 1), term(depth - 1));
        case 3: return shl(term(depth - 1), term(depth - 1));
        case 4: return lshr(term(depth - 1), term(depth - 1));
        case 5: return ashr(term(depth - 1), term(depth - 1));
        case 6: return bv_or(term(depth - 1), term(depth - 1));
        case 7: return bv_and(term(depth - 1), bv_not(term(depth - 1)));
        case 8: {
            const unsigned k = 1 + pick(width_ - 1);
            return sign_ext(width_ - k, extract(k - 1, 0, term(depth - 1)));
        }
        default: return mul(term(depth - 1), constant(rng_() & mask(width_), width_));
        }
    }

    std::mt19937_64 rng_;
    unsigned width_ = 32;
};

} // namespace

int main(int argc, char** argv) {
    if (argc != 4) {
        std::cerr << "usage: random_smt2 DIR COUNT SEED\n";
        return 2;
    }
    const std::filesystem::path dir = argv[1];
    std::filesystem::create_directories(dir);
    WideGen gen(std::stoull(argv[3]));
    const int count = std::stoi(argv[2]);
    for (int i = 0; i < count; ++i) {
        const Formula f = gen.next();
        const auto v = bvscan::solver::check(f, {.max_conflicts = 200000, .max_wall_time = 10});
        const std::string name = std::to_string(i) + "." + bvscan::solver::outcome_name(v.outcome) + ".smt2";
        std::ofstream(dir / name) << bvscan::solver::emit_smtlib(f);
    }
    return 0;
}
