// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include <algorithm>
#include <climits>
#include <map>
#include <tuple>
#include <unordered_map>

#include "bvscan/solver.hpp"

namespace bvscan::solver {

namespace {

using bv::Formula;
using bv::Op;
using bv::Rel;
using bv::Term;

// Literals are DIMACS ints; the two constants never reach the CNF.
constexpr int lit_true = INT_MAX;
constexpr int lit_false = -INT_MAX;

using Bits = std::vector<int>; // LSB first

class Blaster {
  public:
    explicit Blaster(Cnf& cnf) : cnf_(cnf) {}

    void declare(const std::string& name, unsigned width) {
        Bits bits;
        for (unsigned i = 0; i < width; ++i) {
            const int v = fresh();
            cnf_.var_map.emplace(std::make_pair(name, i), v);
            bits.push_back(v);
        }
        vars_.emplace(name, std::move(bits));
    }

    int formula(const Formula& f) {
        switch (f.kind()) {
        case Formula::Kind::Atom: return atom(f.rel(), term(f.lhs()), term(f.rhs()));
        case Formula::Kind::Not: return -formula(f.kids()[0]);
        case Formula::Kind::And: {
            int acc = lit_true;
            for (const auto& k : f.kids()) {
                acc = and2(acc, formula(k));
            }
            return acc;
        }
        case Formula::Kind::Or: {
            int acc = lit_false;
            for (const auto& k : f.kids()) {
                acc = or2(acc, formula(k));
            }
            return acc;
        }
        }
        return lit_false;
    }

    void assert_root(int root) {
        if (root == lit_true) {
            return;
        }
        if (root == lit_false) {
            cnf_.clauses.emplace_back();
            return;
        }
        cnf_.clauses.push_back({root});
    }

  private:
    int fresh() { return ++cnf_.num_vars; }

    void clause(std::initializer_list<int> lits) { cnf_.clauses.emplace_back(lits); }

    int and2(int a, int b) {
        if (a == lit_false || b == lit_false || a == -b) {
            return lit_false;
        }
        if (a == lit_true) {
            return b;
        }
        if (b == lit_true || a == b) {
            return a;
        }
        if (a > b) {
            std::swap(a, b);
        }
        const auto key = std::make_tuple('&', a, b, 0);
        if (const auto it = gates_.find(key); it != gates_.end()) {
            return it->second;
        }
        const int g = fresh();
        clause({-g, a});
        clause({-g, b});
        clause({g, -a, -b});
        gates_.emplace(key, g);
        return g;
    }

    int or2(int a, int b) { return -and2(-a, -b); }

    int xor2(int a, int b) {
        if (a == lit_false) {
            return b;
        }
        if (b == lit_false) {
            return a;
        }
        if (a == lit_true) {
            return -b;
        }
        if (b == lit_true) {
            return -a;
        }
        if (a == b) {
            return lit_false;
        }
        if (a == -b) {
            return lit_true;
        }
        bool flip = false;
        if (a < 0) {
            a = -a;
            flip = !flip;
        }
        if (b < 0) {
            b = -b;
            flip = !flip;
        }
        if (a > b) {
            std::swap(a, b);
        }
        const auto key = std::make_tuple('^', a, b, 0);
        int g = 0;
        if (const auto it = gates_.find(key); it != gates_.end()) {
            g = it->second;
        } else {
            g = fresh();
            clause({-g, a, b});
            clause({-g, -a, -b});
            clause({g, -a, b});
            clause({g, a, -b});
            gates_.emplace(key, g);
        }
        return flip ? -g : g;
    }

    int ite(int c, int t, int e) {
        if (c == lit_true || t == e) {
            return t;
        }
        if (c == lit_false) {
            return e;
        }
        if (t == -e) {
            return -xor2(c, t);
        }
        if (t == lit_true) {
            return or2(c, e);
        }
        if (t == lit_false) {
            return and2(-c, e);
        }
        if (e == lit_true) {
            return or2(-c, t);
        }
        if (e == lit_false) {
            return and2(c, t);
        }
        if (c < 0) {
            c = -c;
            std::swap(t, e);
        }
        const auto key = std::make_tuple('?', c, t, e);
        if (const auto it = gates_.find(key); it != gates_.end()) {
            return it->second;
        }
        const int g = fresh();
        clause({-c, -t, g});
        clause({-c, t, -g});
        clause({c, -e, g});
        clause({c, e, -g});
        clause({-t, -e, g});
        clause({t, e, -g});
        gates_.emplace(key, g);
        return g;
    }

    Bits adder(const Bits& a, const Bits& b, int carry) {
        Bits out(a.size());
        for (size_t i = 0; i < a.size(); ++i) {
            const int half = xor2(a[i], b[i]);
            out[i] = xor2(half, carry);
            if (i + 1 < a.size()) {
                carry = or2(and2(a[i], b[i]), and2(carry, half));
            }
        }
        return out;
    }

    static Bits invert(const Bits& a) {
        Bits out(a.size());
        for (size_t i = 0; i < a.size(); ++i) {
            out[i] = -a[i];
        }
        return out;
    }

    static bool all_const(const Bits& a) {
        return std::all_of(a.begin(), a.end(), [](int l) { return l == lit_true || l == lit_false; });
    }

    Bits multiplier(Bits a, Bits b) {
        // Put a constant operand on the selector side so zero bits skip their row.
        if (all_const(a) && !all_const(b)) {
            std::swap(a, b);
        }
        const size_t w = a.size();
        Bits acc(w, lit_false);
        for (size_t i = 0; i < w; ++i) {
            if (b[i] == lit_false) {
                continue;
            }
            Bits row(w, lit_false);
            for (size_t j = i; j < w; ++j) {
                row[j] = and2(a[j - i], b[i]);
            }
            acc = adder(acc, row, lit_false);
        }
        return acc;
    }

    enum class ShiftKind { Left, LogicalRight, ArithRight };

    Bits shifter(const Bits& a, const Bits& amount, ShiftKind kind) {
        const size_t w = a.size();
        const int fill = kind == ShiftKind::ArithRight ? a[w - 1] : lit_false;
        Bits cur = a;
        int overflow = lit_false;
        for (size_t k = 0; k < amount.size(); ++k) {
            if (k >= 63 || (uint64_t{1} << k) >= w) {
                overflow = or2(overflow, amount[k]);
                continue;
            }
            const size_t step = size_t{1} << k;
            Bits next(w);
            for (size_t j = 0; j < w; ++j) {
                int moved = fill;
                if (kind == ShiftKind::Left) {
                    moved = j >= step ? cur[j - step] : lit_false;
                } else if (j + step < w) {
                    moved = cur[j + step];
                }
                next[j] = ite(amount[k], moved, cur[j]);
            }
            cur = std::move(next);
        }
        for (size_t j = 0; j < w; ++j) {
            cur[j] = ite(overflow, fill, cur[j]);
        }
        return cur;
    }

    int less_than(const Bits& a, const Bits& b) {
        int lt = lit_false;
        for (size_t i = 0; i < a.size(); ++i) {
            lt = ite(xor2(a[i], b[i]), b[i], lt);
        }
        return lt;
    }

    int equal(const Bits& a, const Bits& b) {
        int acc = lit_true;
        for (size_t i = 0; i < a.size(); ++i) {
            acc = and2(acc, -xor2(a[i], b[i]));
        }
        return acc;
    }

    int atom(Rel rel, const Bits& a, const Bits& b) {
        switch (rel) {
        case Rel::Eq: return equal(a, b);
        case Rel::Ne: return -equal(a, b);
        case Rel::Ult: return less_than(a, b);
        case Rel::Ule: return -less_than(b, a);
        case Rel::Ugt: return less_than(b, a);
        case Rel::Uge: return -less_than(a, b);
        }
        return lit_false;
    }

    const Bits& term(const Term& t) {
        if (const auto it = memo_.find(t.id()); it != memo_.end()) {
            return it->second;
        }
        Bits out = build(t);
        return memo_.emplace(t.id(), std::move(out)).first->second;
    }

    Bits build(const Term& t) {
        const unsigned w = t.width();
        switch (t.op()) {
        case Op::Const: {
            Bits out(w);
            for (unsigned i = 0; i < w; ++i) {
                out[i] = ((t.value() >> i) & 1) != 0 ? lit_true : lit_false;
            }
            return out;
        }
        case Op::Var: return vars_.at(t.name());
        case Op::Add: return adder(term(t.kid(0)), term(t.kid(1)), lit_false);
        case Op::Sub: return adder(term(t.kid(0)), invert(term(t.kid(1))), lit_true);
        case Op::Mul: return multiplier(term(t.kid(0)), term(t.kid(1)));
        case Op::Shl: return shifter(term(t.kid(0)), term(t.kid(1)), ShiftKind::Left);
        case Op::LShr: return shifter(term(t.kid(0)), term(t.kid(1)), ShiftKind::LogicalRight);
        case Op::AShr: return shifter(term(t.kid(0)), term(t.kid(1)), ShiftKind::ArithRight);
        case Op::Not: return invert(term(t.kid(0)));
        case Op::Or:
        case Op::And: {
            const Bits& a = term(t.kid(0));
            const Bits& b = term(t.kid(1));
            Bits out(w);
            for (unsigned i = 0; i < w; ++i) {
                out[i] = t.op() == Op::Or ? or2(a[i], b[i]) : and2(a[i], b[i]);
            }
            return out;
        }
        case Op::ZeroExt: {
            Bits out = term(t.kid(0));
            out.resize(w, lit_false);
            return out;
        }
        case Op::SignExt: {
            Bits out = term(t.kid(0));
            const int top = out.back();
            out.resize(w, top);
            return out;
        }
        case Op::Extract: {
            const Bits& a = term(t.kid(0));
            return Bits(a.begin() + t.lo(), a.begin() + t.hi() + 1);
        }
        }
        throw bv::BvError("unsupported term in bit-blaster");
    }

    Cnf& cnf_;
    std::map<std::string, Bits> vars_;
    std::unordered_map<const Term::Node*, Bits> memo_;
    std::map<std::tuple<char, int, int, int>, int> gates_;
};

} // namespace

Cnf bitblast(const bv::Formula& f) {
    Cnf cnf;
    Blaster b(cnf);
    for (const auto& [name, width] : f.free_vars()) {
        b.declare(name, width);
    }
    b.assert_root(b.formula(f));
    return cnf;
}

} // namespace bvscan::solver
