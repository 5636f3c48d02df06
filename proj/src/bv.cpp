// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include <sstream>
#include <unordered_map>

#include "bvscan/bv.hpp"

namespace bvscan::bv {

Width::Width(unsigned bits) : bits_(bits) {
    if (bits == 0 || bits > max_width) {
        throw BvError("unsupported bit width " + std::to_string(bits));
    }
}

const char* op_name(Op op) {
    switch (op) {
    case Op::Const: return "const";
    case Op::Var: return "var";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Shl: return "shl";
    case Op::LShr: return "lshr";
    case Op::AShr: return "ashr";
    case Op::Or: return "or";
    case Op::And: return "and";
    case Op::Not: return "not";
    case Op::ZeroExt: return "zero_ext";
    case Op::SignExt: return "sign_ext";
    case Op::Extract: return "extract";
    }
    return "?";
}

const char* rel_name(Rel rel) {
    switch (rel) {
    case Rel::Eq: return "eq";
    case Rel::Ne: return "ne";
    case Rel::Ult: return "ult";
    case Rel::Ule: return "ule";
    case Rel::Ugt: return "ugt";
    case Rel::Uge: return "uge";
    }
    return "?";
}

namespace {

Term make(Term::Node node) {
    bool all_const = !node.kids.empty();
    for (const auto& k : node.kids) {
        all_const = all_const && k.is_const();
    }
    Term t{std::make_shared<const Term::Node>(std::move(node))};
    if (all_const) {
        return constant(eval_term(t, {}), t.width());
    }
    return t;
}

Term binary(Op op, const Term& a, const Term& b) {
    if (a.width() != b.width()) {
        throw BvError(std::string("width mismatch in ") + op_name(op) + ": " + std::to_string(a.width()) + " vs " +
                      std::to_string(b.width()));
    }
    return make({.op = op, .width = a.width(), .kids = {a, b}});
}

uint64_t shift_amount(uint64_t raw, unsigned width) { return raw >= width ? width : raw; }

} // namespace

Term constant(uint64_t value, unsigned width) {
    const Width w{width};
    if (!fits(value, w.bits())) {
        throw BvError("constant " + std::to_string(value) + " does not fit " + std::to_string(width) + " bits");
    }
    return Term{std::make_shared<const Term::Node>(Term::Node{.op = Op::Const, .width = width, .value = value})};
}

Term var(std::string name, unsigned width) {
    const Width w{width};
    if (name.empty()) {
        throw BvError("variable name must not be empty");
    }
    return Term{std::make_shared<const Term::Node>(
        Term::Node{.op = Op::Var, .width = w.bits(), .name = std::move(name)})};
}

Term add(const Term& a, const Term& b) { return binary(Op::Add, a, b); }
Term sub(const Term& a, const Term& b) { return binary(Op::Sub, a, b); }
Term mul(const Term& a, const Term& b) { return binary(Op::Mul, a, b); }
Term shl(const Term& a, const Term& b) { return binary(Op::Shl, a, b); }
Term lshr(const Term& a, const Term& b) { return binary(Op::LShr, a, b); }
Term ashr(const Term& a, const Term& b) { return binary(Op::AShr, a, b); }
Term bv_or(const Term& a, const Term& b) { return binary(Op::Or, a, b); }
Term bv_and(const Term& a, const Term& b) { return binary(Op::And, a, b); }
Term bv_not(const Term& a) { return make({.op = Op::Not, .width = a.width(), .kids = {a}}); }
Term neg(const Term& a) { return add(bv_not(a), constant(1, a.width())); }

Term zero_ext(unsigned extra, const Term& a) {
    if (extra == 0) {
        return a;
    }
    const Width w{a.width() + extra};
    return make({.op = Op::ZeroExt, .width = w.bits(), .extra = extra, .kids = {a}});
}

Term sign_ext(unsigned extra, const Term& a) {
    if (extra == 0) {
        return a;
    }
    const Width w{a.width() + extra};
    return make({.op = Op::SignExt, .width = w.bits(), .extra = extra, .kids = {a}});
}

Term extract(unsigned hi, unsigned lo, const Term& a) {
    if (hi >= a.width() || lo > hi) {
        throw BvError("bad extract [" + std::to_string(hi) + ":" + std::to_string(lo) + "] of width " +
                      std::to_string(a.width()));
    }
    if (lo == 0 && hi + 1 == a.width()) {
        return a;
    }
    if (a.op() == Op::Extract) {
        return extract(hi + a.lo(), lo + a.lo(), a.kid(0));
    }
    // Low bits of an extension are the low bits of its operand.
    if ((a.op() == Op::ZeroExt || a.op() == Op::SignExt) && hi < a.kid(0).width()) {
        return extract(hi, lo, a.kid(0));
    }
    return make({.op = Op::Extract, .width = hi - lo + 1, .hi = hi, .lo = lo, .kids = {a}});
}

Term resize(const Term& a, unsigned width, bool is_signed) {
    if (width == a.width()) {
        return a;
    }
    if (width < a.width()) {
        return extract(width - 1, 0, a);
    }
    return is_signed ? sign_ext(width - a.width(), a) : zero_ext(width - a.width(), a);
}

uint64_t eval_term(const Term& t, const Assignment& a) {
    const unsigned w = t.width();
    const uint64_t m = mask(w);
    switch (t.op()) {
    case Op::Const: return t.value();
    case Op::Var: {
        const auto it = a.find(t.name());
        if (it == a.end()) {
            throw MissingVar(t.name());
        }
        if (!fits(it->second, w)) {
            throw BvError("value of '" + t.name() + "' does not fit " + std::to_string(w) + " bits");
        }
        return it->second;
    }
    case Op::Not: return ~eval_term(t.kid(0), a) & m;
    case Op::ZeroExt: return eval_term(t.kid(0), a);
    case Op::SignExt: {
        const unsigned inner = t.kid(0).width();
        const uint64_t v = eval_term(t.kid(0), a);
        return (v & msb(inner)) ? (v | (m & ~mask(inner))) : v;
    }
    case Op::Extract: return (eval_term(t.kid(0), a) >> t.lo()) & mask(t.width());
    default: break;
    }
    const uint64_t x = eval_term(t.kid(0), a);
    const uint64_t y = eval_term(t.kid(1), a);
    switch (t.op()) {
    case Op::Add: return (x + y) & m;
    case Op::Sub: return (x - y) & m;
    case Op::Mul: return (x * y) & m;
    case Op::Or: return x | y;
    case Op::And: return x & y;
    case Op::Shl: {
        const uint64_t s = shift_amount(y, w);
        return s >= w ? 0 : (x << s) & m;
    }
    case Op::LShr: {
        const uint64_t s = shift_amount(y, w);
        return s >= w ? 0 : x >> s;
    }
    case Op::AShr: {
        const bool negative = (x & msb(w)) != 0;
        const uint64_t s = shift_amount(y, w);
        if (s >= w) {
            return negative ? m : 0;
        }
        uint64_t r = x >> s;
        if (negative && s > 0) {
            r |= m & ~(m >> s);
        }
        return r;
    }
    default: break;
    }
    throw BvError("unhandled term kind");
}

namespace {

bool eval_rel(Rel rel, uint64_t x, uint64_t y) {
    switch (rel) {
    case Rel::Eq: return x == y;
    case Rel::Ne: return x != y;
    case Rel::Ult: return x < y;
    case Rel::Ule: return x <= y;
    case Rel::Ugt: return x > y;
    case Rel::Uge: return x >= y;
    }
    return false;
}

void collect_vars(const Term& t, std::map<std::string, unsigned>& out) {
    if (t.is_var()) {
        const auto [it, inserted] = out.emplace(t.name(), t.width());
        if (!inserted && it->second != t.width()) {
            throw BvError("variable '" + t.name() + "' used at widths " + std::to_string(it->second) + " and " +
                          std::to_string(t.width()));
        }
        return;
    }
    for (const auto& k : t.kids()) {
        collect_vars(k, out);
    }
}

void merge_vars(const std::map<std::string, unsigned>& from, std::map<std::string, unsigned>& into) {
    for (const auto& [name, width] : from) {
        const auto [it, inserted] = into.emplace(name, width);
        if (!inserted && it->second != width) {
            throw BvError("variable '" + name + "' used at widths " + std::to_string(it->second) + " and " +
                          std::to_string(width));
        }
    }
}

} // namespace

bool eval_formula(const Formula& f, const Assignment& a) {
    switch (f.kind()) {
    case Formula::Kind::Atom: return eval_rel(f.rel(), eval_term(f.lhs(), a), eval_term(f.rhs(), a));
    case Formula::Kind::And:
        for (const auto& k : f.kids()) {
            if (!eval_formula(k, a)) {
                return false;
            }
        }
        return true;
    case Formula::Kind::Or:
        for (const auto& k : f.kids()) {
            if (eval_formula(k, a)) {
                return true;
            }
        }
        return false;
    case Formula::Kind::Not: return !eval_formula(f.kids().at(0), a);
    }
    return false;
}

std::map<std::string, unsigned> term_vars(const Term& t) {
    std::map<std::string, unsigned> out;
    collect_vars(t, out);
    return out;
}

Formula::Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {
    std::map<std::string, unsigned> vars;
    if (node_->kind == Kind::Atom) {
        collect_vars(*node_->lhs, vars);
        collect_vars(*node_->rhs, vars);
    } else {
        for (const auto& k : node_->kids) {
            merge_vars(k.free_vars(), vars);
        }
    }
    free_vars_ = std::make_shared<const std::map<std::string, unsigned>>(std::move(vars));
}

Formula atom(Rel rel, const Term& lhs, const Term& rhs) {
    if (lhs.width() != rhs.width()) {
        throw BvError(std::string("width mismatch in ") + rel_name(rel) + ": " + std::to_string(lhs.width()) +
                      " vs " + std::to_string(rhs.width()));
    }
    return Formula{std::make_shared<const Formula::Node>(
        Formula::Node{.kind = Formula::Kind::Atom, .rel = rel, .lhs = lhs, .rhs = rhs})};
}

Formula conj(std::vector<Formula> kids) {
    return Formula{std::make_shared<const Formula::Node>(Formula::Node{.kind = Formula::Kind::And, .kids = std::move(kids)})};
}

Formula disj(std::vector<Formula> kids) {
    return Formula{std::make_shared<const Formula::Node>(Formula::Node{.kind = Formula::Kind::Or, .kids = std::move(kids)})};
}

Formula negate(const Formula& f) {
    return Formula{std::make_shared<const Formula::Node>(Formula::Node{.kind = Formula::Kind::Not, .kids = {f}})};
}

Formula truth() { return conj({}); }

namespace {

struct Replacer {
    const std::map<std::string, Term>& by;
    std::unordered_map<const Term::Node*, Term> memo;

    Term term(const Term& t) {
        if (t.is_const()) {
            return t;
        }
        if (const auto it = memo.find(t.id()); it != memo.end()) {
            return it->second;
        }
        Term out = t;
        if (t.is_var()) {
            if (const auto it = by.find(t.name()); it != by.end()) {
                if (it->second.width() != t.width()) {
                    throw BvError("replacement for '" + t.name() + "' has width " +
                                  std::to_string(it->second.width()) + ", expected " + std::to_string(t.width()));
                }
                out = it->second;
            }
        } else {
            std::vector<Term> kids;
            bool changed = false;
            for (const auto& k : t.kids()) {
                kids.push_back(term(k));
                changed = changed || kids.back().id() != k.id();
            }
            if (changed) {
                switch (t.op()) {
                case Op::Not: out = bv_not(kids[0]); break;
                case Op::ZeroExt: out = zero_ext(t.extra(), kids[0]); break;
                case Op::SignExt: out = sign_ext(t.extra(), kids[0]); break;
                case Op::Extract: out = extract(t.hi(), t.lo(), kids[0]); break;
                default: out = binary(t.op(), kids[0], kids[1]); break;
                }
            }
        }
        memo.emplace(t.id(), out);
        return out;
    }

    Formula formula(const Formula& f) {
        switch (f.kind()) {
        case Formula::Kind::Atom: return atom(f.rel(), term(f.lhs()), term(f.rhs()));
        case Formula::Kind::Not: return negate(formula(f.kids()[0]));
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            std::vector<Formula> kids;
            for (const auto& k : f.kids()) {
                kids.push_back(formula(k));
            }
            return f.kind() == Formula::Kind::And ? conj(std::move(kids)) : disj(std::move(kids));
        }
        }
        return f;
    }
};

std::map<std::string, Term> constants_for(const std::map<std::string, unsigned>& vars, const Assignment& bindings) {
    std::map<std::string, Term> by;
    for (const auto& [name, value] : bindings) {
        const auto it = vars.find(name);
        if (it == vars.end()) {
            throw BvError("binding for unknown variable '" + name + "'");
        }
        if (!fits(value, it->second)) {
            throw BvError("binding " + name + "=" + std::to_string(value) + " does not fit " +
                          std::to_string(it->second) + " bits");
        }
        by.emplace(name, constant(value, it->second));
    }
    return by;
}

} // namespace

Formula substitute(const Formula& f, const Assignment& bindings) {
    if (bindings.empty()) {
        return f;
    }
    const auto by = constants_for(f.free_vars(), bindings);
    return Replacer{by, {}}.formula(f);
}

Term substitute(const Term& t, const Assignment& bindings) {
    if (bindings.empty()) {
        return t;
    }
    const auto by = constants_for(term_vars(t), bindings);
    return Replacer{by, {}}.term(t);
}

Formula replace(const Formula& f, const std::map<std::string, Term>& by) { return Replacer{by, {}}.formula(f); }

Term replace(const Term& t, const std::map<std::string, Term>& by) { return Replacer{by, {}}.term(t); }

std::string hex(uint64_t value, unsigned width) {
    const unsigned digits = (width + 3) / 4;
    std::ostringstream os;
    os << "0x" << std::hex;
    os.width(digits);
    os.fill('0');
    os << value;
    return os.str();
}

namespace {

void print(std::ostream& os, const Term& t) {
    switch (t.op()) {
    case Op::Const: os << hex(t.value(), t.width()) << '#' << t.width(); return;
    case Op::Var: os << t.name() << '#' << t.width(); return;
    case Op::Extract: os << "(extract " << t.hi() << ' ' << t.lo() << ' '; break;
    case Op::ZeroExt:
    case Op::SignExt: os << '(' << op_name(t.op()) << ' ' << t.extra() << ' '; break;
    default: os << '(' << op_name(t.op()) << ' '; break;
    }
    for (size_t i = 0; i < t.kids().size(); ++i) {
        if (i > 0) {
            os << ' ';
        }
        print(os, t.kid(i));
    }
    os << ')';
}

void print(std::ostream& os, const Formula& f) {
    switch (f.kind()) {
    case Formula::Kind::Atom:
        os << '(' << rel_name(f.rel()) << ' ';
        print(os, f.lhs());
        os << ' ';
        print(os, f.rhs());
        os << ')';
        return;
    case Formula::Kind::Not: os << "(not"; break;
    case Formula::Kind::And: os << "(and"; break;
    case Formula::Kind::Or: os << "(or"; break;
    }
    for (const auto& k : f.kids()) {
        os << ' ';
        print(os, k);
    }
    os << ')';
}

} // namespace

std::string to_string(const Term& t) {
    std::ostringstream os;
    print(os, t);
    return os.str();
}

std::string to_string(const Formula& f) {
    std::ostringstream os;
    print(os, f);
    return os.str();
}

} // namespace bvscan::bv
