// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include <sstream>

#include "bvscan/solver.hpp"

namespace bvscan::solver {

const char* outcome_name(Outcome o) {
    switch (o) {
    case Outcome::Sat: return "sat";
    case Outcome::Unsat: return "unsat";
    case Outcome::Unknown: return "unknown";
    }
    return "unknown";
}

Verdict check(const bv::Formula& f, const SolveBudget& budget, uint64_t seed) {
    if (budget.max_conflicts == 0 || !(budget.max_wall_time > 0)) {
        throw std::invalid_argument("solve budget must be positive");
    }
    const auto start = sat::Clock::now();
    const auto deadline =
        start + std::chrono::duration_cast<sat::Clock::duration>(std::chrono::duration<double>(budget.max_wall_time));

    Verdict v;
    const Cnf cnf = bitblast(f);
    v.cnf_vars = cnf.num_vars;
    v.cnf_clauses = cnf.clauses.size();
    if (sat::Clock::now() >= deadline) {
        v.outcome = Outcome::Unknown;
        v.reason = "wall time limit exceeded during bit-blasting";
        return v;
    }

    const sat::SatResult r = sat::sat_solve(cnf, budget, seed, deadline);
    v.stats = r.stats;
    switch (r.status) {
    case sat::SatStatus::Unsat: v.outcome = Outcome::Unsat; return v;
    case sat::SatStatus::Unknown:
        v.outcome = Outcome::Unknown;
        v.reason = r.reason;
        return v;
    case sat::SatStatus::Sat: break;
    }

    v.outcome = Outcome::Sat;
    for (const auto& [name, width] : f.free_vars()) {
        v.witness[name] = 0;
    }
    for (const auto& [key, cnf_var] : cnf.var_map) {
        if (r.model.at(static_cast<size_t>(cnf_var))) {
            v.witness[key.first] |= uint64_t{1} << key.second;
        }
    }
    if (!bv::eval_formula(f, v.witness)) {
        std::ostringstream msg;
        msg << "decoded witness does not satisfy " << bv::to_string(f);
        throw WitnessValidationFailure(msg.str());
    }
    return v;
}

namespace {

std::string quote(const std::string& name) {
    for (const char c : name) {
        const bool plain = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
        if (!plain) {
            return "|" + name + "|";
        }
    }
    if (name.empty() || (name[0] >= '0' && name[0] <= '9')) {
        return "|" + name + "|";
    }
    return name;
}

std::string literal(uint64_t value, unsigned width) {
    std::string out;
    if (width % 4 == 0) {
        static constexpr char digits[] = "0123456789abcdef";
        for (int i = static_cast<int>(width / 4) - 1; i >= 0; --i) {
            out += digits[(value >> (4 * i)) & 0xF];
        }
        return "#x" + out;
    }
    for (int i = static_cast<int>(width) - 1; i >= 0; --i) {
        out += ((value >> i) & 1) != 0 ? '1' : '0';
    }
    return "#b" + out;
}

void emit(std::ostream& os, const bv::Term& t) {
    using bv::Op;
    switch (t.op()) {
    case Op::Const: os << literal(t.value(), t.width()); return;
    case Op::Var: os << quote(t.name()); return;
    case Op::ZeroExt:
    case Op::SignExt:
        os << "((_ " << (t.op() == Op::ZeroExt ? "zero_extend " : "sign_extend ") << t.extra() << ") ";
        emit(os, t.kid(0));
        os << ')';
        return;
    case Op::Extract:
        os << "((_ extract " << t.hi() << ' ' << t.lo() << ") ";
        emit(os, t.kid(0));
        os << ')';
        return;
    default: break;
    }
    const char* name = "";
    switch (t.op()) {
    case Op::Add: name = "bvadd"; break;
    case Op::Sub: name = "bvsub"; break;
    case Op::Mul: name = "bvmul"; break;
    case Op::Shl: name = "bvshl"; break;
    case Op::LShr: name = "bvlshr"; break;
    case Op::AShr: name = "bvashr"; break;
    case Op::Or: name = "bvor"; break;
    case Op::And: name = "bvand"; break;
    case Op::Not: name = "bvnot"; break;
    default: break;
    }
    os << '(' << name;
    for (const auto& k : t.kids()) {
        os << ' ';
        emit(os, k);
    }
    os << ')';
}

void emit(std::ostream& os, const bv::Formula& f) {
    using Kind = bv::Formula::Kind;
    switch (f.kind()) {
    case Kind::Atom: {
        const char* rel = "=";
        bool negated = false;
        switch (f.rel()) {
        case bv::Rel::Eq: break;
        case bv::Rel::Ne: negated = true; break;
        case bv::Rel::Ult: rel = "bvult"; break;
        case bv::Rel::Ule: rel = "bvule"; break;
        case bv::Rel::Ugt: rel = "bvugt"; break;
        case bv::Rel::Uge: rel = "bvuge"; break;
        }
        if (negated) {
            os << "(not ";
        }
        os << '(' << rel << ' ';
        emit(os, f.lhs());
        os << ' ';
        emit(os, f.rhs());
        os << ')';
        if (negated) {
            os << ')';
        }
        return;
    }
    case Kind::Not:
        os << "(not ";
        emit(os, f.kids()[0]);
        os << ')';
        return;
    case Kind::And:
    case Kind::Or:
        if (f.kids().empty()) {
            os << (f.kind() == Kind::And ? "true" : "false");
            return;
        }
        if (f.kids().size() == 1) {
            emit(os, f.kids()[0]);
            return;
        }
        os << (f.kind() == Kind::And ? "(and" : "(or");
        for (const auto& k : f.kids()) {
            os << ' ';
            emit(os, k);
        }
        os << ')';
        return;
    }
}

} // namespace

std::string emit_smtlib(const bv::Formula& f) {
    std::ostringstream os;
    os << "(set-logic QF_BV)\n";
    for (const auto& [name, width] : f.free_vars()) {
        os << "(declare-fun " << quote(name) << " () (_ BitVec " << width << "))\n";
    }
    os << "(assert ";
    emit(os, f);
    os << ")\n(check-sat)\n(get-model)\n";
    return os.str();
}

} // namespace bvscan::solver
