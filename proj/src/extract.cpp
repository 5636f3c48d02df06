// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include "bvscan/extract.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace bvscan::ex {

namespace {

constexpr const char* kind_names[] = {"MulOverflow",      "AddOverflow",    "SubUnderflow",
                                      "ShiftSignedUB",    "TruncCast",      "SignCastBoundary",
                                      "SeqComparePair",   "GuardBypassMul", "IndexBound"};

} // namespace

const char* kind_name(PatternKind k) { return kind_names[static_cast<size_t>(k)]; }

std::optional<PatternKind> kind_from_name(std::string_view name) {
    for (size_t i = 0; i < std::size(kind_names); ++i) {
        if (name == kind_names[i]) {
            return static_cast<PatternKind>(i);
        }
    }
    return std::nullopt;
}

const Operand& Candidate::operand(std::string_view role) const {
    for (const auto& o : operands) {
        if (o.role == role) {
            return o;
        }
    }
    throw std::out_of_range(std::string(kind_name(kind)) + " candidate has no operand '" + std::string(role) + "'");
}

bv::Term truncate_term(const bv::Term& t, unsigned width) {
    if (t.width() <= width) {
        return t;
    }
    switch (t.op()) {
    case bv::Op::Add: return bv::add(truncate_term(t.kid(0), width), truncate_term(t.kid(1), width));
    case bv::Op::Sub: return bv::sub(truncate_term(t.kid(0), width), truncate_term(t.kid(1), width));
    case bv::Op::Mul: return bv::mul(truncate_term(t.kid(0), width), truncate_term(t.kid(1), width));
    case bv::Op::And: return bv::bv_and(truncate_term(t.kid(0), width), truncate_term(t.kid(1), width));
    case bv::Op::Or: return bv::bv_or(truncate_term(t.kid(0), width), truncate_term(t.kid(1), width));
    case bv::Op::Not: return bv::bv_not(truncate_term(t.kid(0), width));
    default: return bv::extract(width - 1, 0, t);
    }
}

namespace {

using fe::BinOp;
using fe::Expr;
using fe::ExprKind;
using fe::ExprPtr;

class Untranslatable : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

const Expr& strip(const Expr& e) { return e.kind == ExprKind::Cast && e.implicit ? strip(e.kid(0)) : e; }
const Expr& strip_casts(const Expr& e) { return e.kind == ExprKind::Cast ? strip_casts(e.kid(0)) : e; }

bool is_literal(const Expr& e) { return strip_casts(e).kind == ExprKind::IntLiteral; }

std::string sanitize(const std::string& s) {
    std::string out;
    for (const char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_') {
            out += c;
        } else if (!out.empty() && out.back() != '_') {
            out += '_';
        }
    }
    while (!out.empty() && out.back() == '_') {
        out.pop_back();
    }
    return out;
}

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "_" + b; }

std::string receiver_name(std::string receiver) {
    for (const char* self : {"this->", "this."}) {
        if (receiver.rfind(self, 0) == 0) {
            receiver = receiver.substr(std::string(self).size());
        }
    }
    return receiver == "this" ? "" : sanitize(receiver);
}

// Variable name for a storage location: member chains joined with '_', with
// `this` dropped; a method call is named after its receiver and callee.
std::string path_name(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Var: return e.name == "this" ? "" : e.name;
    case ExprKind::Member: return join(path_name(e.kid(0)), e.name);
    case ExprKind::Index: return path_name(e.kid(0));
    case ExprKind::Cast: return path_name(e.kid(0));
    case ExprKind::Call: return join(receiver_name(e.receiver), e.name);
    default: return sanitize(fe::print_expr(e));
    }
}

struct Local {
    ExprPtr init;
    int writes = 0;
    bool is_param = false;
    std::vector<uint64_t> dims;
    fe::TypeSpec spec;
};

class Translator {
  public:
    explicit Translator(const std::map<std::string, Local>& locals) : locals_(locals) {}

    bv::Term term(const Expr& e) {
        if (++depth_ > 200) {
            throw Untranslatable("expression too deep");
        }
        bv::Term t = inner(e);
        --depth_;
        return t;
    }

  private:
    bv::Term inner(const Expr& e) {
        const unsigned w = e.type->width;
        switch (e.kind) {
        case ExprKind::IntLiteral: return bv::constant(e.value & bv::mask(w), w);
        case ExprKind::Var: {
            const auto it = locals_.find(e.name);
            if (it != locals_.end() && !it->second.is_param && it->second.writes == 0 && it->second.init &&
                it->second.dims.empty()) {
                return term(*it->second.init);
            }
            return bv::var(e.name, w);
        }
        case ExprKind::Member: return bv::var(path_name(e), w);
        case ExprKind::Call:
            if (e.name == "CFE_RESOURCEID_UNWRAP" && e.kids.size() == 1) {
                return term(e.kid(0));
            }
            return bv::var(path_name(e), w);
        case ExprKind::Index: {
            const std::string base = path_name(e.kid(0));
            auto& seen = index_texts_[base];
            const std::string text = fe::print_expr(e.kid(1));
            auto pos = std::find(seen.begin(), seen.end(), text);
            if (pos == seen.end()) {
                seen.push_back(text);
                pos = seen.end() - 1;
            }
            const auto n = static_cast<size_t>(pos - seen.begin());
            return bv::var(n == 0 ? base : base + "_" + std::to_string(n), w);
        }
        case ExprKind::Cast: return bv::resize(term(e.kid(0)), w, e.kid(0).type->is_signed);
        case ExprKind::Unary:
            if (e.uop == fe::UnOp::Neg) {
                return bv::neg(term(e.kid(0)));
            }
            if (e.uop == fe::UnOp::BitNot) {
                return bv::bv_not(term(e.kid(0)));
            }
            throw Untranslatable("logical not has no bitvector term");
        case ExprKind::Binary: {
            if (fe::is_comparison(e.bop) || e.bop == BinOp::LogAnd) {
                throw Untranslatable("boolean operator has no bitvector term");
            }
            const bv::Term a = term(e.kid(0));
            const bv::Term b = term(e.kid(1));
            switch (e.bop) {
            case BinOp::Add: return bv::add(a, b);
            case BinOp::Sub: return bv::sub(a, b);
            case BinOp::Mul: return bv::mul(a, b);
            case BinOp::Shl: return bv::shl(a, b);
            case BinOp::Shr: return e.kid(0).type->is_signed ? bv::ashr(a, b) : bv::lshr(a, b);
            case BinOp::Or: return bv::bv_or(a, b);
            case BinOp::And: return bv::bv_and(a, b);
            default: break;
            }
            break;
        }
        }
        throw Untranslatable("unsupported expression");
    }

    const std::map<std::string, Local>& locals_;
    std::map<std::string, std::vector<std::string>> index_texts_;
    int depth_ = 0;
};

struct Ctx {
    bool call_arg = false;
    bool if_cond = false;
    bool sub_operand = false;
    bool early_return = false;
    const Expr* guard_cmp = nullptr; // comparison directly above, inside an if condition
    unsigned narrow = 0;             // result is truncated to this width
    bool suppress_sub = false;       // same-width signed cast directly above
};

// Sequence comparison helpers: relation of (a - b) against zero, and whether
// the helper computes the difference with its parameters swapped.
struct SeqHelper {
    BinOp rel;
    bool swapped;
};

std::map<std::string, SeqHelper> seq_helpers(const fe::TranslationUnit& unit) {
    std::map<std::string, SeqHelper> out{
        {"SEQ_LT", {BinOp::Lt, false}},
        {"SEQ_LEQ", {BinOp::Le, false}},
        {"SEQ_GT", {BinOp::Gt, false}},
        {"SEQ_GEQ", {BinOp::Ge, false}},
    };
    for (const auto& f : unit.functions) {
        if (f.params.size() != 2 || f.body.size() != 1 || f.body[0]->kind != fe::StmtKind::Return || !f.body[0]->expr) {
            continue;
        }
        const Expr& cmp = strip(*f.body[0]->expr);
        if (cmp.kind != ExprKind::Binary || !fe::is_comparison(cmp.bop) || cmp.bop == BinOp::Eq || cmp.bop == BinOp::Ne) {
            continue;
        }
        const Expr& cast = strip(cmp.kid(0));
        const Expr& zero = strip_casts(cmp.kid(1));
        if (zero.kind != ExprKind::IntLiteral || zero.value != 0 || cast.kind != ExprKind::Cast ||
            !cast.type->is_signed) {
            continue;
        }
        const Expr& diff = strip(cast.kid(0));
        if (diff.kind != ExprKind::Binary || diff.bop != BinOp::Sub || diff.type->is_signed ||
            diff.type->width != cast.type->width) {
            continue;
        }
        const Expr& a = strip(diff.kid(0));
        const Expr& b = strip(diff.kid(1));
        if (a.kind != ExprKind::Var || b.kind != ExprKind::Var) {
            continue;
        }
        if (a.name == f.params[0].name && b.name == f.params[1].name) {
            out[f.name] = {cmp.bop, false};
        } else if (a.name == f.params[1].name && b.name == f.params[0].name) {
            out[f.name] = {cmp.bop, true};
        }
    }
    return out;
}

bool returns_immediately(const std::vector<fe::StmtPtr>& body) {
    if (body.size() != 1) {
        return false;
    }
    if (body[0]->kind == fe::StmtKind::Return) {
        return true;
    }
    return body[0]->kind == fe::StmtKind::Block && returns_immediately(body[0]->body);
}

class FunctionScan {
  public:
    FunctionScan(const fe::TranslationUnit& unit, const fe::Function& fn, const std::map<std::string, SeqHelper>& seq,
                 std::vector<std::shared_ptr<Candidate>>& out)
        : unit_(unit), fn_(fn), seq_(seq), out_(out) {
        for (const auto& p : fn.params) {
            locals_[p.name] = Local{.is_param = true, .dims = p.dims, .spec = p.type};
        }
        collect_locals(fn.body);
        for (const auto& a : unit.annotations) {
            if (a.span.line >= fn.span.line && a.span.line <= fn.end_line) {
                ranges_[a.name] = a.hi;
            }
        }
        for (const auto& a : unit.annotations) {
            const bool inside_any = std::any_of(unit.functions.begin(), unit.functions.end(), [&](const fe::Function& f) {
                return a.span.line >= f.span.line && a.span.line <= f.end_line;
            });
            if (!inside_any) {
                ranges_.emplace(a.name, a.hi);
            }
        }
    }

    void run() { stmts(fn_.body); }

  private:
    // ------------------------------------------------------------ locals

    void count_write(const Expr& target) {
        const Expr& t = strip_casts(target);
        if (t.kind == ExprKind::Var) {
            ++locals_[t.name].writes;
        }
    }

    void collect_locals(const std::vector<fe::StmtPtr>& body) {
        for (const auto& s : body) {
            if (s->kind == fe::StmtKind::Decl) {
                if (locals_.count(s->name) != 0) {
                    locals_[s->name].writes += 1000; // shadowed: never inline
                } else {
                    locals_[s->name] = Local{.init = s->expr, .dims = s->dims, .spec = s->decl_type};
                }
            } else if (s->kind == fe::StmtKind::Assign) {
                count_write(*s->target);
            }
            collect_locals(s->body);
            collect_locals(s->else_body);
        }
    }

    // -------------------------------------------------------- statements

    void stmts(const std::vector<fe::StmtPtr>& body) {
        for (const auto& s : body) {
            stmt(*s);
        }
    }

    void stmt(const fe::Stmt& s) {
        switch (s.kind) {
        case fe::StmtKind::Decl:
        case fe::StmtKind::ExprStmt:
        case fe::StmtKind::Return:
            if (s.expr) {
                scan(s.expr, {});
            }
            break;
        case fe::StmtKind::Assign:
            scan(s.target, {});
            scan(s.expr, {});
            break;
        case fe::StmtKind::If: {
            const bool early = returns_immediately(s.body);
            scan(s.expr, Ctx{.if_cond = true, .early_return = early});
            stmts(s.body);
            stmts(s.else_body);
            if (early && !s.has_else) {
                guards_.push_back(s.expr.get());
            }
            break;
        }
        case fe::StmtKind::Block: stmts(s.body); break;
        case fe::StmtKind::Skipped: break;
        }
    }

    // ------------------------------------------------------- candidates

    std::shared_ptr<Candidate> make(PatternKind kind, const Expr& site, unsigned width) {
        auto c = std::make_shared<Candidate>();
        c->kind = kind;
        c->site = site.span;
        c->function = fn_.name;
        c->width = width;
        return c;
    }

    static Operand operand(const std::string& role, const ExprPtr& e, const bv::Term& t) {
        return Operand{role, fe::print_expr(*e), *e->type, e, t};
    }

    void emit(const std::shared_ptr<Candidate>& c, const Expr* site) {
        for (const auto& o : out_) {
            if (o->kind == c->kind && o->site.offset == c->site.offset && o->site.length == c->site.length) {
                return;
            }
        }
        out_.push_back(c);
        if (site != nullptr) {
            by_site_[site] = c;
        }
    }

    // Smallest constant C such that an earlier early-return guard rejects
    // every value of `n` above C.
    std::optional<uint64_t> input_bound(const bv::Term& n) {
        std::optional<uint64_t> best;
        const std::string want = bv::to_string(n);
        for (const Expr* g : guards_) {
            const Expr& cmp = strip(*g);
            if (cmp.kind != ExprKind::Binary || cmp.kid(0).type->is_signed) {
                continue;
            }
            const bool var_left = cmp.bop == BinOp::Gt || cmp.bop == BinOp::Ge;
            const bool var_right = cmp.bop == BinOp::Lt || cmp.bop == BinOp::Le;
            if (!var_left && !var_right) {
                continue;
            }
            const Expr& v = var_left ? cmp.kid(0) : cmp.kid(1);
            const Expr& c = var_left ? cmp.kid(1) : cmp.kid(0);
            try {
                Translator tr(locals_);
                const bv::Term vt = tr.term(v);
                const bv::Term ct = tr.term(c);
                if (!ct.is_const() || bv::to_string(bv::resize(vt, n.width(), false)) != want || vt.width() != n.width()) {
                    continue;
                }
                const bool strict = cmp.bop == BinOp::Gt || cmp.bop == BinOp::Lt;
                if (!strict && ct.value() == 0) {
                    continue;
                }
                const uint64_t bound = strict ? ct.value() : ct.value() - 1;
                best = best ? std::min(*best, bound) : bound;
            } catch (const Untranslatable&) {
            }
        }
        return best;
    }

    bool guarded_sub(const Expr& minuend, const Expr& subtrahend) const {
        const std::string m = fe::print_expr(minuend);
        const std::string s = fe::print_expr(subtrahend);
        for (const Expr* g : guards_) {
            const Expr& cmp = strip(*g);
            if (cmp.kind != ExprKind::Binary) {
                continue;
            }
            const std::string l = fe::print_expr(cmp.kid(0));
            const std::string r = fe::print_expr(cmp.kid(1));
            if ((cmp.bop == BinOp::Lt && l == m && r == s) || (cmp.bop == BinOp::Gt && l == s && r == m)) {
                return true;
            }
        }
        return false;
    }

    // Capacity of the array field next to a struct member, e.g. the bytes[]
    // buffer for stack->size.
    std::optional<uint64_t> sibling_capacity(const Expr& e) const {
        const Expr& m = strip_casts(e);
        if (m.kind != ExprKind::Member) {
            return std::nullopt;
        }
        const fe::StructDef* s = struct_of(m.kid(0), m.arrow);
        if (s == nullptr) {
            return std::nullopt;
        }
        for (const auto& f : s->fields) {
            if (!f.dims.empty() && f.dims[0] != 0) {
                return f.dims[0];
            }
        }
        return std::nullopt;
    }

    const fe::StructDef* struct_of(const Expr& base, bool arrow) const {
        const Expr& b = strip_casts(base);
        if (b.kind != ExprKind::Var) {
            return nullptr;
        }
        const auto it = locals_.find(b.name);
        if (it == locals_.end()) {
            return nullptr;
        }
        const fe::TypeSpec& spec = it->second.spec;
        if (spec.spelling.rfind("struct ", 0) != 0 || spec.pointer_depth != (arrow ? 1u : 0u)) {
            return nullptr;
        }
        return unit_.find_struct(spec.spelling.substr(7));
    }

    std::optional<uint64_t> array_capacity(const Expr& base) const {
        const Expr& b = strip_casts(base);
        if (b.kind == ExprKind::Var) {
            const auto it = locals_.find(b.name);
            if (it != locals_.end() && !it->second.dims.empty() && it->second.dims[0] != 0) {
                return it->second.dims[0];
            }
        } else if (b.kind == ExprKind::Member) {
            if (const fe::StructDef* s = struct_of(b.kid(0), b.arrow)) {
                for (const auto& f : s->fields) {
                    if (f.name == b.name && !f.dims.empty() && f.dims[0] != 0) {
                        return f.dims[0];
                    }
                }
            }
        }
        return std::nullopt;
    }

    std::optional<uint64_t> range_max(const Expr& value) const {
        const Expr& core = strip_casts(value);
        std::string name;
        if (core.kind == ExprKind::Index) {
            name = path_name(core.kid(0));
        } else if (core.kind == ExprKind::Var || core.kind == ExprKind::Member) {
            name = path_name(core);
        }
        if (const auto it = ranges_.find(name); !name.empty() && it != ranges_.end()) {
            return it->second;
        }
        return std::nullopt;
    }

    // ------------------------------------------------------ expressions

    void scan(const ExprPtr& ep, const Ctx& ctx) {
        const Expr& e = *ep;
        try {
            classify(ep, ctx);
        } catch (const Untranslatable&) {
            // Sites whose operands have no bitvector form are left out.
        }
        Ctx none;
        switch (e.kind) {
        case ExprKind::Cast: {
            Ctx inner = ctx;
            inner.suppress_sub = false;
            const unsigned to = e.type->width;
            const unsigned from = e.kid(0).type->width;
            if (to < from) {
                inner.narrow = is_literal(e.kid(0)) ? 0 : to;
            } else if (ctx.narrow >= from) {
                inner.narrow = 0;
            }
            if (to == from && e.type->is_signed && !e.kid(0).type->is_signed) {
                const Expr& core = strip(e.kid(0));
                inner.suppress_sub = core.kind == ExprKind::Binary && core.bop == BinOp::Sub;
            }
            scan(e.kids[0], inner);
            if (to < from && !is_literal(e.kid(0)) && by_site_.count(&strip(e.kid(0))) == 0) {
                try {
                    Translator tr(locals_);
                    const bv::Term value = tr.term(e.kid(0));
                    if (!value.is_const()) {
                        auto c = make(PatternKind::TruncCast, e, from);
                        c->operands.push_back(operand("value", e.kids[0], value));
                        c->params["target_width"] = to;
                        c->notes = std::string(e.implicit ? "implicit" : "explicit") + " conversion from " +
                                   e.kid(0).type->name + " to " + e.type->name;
                        emit(c, &e);
                    }
                } catch (const Untranslatable&) {
                }
            }
            return;
        }
        case ExprKind::Binary:
            switch (e.bop) {
            case BinOp::Sub:
                scan(e.kids[0], Ctx{.sub_operand = true});
                scan(e.kids[1], Ctx{.sub_operand = true});
                return;
            case BinOp::LogAnd:
                scan(e.kids[0], Ctx{.if_cond = ctx.if_cond, .early_return = ctx.early_return});
                scan(e.kids[1], Ctx{.if_cond = ctx.if_cond, .early_return = ctx.early_return});
                return;
            default:
                if (fe::is_comparison(e.bop)) {
                    const Ctx cmp{.if_cond = ctx.if_cond, .early_return = ctx.early_return, .guard_cmp = &e};
                    scan(e.kids[0], cmp);
                    scan(e.kids[1], cmp);
                    return;
                }
                scan(e.kids[0], none);
                scan(e.kids[1], none);
                return;
            }
        case ExprKind::Call:
            for (const auto& k : e.kids) {
                scan(k, Ctx{.call_arg = true});
            }
            return;
        default:
            for (const auto& k : e.kids) {
                scan(k, none);
            }
            return;
        }
    }

    void classify(const ExprPtr& ep, const Ctx& ctx) {
        const Expr& e = *ep;
        if (e.kind == ExprKind::Index) {
            index_bound(ep);
            return;
        }
        if (e.kind == ExprKind::Cast && !is_literal(e.kid(0))) {
            const Expr& core = strip(e.kid(0));
            if (e.type->width == e.kid(0).type->width && e.type->is_signed && !e.kid(0).type->is_signed &&
                core.kind == ExprKind::Binary && core.bop == BinOp::Sub) {
                sign_cast(e, core);
            }
            return;
        }
        if (e.kind != ExprKind::Binary) {
            return;
        }
        const bool is_unsigned = !e.type->is_signed;
        switch (e.bop) {
        case BinOp::Mul:
        case BinOp::Add:
            if (is_unsigned && (ctx.call_arg || ctx.if_cond || ctx.sub_operand)) {
                wrap_op(ep, ctx);
            }
            break;
        case BinOp::Sub:
            if (is_unsigned && !ctx.suppress_sub) {
                sub_underflow(ep, ctx);
            }
            break;
        case BinOp::Shl: shift(e); break;
        case BinOp::LogAnd: seq_pair(e); break;
        default: break;
        }
    }

    void wrap_op(const ExprPtr& ep, const Ctx& ctx) {
        const Expr& e = *ep;
        Translator tr(locals_);
        bv::Term a = tr.term(e.kid(0));
        bv::Term b = tr.term(e.kid(1));
        if (ctx.narrow != 0) {
            a = truncate_term(a, ctx.narrow);
            b = truncate_term(b, ctx.narrow);
        }
        if (a.is_const() && b.is_const()) {
            return;
        }
        if (e.bop == BinOp::Add) {
            auto c = make(PatternKind::AddOverflow, e, a.width());
            c->operands = {operand("lhs", e.kids[0], a), operand("rhs", e.kids[1], b)};
            emit(c, &e);
            return;
        }
        const bool const_rhs = b.is_const();
        const bool one_const = a.is_const() || b.is_const();
        const ExprPtr& n_expr = const_rhs ? e.kids[0] : e.kids[1];
        const bv::Term n = const_rhs ? a : b;
        const uint64_t k = const_rhs ? b.value() : a.value();
        if (one_const && k == 0) {
            return;
        }
        if (one_const && ctx.if_cond && ctx.early_return && ctx.guard_cmp != nullptr && ctx.narrow == 0 &&
            !ctx.guard_cmp->kid(0).type->is_signed && ctx.guard_cmp->bop != BinOp::Eq && ctx.guard_cmp->bop != BinOp::Ne) {
            const Expr& cmp = *ctx.guard_cmp;
            const bool mul_on_rhs = &strip(cmp.kid(1)) == &e;
            if (mul_on_rhs || &strip(cmp.kid(0)) == &e) {
                const ExprPtr& other = mul_on_rhs ? cmp.kids[0] : cmp.kids[1];
                auto c = make(PatternKind::GuardBypassMul, e, n.width());
                c->operands = {operand("size", n_expr, n), operand("other", other, tr.term(*other)),
                               operand("guard_lhs", cmp.kids[0], tr.term(cmp.kid(0))),
                               operand("guard_rhs", cmp.kids[1], tr.term(cmp.kid(1)))};
                c->params["multiplier"] = k;
                c->params["guard_rel"] = static_cast<uint64_t>(cmp.bop);
                c->params["mul_on_rhs"] = mul_on_rhs ? 1 : 0;
                if (const auto cap = sibling_capacity(*other)) {
                    c->params["cap"] = *cap;
                }
                c->notes = "guard " + fe::print_expr(cmp) + " returns early";
                emit(c, &e);
                return;
            }
        }
        auto c = make(PatternKind::MulOverflow, e, a.width());
        if (one_const) {
            c->operands = {operand("n", n_expr, n), operand("k", const_rhs ? e.kids[1] : e.kids[0], bv::constant(k, n.width()))};
            c->params["multiplier"] = k;
            if (const auto bound = input_bound(n)) {
                c->params["bound"] = *bound;
                c->notes = "input bound " + bv::hex(*bound, n.width()) + " from an earlier early return";
            }
        } else {
            c->operands = {operand("lhs", e.kids[0], a), operand("rhs", e.kids[1], b)};
        }
        if (ctx.call_arg) {
            c->notes += std::string(c->notes.empty() ? "" : "; ") + "call argument";
        }
        emit(c, &e);
    }

    void sub_underflow(const ExprPtr& ep, const Ctx& ctx) {
        const Expr& e = *ep;
        Translator tr(locals_);
        bv::Term a = tr.term(e.kid(0));
        bv::Term b = tr.term(e.kid(1));
        if (ctx.narrow != 0) {
            a = truncate_term(a, ctx.narrow);
            b = truncate_term(b, ctx.narrow);
        }
        if ((a.is_const() && b.is_const()) || (b.is_const() && b.value() == 0) || bv::to_string(a) == bv::to_string(b)) {
            return;
        }
        auto c = make(PatternKind::SubUnderflow, e, a.width());
        c->operands = {operand("minuend", e.kids[0], a), operand("subtrahend", e.kids[1], b)};
        if (ctx.narrow != 0) {
            c->notes = "result truncated to " + std::to_string(ctx.narrow) + " bits";
        }
        if (guarded_sub(e.kid(0), e.kid(1))) {
            c->severity = "guarded";
            c->notes += std::string(c->notes.empty() ? "" : "; ") + "earlier early return rejects subtrahend > minuend";
        }
        emit(c, &e);
    }

    void sign_cast(const Expr& cast, const Expr& sub) {
        Translator tr(locals_);
        const bv::Term a = tr.term(sub.kid(0));
        const bv::Term b = tr.term(sub.kid(1));
        if (a.is_const() && b.is_const()) {
            return;
        }
        auto c = make(PatternKind::SignCastBoundary, cast, a.width());
        c->operands = {operand("minuend", sub.kids[0], a), operand("subtrahend", sub.kids[1], b)};
        c->notes = std::string(cast.implicit ? "implicit" : "explicit") + " conversion of an unsigned difference to " +
                   cast.type->name;
        emit(c, &cast);
    }

    void shift(const Expr& e) {
        const Expr& lhs = e.kid(0);
        if (!lhs.type->is_signed) {
            return;
        }
        Translator tr(locals_);
        const bv::Term amount = tr.term(e.kid(1));
        const unsigned w = lhs.type->width;
        if (!amount.is_const() || amount.value() == 0 || amount.value() >= w) {
            return;
        }
        const bv::Term value = tr.term(lhs);
        if (value.is_const()) {
            return;
        }
        const uint64_t signed_max = bv::mask(w - 1);
        uint64_t max = signed_max;
        const Expr& core = strip(lhs);
        if (core.type->width < w) {
            max = core.type->is_signed ? bv::mask(core.type->width - 1) : bv::mask(core.type->width);
        }
        const auto annotated = range_max(lhs);
        if (annotated) {
            max = std::min(*annotated, signed_max);
        }
        const uint64_t k = amount.value();
        if (max <= (signed_max >> k)) {
            return;
        }
        auto c = make(PatternKind::ShiftSignedUB, e, w);
        c->operands = {operand("value", e.kids[0], value)};
        c->params["shamt"] = k;
        c->params["range_max"] = max;
        c->notes = annotated ? "operand range [0, " + std::to_string(max) + "] from annotation"
                             : "operand range from its type";
        emit(c, &e);
    }

    void seq_pair(const Expr& e) {
        const Expr& l = strip(e.kid(0));
        const Expr& r = strip(e.kid(1));
        if (l.kind != ExprKind::Call || r.kind != ExprKind::Call || !l.receiver.empty() || !r.receiver.empty()) {
            return;
        }
        const auto hl = seq_.find(l.name);
        const auto hr = seq_.find(r.name);
        if (hl == seq_.end() || hr == seq_.end() || l.kids.size() != 2 || r.kids.size() != 2) {
            return;
        }
        Translator tr(locals_);
        const bool sl = hl->second.swapped;
        const bool sr = hr->second.swapped;
        const ExprPtr& a1 = l.kids[sl ? 1 : 0];
        const ExprPtr& b1 = l.kids[sl ? 0 : 1];
        const ExprPtr& a2 = r.kids[sr ? 1 : 0];
        const ExprPtr& b2 = r.kids[sr ? 0 : 1];
        const bv::Term ta1 = tr.term(*a1);
        const bv::Term tb1 = tr.term(*b1);
        const bv::Term ta2 = tr.term(*a2);
        const bv::Term tb2 = tr.term(*b2);
        const unsigned w = ta1.width();
        if (tb1.width() != w || ta2.width() != w || tb2.width() != w) {
            return;
        }
        auto vars = bv::term_vars(ta1);
        for (const auto& [n, width] : bv::term_vars(tb1)) {
            vars.emplace(n, width);
        }
        bool shared = false;
        for (const auto& t : {ta2, tb2}) {
            for (const auto& [n, width] : bv::term_vars(t)) {
                shared = shared || vars.count(n) != 0;
            }
        }
        if (!shared) {
            return;
        }
        auto c = make(PatternKind::SeqComparePair, e, w);
        c->operands = {operand("a1", a1, ta1), operand("b1", b1, tb1), operand("a2", a2, ta2), operand("b2", b2, tb2)};
        c->params["rel1"] = static_cast<uint64_t>(hl->second.rel);
        c->params["rel2"] = static_cast<uint64_t>(hr->second.rel);
        c->notes = l.name + " and " + r.name + " share an operand";
        emit(c, &e);
    }

    void index_bound(const ExprPtr& ep) {
        const Expr& e = *ep;
        const Expr& idx = strip(e.kid(1));
        std::shared_ptr<const Candidate> feeder;
        if (const auto it = by_site_.find(&idx); it != by_site_.end()) {
            feeder = it->second;
        } else if (idx.kind == ExprKind::Var) {
            const auto local = locals_.find(idx.name);
            if (local != locals_.end() && !local->second.is_param && local->second.writes == 0 && local->second.init) {
                if (const auto site = by_site_.find(&strip(*local->second.init)); site != by_site_.end()) {
                    feeder = site->second;
                }
            }
        }
        if (!feeder) {
            return;
        }
        Translator tr(locals_);
        const bv::Term index = tr.term(e.kid(1));
        auto c = make(PatternKind::IndexBound, e, index.width());
        c->operands = {operand("index", e.kids[1], index)};
        if (const auto cap = array_capacity(e.kid(0))) {
            c->params["cap"] = *cap;
        }
        c->feeder = feeder;
        c->severity = feeder->severity;
        c->notes = "index computed by the " + std::string(kind_name(feeder->kind)) + " at line " +
                   std::to_string(feeder->site.line);
        emit(c, &e);
    }

    const fe::TranslationUnit& unit_;
    const fe::Function& fn_;
    const std::map<std::string, SeqHelper>& seq_;
    std::vector<std::shared_ptr<Candidate>>& out_;
    std::map<std::string, Local> locals_;
    std::map<std::string, uint64_t> ranges_;
    std::vector<const Expr*> guards_;
    std::map<const Expr*, std::shared_ptr<Candidate>> by_site_;
};

} // namespace

std::vector<Candidate> extract(const fe::TranslationUnit& unit, const fe::DataModel& model) {
    (void)model; // widths are already resolved into the unit
    const auto seq = seq_helpers(unit);
    std::vector<std::shared_ptr<Candidate>> found;
    for (const auto& fn : unit.functions) {
        FunctionScan(unit, fn, seq, found).run();
    }
    std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        if (a->site.offset != b->site.offset) {
            return a->site.offset < b->site.offset;
        }
        return a->kind < b->kind;
    });
    std::vector<Candidate> out;
    out.reserve(found.size());
    for (const auto& c : found) {
        out.push_back(*c);
    }
    return out;
}

} // namespace bvscan::ex
