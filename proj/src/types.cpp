// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include <algorithm>
#include <cctype>
#include <limits>
#include <map>

#include "bvscan/frontend.hpp"

namespace bvscan::fe {

DataModel DataModel::from_label(const std::string& label) {
    std::string low = label;
    std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) { return std::tolower(c); });
    if (low == "ilp32") {
        return ilp32();
    }
    if (low == "lp64") {
        return lp64();
    }
    throw std::invalid_argument("unknown data model '" + label + "' (expected ILP32 or LP64)");
}

namespace {

// Width 0 stands for "long" and 1 for "pointer"; both depend on the data model.
struct BuiltinRow {
    const char* name;
    unsigned width;
    bool is_signed;
};

constexpr unsigned kLong = 0;
constexpr unsigned kPointer = 1;

constexpr BuiltinRow builtin_rows[] = {
    {"char", 8, true},           {"signed char", 8, true},    {"unsigned char", 8, false},
    {"short", 16, true},         {"unsigned short", 16, false}, {"int", 32, true},
    {"unsigned int", 32, false}, {"long", kLong, true},       {"unsigned long", kLong, false},
    {"long long", 64, true},     {"unsigned long long", 64, false},
    {"uint8_t", 8, false},       {"uint16_t", 16, false},     {"uint32_t", 32, false},
    {"uint64_t", 64, false},     {"int8_t", 8, true},         {"int16_t", 16, true},
    {"int32_t", 32, true},       {"int64_t", 64, true},       {"size_t", kPointer, false},
    {"ssize_t", kPointer, true}, {"uintptr_t", kPointer, false}, {"sword32", 32, true},
    {"word32", 32, false},       {"word16", 16, false},       {"byte", 8, false},
    {"U8", 8, false},            {"U16", 16, false},          {"U32", 32, false},
    {"U64", 64, false},          {"I8", 8, true},             {"I16", 16, true},
    {"I32", 32, true},           {"I64", 64, true},
};

} // namespace

std::optional<IntType> builtin_type(const std::string& spelling, const DataModel& model) {
    for (const auto& row : builtin_rows) {
        if (spelling == row.name) {
            unsigned width = row.width;
            if (width == kLong) {
                width = model.long_width;
            } else if (width == kPointer) {
                width = model.pointer_width;
            }
            return IntType{width, row.is_signed, row.name};
        }
    }
    return std::nullopt;
}

bool is_builtin_type_name(const std::string& name) {
    // Keyword spellings never reach the parser as identifiers, so a plain
    // name match is enough.
    return std::any_of(std::begin(builtin_rows), std::end(builtin_rows),
                       [&](const BuiltinRow& r) { return name == r.name; });
}

namespace {

struct CType;
using CTypePtr = std::shared_ptr<const CType>;

struct CType {
    enum class Kind { Int, Ptr, Array, Struct, Void } kind = Kind::Int;
    IntType it;
    std::string struct_name;
    CTypePtr elem;
    uint64_t dim = 0;
};

CTypePtr make_int(const IntType& t) {
    auto c = std::make_shared<CType>();
    c->it = t;
    return c;
}

class Resolver {
  public:
    Resolver(const TranslationUnit& unit, const DataModel& model) : unit_(unit), model_(model) {}

    TranslationUnit run() {
        TranslationUnit out = unit_;
        out.data_model = model_.label;
        for (auto& f : out.functions) {
            for (auto& s : f.body) {
                s = clone(*s);
            }
            function(f);
        }
        for (auto& f : out.prototypes) {
            for (const auto& p : f.params) {
                (void)spec_type(p.type, p.dims, p.span);
            }
        }
        return out;
    }

  private:
    // ------------------------------------------------------------- types

    [[nodiscard]] IntType int_type() const { return IntType{model_.int_width, true, "int"}; }
    [[nodiscard]] IntType pointer_int() const { return IntType{model_.pointer_width, false, "pointer"}; }
    [[nodiscard]] IntType size_type() const { return IntType{model_.pointer_width, false, "size_t"}; }

    CTypePtr spelling_type(const std::string& spelling, const SourceSpan& where, int depth = 0) const {
        if (depth > 32) {
            throw TypeError(where, "typedef cycle through '" + spelling + "'");
        }
        if (spelling == "void") {
            auto c = std::make_shared<CType>();
            c->kind = CType::Kind::Void;
            return c;
        }
        if (spelling.rfind("struct ", 0) == 0) {
            auto c = std::make_shared<CType>();
            c->kind = CType::Kind::Struct;
            c->struct_name = spelling.substr(7);
            return c;
        }
        if (const Typedef* td = unit_.find_typedef(spelling)) {
            CTypePtr base = spelling_type(td->type.spelling, where, depth + 1);
            for (unsigned i = 0; i < td->type.pointer_depth; ++i) {
                base = pointer_to(base);
            }
            if (base->kind == CType::Kind::Int) {
                IntType named = base->it;
                named.name = spelling;
                return make_int(named);
            }
            return base;
        }
        if (auto b = builtin_type(spelling, model_)) {
            return make_int(*b);
        }
        throw TypeError(where, "unknown type '" + spelling + "'");
    }

    static CTypePtr pointer_to(CTypePtr t) {
        auto c = std::make_shared<CType>();
        c->kind = CType::Kind::Ptr;
        c->elem = std::move(t);
        return c;
    }

    CTypePtr spec_type(const TypeSpec& spec, const std::vector<uint64_t>& dims, const SourceSpan& where) const {
        CTypePtr t = spelling_type(spec.spelling, where);
        for (unsigned i = 0; i < spec.pointer_depth; ++i) {
            t = pointer_to(t);
        }
        for (auto it = dims.rbegin(); it != dims.rend(); ++it) {
            auto a = std::make_shared<CType>();
            a->kind = CType::Kind::Array;
            a->elem = t;
            a->dim = *it;
            t = a;
        }
        return t;
    }

    const StructDef& struct_def(const CType& t, const SourceSpan& where) const {
        const StructDef* s = unit_.find_struct(t.struct_name);
        if (s == nullptr) {
            throw TypeError(where, "incomplete struct '" + t.struct_name + "'");
        }
        return *s;
    }

    // Natural size and alignment in bytes; structs are laid out without packing.
    std::pair<uint64_t, uint64_t> layout(const CType& t, const SourceSpan& where) const {
        switch (t.kind) {
        case CType::Kind::Int: return {t.it.width / 8, t.it.width / 8};
        case CType::Kind::Ptr: return {model_.pointer_width / 8, model_.pointer_width / 8};
        case CType::Kind::Array: {
            const auto [size, align] = layout(*t.elem, where);
            return {size * t.dim, align};
        }
        case CType::Kind::Struct: {
            uint64_t size = 0;
            uint64_t align = 1;
            for (const auto& f : struct_def(t, where).fields) {
                const auto [fs, fa] = layout(*spec_type(f.type, f.dims, where), where);
                size = (size + fa - 1) / fa * fa + fs;
                align = std::max(align, fa);
            }
            return {(size + align - 1) / align * align, align};
        }
        case CType::Kind::Void: break;
        }
        throw TypeError(where, "sizeof applied to void");
    }

    [[nodiscard]] IntType value_type(const CType& t) const {
        return t.kind == CType::Kind::Int ? t.it : pointer_int();
    }

    [[nodiscard]] IntType promote(const IntType& t) const {
        if (t.width < model_.int_width) {
            return int_type();
        }
        return t;
    }

    // Rank by width; equal-width types have equal rank in this subset.
    [[nodiscard]] IntType common(const IntType& a0, const IntType& b0) const {
        const IntType a = promote(a0);
        const IntType b = promote(b0);
        if (a == b) {
            return a;
        }
        if (a.is_signed == b.is_signed) {
            return a.width >= b.width ? a : b;
        }
        const IntType& u = a.is_signed ? b : a;
        const IntType& s = a.is_signed ? a : b;
        if (u.width >= s.width) {
            return u;
        }
        return s;
    }

    static void convert(ExprPtr& e, const IntType& to) {
        if (e->type && *e->type == to) {
            return;
        }
        auto c = std::make_shared<Expr>();
        c->kind = ExprKind::Cast;
        c->span = e->span;
        c->type = to;
        c->cast_spec = TypeSpec{to.name, 0};
        c->implicit = true;
        c->kids = {e};
        e = c;
    }

    // ------------------------------------------------------- expressions

    [[nodiscard]] IntType literal_type(const Expr& e) const {
        const Token& t = *e.literal;
        const IntType i{model_.int_width, true, "int"};
        const IntType ui{model_.int_width, false, "unsigned int"};
        const IntType l{model_.long_width, true, "long"};
        const IntType ul{model_.long_width, false, "unsigned long"};
        const IntType ll{64, true, "long long"};
        const IntType ull{64, false, "unsigned long long"};
        std::vector<IntType> order;
        if (t.unsigned_suffix) {
            order = t.long_suffix == 0 ? std::vector{ui, ul, ull} : t.long_suffix == 1 ? std::vector{ul, ull} : std::vector{ull};
        } else if (t.hex_or_octal) {
            order = t.long_suffix == 0 ? std::vector{i, ui, l, ul, ll, ull}
                    : t.long_suffix == 1 ? std::vector{l, ul, ll, ull}
                                         : std::vector{ll, ull};
        } else {
            order = t.long_suffix == 0 ? std::vector{i, l, ll} : t.long_suffix == 1 ? std::vector{l, ll} : std::vector{ll};
        }
        for (const auto& c : order) {
            const unsigned bits = c.is_signed ? c.width - 1 : c.width;
            if (bits >= 64 || t.value < (uint64_t{1} << bits)) {
                return c;
            }
        }
        // A decimal literal above the largest signed type: compilers fall back to unsigned.
        return ull;
    }

    CTypePtr lookup(const std::string& name, const SourceSpan& where) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            if (const auto f = it->find(name); f != it->end()) {
                return f->second;
            }
        }
        throw TypeError(where, "undeclared identifier '" + name + "'");
    }

    CTypePtr expr(ExprPtr& e) {
        CTypePtr t = expr_inner(e);
        e->type = value_type(*t);
        return t;
    }

    IntType int_operand(ExprPtr& e, const char* what) {
        const CTypePtr t = expr(e);
        if (t->kind != CType::Kind::Int) {
            throw TypeError(e->span, std::string(what) + " on a non-integer operand is outside the subset");
        }
        return t->it;
    }

    CTypePtr expr_inner(ExprPtr& e) {
        switch (e->kind) {
        case ExprKind::IntLiteral:
            if (e->sizeof_type) {
                e->value = layout(*spec_type(*e->sizeof_type, {}, e->span), e->span).first;
                return make_int(size_type());
            }
            return make_int(literal_type(*e));
        case ExprKind::Var: return lookup(e->name, e->span);
        case ExprKind::Binary: return binary(e);
        case ExprKind::Unary: {
            const IntType t = int_operand(e->kids[0], "unary operator");
            if (e->uop == UnOp::LogNot) {
                return make_int(int_type());
            }
            const IntType p = promote(t);
            convert(e->kids[0], p);
            return make_int(p);
        }
        case ExprKind::Cast: {
            const CTypePtr target = spec_type(e->cast_spec, {}, e->span);
            const CTypePtr from = expr(e->kids[0]);
            if (target->kind == CType::Kind::Void) {
                throw TypeError(e->span, "cast to void is outside the subset");
            }
            if (target->kind == CType::Kind::Struct || from->kind == CType::Kind::Struct) {
                throw TypeError(e->span, "struct conversion is outside the subset");
            }
            return target;
        }
        case ExprKind::Call: return call(e);
        case ExprKind::Index: {
            const CTypePtr base = expr(e->kids[0]);
            if (base->kind != CType::Kind::Array && base->kind != CType::Kind::Ptr) {
                throw TypeError(e->span, "subscript of a non-array value");
            }
            int_operand(e->kids[1], "array subscript");
            if (base->elem->kind == CType::Kind::Void) {
                throw TypeError(e->span, "subscript of a void pointer");
            }
            return base->elem;
        }
        case ExprKind::Member: {
            CTypePtr base = expr(e->kids[0]);
            if (e->arrow) {
                if (base->kind != CType::Kind::Ptr) {
                    throw TypeError(e->span, "'->' applied to a non-pointer");
                }
                base = base->elem;
            }
            if (base->kind != CType::Kind::Struct) {
                throw TypeError(e->span, "member access on a non-struct value");
            }
            for (const auto& f : struct_def(*base, e->span).fields) {
                if (f.name == e->name) {
                    return spec_type(f.type, f.dims, e->span);
                }
            }
            throw TypeError(e->span, "struct " + base->struct_name + " has no field '" + e->name + "'");
        }
        }
        throw TypeError(e->span, "unhandled expression");
    }

    CTypePtr binary(ExprPtr& e) {
        auto& lhs = e->kids[0];
        auto& rhs = e->kids[1];
        if (e->bop == BinOp::LogAnd) {
            expr(lhs);
            expr(rhs);
            return make_int(int_type());
        }
        const IntType a = int_operand(lhs, binop_text(e->bop));
        const IntType b = int_operand(rhs, binop_text(e->bop));
        if (e->bop == BinOp::Shl || e->bop == BinOp::Shr) {
            const IntType p = promote(a);
            convert(lhs, p);
            convert(rhs, p);
            return make_int(p);
        }
        const IntType c = common(a, b);
        convert(lhs, c);
        convert(rhs, c);
        return make_int(is_comparison(e->bop) ? int_type() : c);
    }

    void arguments(ExprPtr& call, const std::vector<std::optional<IntType>>& params) {
        if (call->kids.size() != params.size()) {
            throw TypeError(call->span, "'" + call->name + "' expects " + std::to_string(params.size()) +
                                            " argument(s), got " + std::to_string(call->kids.size()));
        }
        for (size_t i = 0; i < params.size(); ++i) {
            const CTypePtr t = expr(call->kids[i]);
            if (params[i] && t->kind == CType::Kind::Int) {
                convert(call->kids[i], *params[i]);
            }
        }
    }

    CTypePtr call(ExprPtr& e) {
        const std::string& name = e->name;
        if (name == "CFE_RESOURCEID_UNWRAP") {
            arguments(e, {std::nullopt});
            return make_int(*e->kids[0]->type);
        }
        if (name == "SEQ_LT" || name == "SEQ_LEQ" || name == "SEQ_GT" || name == "SEQ_GEQ") {
            arguments(e, {std::nullopt, std::nullopt});
            return make_int(int_type());
        }
        if (name == "malloc") {
            arguments(e, {size_type()});
            return pointer_to(spelling_type("void", e->span));
        }
        if (name == "memcpy" || name == "memset") {
            arguments(e, {std::nullopt, std::nullopt, size_type()});
            return pointer_to(spelling_type("void", e->span));
        }
        if (name == "memcmp") {
            arguments(e, {std::nullopt, std::nullopt, size_type()});
            return make_int(int_type());
        }
        const Function* f = unit_.find_function(name);
        if (f == nullptr) {
            throw TypeError(e->span, "call to undeclared function '" + name + "'");
        }
        std::vector<std::optional<IntType>> params;
        for (const auto& p : f->params) {
            const CTypePtr t = spec_type(p.type, p.dims, p.span);
            params.push_back(t->kind == CType::Kind::Int ? std::optional(t->it) : std::nullopt);
        }
        arguments(e, params);
        const CTypePtr r = spec_type(f->return_type, {}, f->span);
        if (r->kind == CType::Kind::Void) {
            return make_int(IntType{model_.int_width, true, "void"});
        }
        return r;
    }

    // -------------------------------------------------------- statements

    void declare(const std::string& name, CTypePtr t, const SourceSpan& where) {
        auto& scope = scopes_.back();
        if (scope.count(name) != 0) {
            throw TypeError(where, "redeclaration of '" + name + "'");
        }
        scope[name] = std::move(t);
    }

    void function(Function& f) {
        scopes_.assign(1, {});
        for (const auto& p : f.params) {
            const CTypePtr t = spec_type(p.type, p.dims, p.span);
            if (!p.name.empty()) {
                declare(p.name, t, p.span);
            }
        }
        return_type_ = spec_type(f.return_type, {}, f.span);
        block(f.body);
        scopes_.clear();
    }

    void block(std::vector<StmtPtr>& body) {
        scopes_.emplace_back();
        for (auto& s : body) {
            stmt(*s);
        }
        scopes_.pop_back();
    }

    void stmt(Stmt& s) {
        switch (s.kind) {
        case StmtKind::Decl: {
            const CTypePtr t = spec_type(s.decl_type, s.dims, s.span);
            if (t->kind == CType::Kind::Void) {
                throw TypeError(s.span, "variable '" + s.name + "' declared void");
            }
            if (s.expr) {
                const CTypePtr init = expr(s.expr);
                if (t->kind == CType::Kind::Int && init->kind == CType::Kind::Int) {
                    convert(s.expr, t->it);
                }
            }
            declare(s.name, t, s.span);
            break;
        }
        case StmtKind::Assign: {
            const CTypePtr t = expr(s.target);
            const CTypePtr v = expr(s.expr);
            if (t->kind == CType::Kind::Int && v->kind == CType::Kind::Int) {
                convert(s.expr, t->it);
            }
            break;
        }
        case StmtKind::ExprStmt: expr(s.expr); break;
        case StmtKind::Return:
            if (s.expr) {
                const CTypePtr v = expr(s.expr);
                if (return_type_->kind == CType::Kind::Int && v->kind == CType::Kind::Int) {
                    convert(s.expr, return_type_->it);
                }
            }
            break;
        case StmtKind::If:
            expr(s.expr);
            block(s.body);
            block(s.else_body);
            break;
        case StmtKind::Block: block(s.body); break;
        case StmtKind::Skipped: break;
        }
    }

    const TranslationUnit& unit_;
    DataModel model_;
    std::vector<std::map<std::string, CTypePtr>> scopes_;
    CTypePtr return_type_;
};

} // namespace

TranslationUnit resolve_types(const TranslationUnit& unit, const DataModel& model) { return Resolver(unit, model).run(); }

TranslationUnit load_source(const std::string& source, const std::string& file, const DataModel& model) {
    return resolve_types(parse_unit(tokenize(source, file)), model);
}

} // namespace bvscan::fe
