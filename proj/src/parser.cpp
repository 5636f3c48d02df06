// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include <set>
#include <sstream>

#include "bvscan/frontend.hpp"

namespace bvscan::fe {

const char* binop_text(BinOp op) {
    switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Shl: return "<<";
    case BinOp::Shr: return ">>";
    case BinOp::Or: return "|";
    case BinOp::And: return "&";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::LogAnd: return "&&";
    }
    return "?";
}

bool is_comparison(BinOp op) {
    return op == BinOp::Lt || op == BinOp::Le || op == BinOp::Gt || op == BinOp::Ge || op == BinOp::Eq ||
           op == BinOp::Ne;
}

bool is_arithmetic(BinOp op) { return !is_comparison(op) && op != BinOp::LogAnd; }

const Function* TranslationUnit::find_function(const std::string& name) const {
    for (const auto& f : functions) {
        if (f.name == name) {
            return &f;
        }
    }
    for (const auto& f : prototypes) {
        if (f.name == name) {
            return &f;
        }
    }
    return nullptr;
}

const StructDef* TranslationUnit::find_struct(const std::string& name) const {
    for (const auto& s : structs) {
        if (s.name == name) {
            return &s;
        }
    }
    return nullptr;
}

const Typedef* TranslationUnit::find_typedef(const std::string& name) const {
    for (const auto& t : typedefs) {
        if (t.name == name) {
            return &t;
        }
    }
    return nullptr;
}

namespace {

// Raised inside a statement for constructs outside the subset; the statement
// parser turns it into a SkippedRegion.
struct Unsupported {
    std::string reason;
};

struct DeclSpec {
    TypeSpec type;
    bool is_static = false;
    bool is_inline = false;
    bool has_type = false;
};

const std::set<std::string>& type_keywords() {
    static const std::set<std::string> k{"void", "char", "short", "int", "long", "signed", "unsigned",
                                         "const", "volatile", "struct"};
    return k;
}

std::string canonical_spelling(const std::vector<std::string>& words, const SourceSpan& where) {
    int is_unsigned = 0;
    int is_signed = 0;
    int longs = 0;
    int shorts = 0;
    int chars = 0;
    int ints = 0;
    int voids = 0;
    for (const auto& w : words) {
        is_unsigned += w == "unsigned";
        is_signed += w == "signed";
        longs += w == "long";
        shorts += w == "short";
        chars += w == "char";
        ints += w == "int";
        voids += w == "void";
    }
    const bool bad = is_unsigned + is_signed > 1 || longs > 2 || shorts > 1 || chars > 1 || ints > 1 ||
                     (voids > 0 && words.size() > 1) || (chars + shorts > 0 && (longs > 0 || chars + shorts > 1)) ||
                     (chars > 0 && ints > 0);
    if (bad) {
        std::string all;
        for (const auto& w : words) {
            all += (all.empty() ? "" : " ") + w;
        }
        throw ParseError(where, "invalid type specifier '" + all + "'");
    }
    if (voids != 0) {
        return "void";
    }
    const std::string prefix = is_unsigned != 0 ? "unsigned " : "";
    if (chars != 0) {
        return is_signed != 0 ? "signed char" : prefix + "char";
    }
    if (shorts != 0) {
        return prefix + "short";
    }
    if (longs == 2) {
        return prefix + "long long";
    }
    if (longs == 1) {
        return prefix + "long";
    }
    return prefix + "int";
}

class Parser {
  public:
    explicit Parser(const std::vector<Token>& toks) : toks_(toks) {
        if (!toks_.empty()) {
            unit_.file = toks_.front().span.file;
            const auto& last = toks_.back().span;
            unit_.source_length = last.offset + last.length;
        }
    }

    TranslationUnit run() {
        while (!done()) {
            if (at(Tok::Annotation)) {
                annotation();
            } else if (at(Tok::Semi)) {
                ++pos_;
            } else if (at_kw("typedef")) {
                typedef_decl();
            } else if (at_kw("struct") && peek_is(1, Tok::Ident) && (peek_is(2, Tok::LBrace) || peek_is(2, Tok::Semi))) {
                struct_decl();
            } else {
                external_decl();
            }
        }
        return std::move(unit_);
    }

  private:
    // ------------------------------------------------------------ tokens

    [[nodiscard]] bool done() const { return pos_ >= toks_.size(); }

    [[nodiscard]] const Token& cur() const {
        if (done()) {
            throw ParseError(end_span(), "unexpected end of input");
        }
        return toks_[pos_];
    }

    [[nodiscard]] SourceSpan end_span() const {
        if (toks_.empty()) {
            return SourceSpan{"<input>", 1, 1, 1, 0};
        }
        SourceSpan s = toks_.back().span;
        s.column += s.length;
        s.offset += s.length;
        s.length = 1;
        return s;
    }

    [[nodiscard]] bool at(Tok k) const { return !done() && toks_[pos_].kind == k; }
    [[nodiscard]] bool at_kw(const char* kw) const {
        return !done() && toks_[pos_].kind == Tok::Keyword && toks_[pos_].text == kw;
    }
    [[nodiscard]] bool peek_is(size_t ahead, Tok k) const {
        return pos_ + ahead < toks_.size() && toks_[pos_ + ahead].kind == k;
    }

    const Token& expect(Tok k, const char* what) {
        if (!at(k)) {
            const SourceSpan where = done() ? end_span() : cur().span;
            throw ParseError(where, std::string("expected ") + what);
        }
        return toks_[pos_++];
    }

    // Span from token `first` through the last consumed token.
    [[nodiscard]] SourceSpan span_from(size_t first) const {
        SourceSpan s = toks_.at(first).span;
        const auto& last = toks_.at(pos_ > first ? pos_ - 1 : first).span;
        s.length = last.offset + last.length - s.offset;
        return s;
    }

    [[nodiscard]] std::string raw_text(size_t first, size_t last) const {
        std::string out;
        for (size_t i = first; i < last; ++i) {
            if (toks_[i].kind == Tok::Annotation) {
                continue;
            }
            out += (out.empty() ? "" : " ") + toks_[i].text;
        }
        return out;
    }

    [[nodiscard]] bool is_type_start(size_t index) const {
        if (index >= toks_.size()) {
            return false;
        }
        const Token& t = toks_[index];
        if (t.kind == Tok::Keyword) {
            return type_keywords().count(t.text) != 0;
        }
        return t.kind == Tok::Ident && (typedef_names_.count(t.text) != 0 || is_builtin_type_name(t.text));
    }

    // ------------------------------------------------------ declarations

    void annotation() {
        const Token& t = toks_[pos_++];
        std::istringstream in(t.text);
        std::string tag;
        std::string name;
        std::string lo;
        std::string hi;
        in >> tag >> name >> lo >> hi;
        try {
            size_t used_lo = 0;
            size_t used_hi = 0;
            RangeAnnotation a{.name = name, .lo = std::stoull(lo, &used_lo, 0), .hi = std::stoull(hi, &used_hi, 0), .span = t.span};
            if (name.empty() || used_lo != lo.size() || used_hi != hi.size() || a.lo > a.hi || lo[0] == '-') {
                throw std::invalid_argument("range");
            }
            unit_.annotations.push_back(a);
        } catch (const std::logic_error&) {
            throw ParseError(t.span, "malformed @range annotation, expected '@range NAME LO HI'");
        }
    }

    // In declaration-only positions (parameters, file scope) an unknown name
    // followed by a declarator is taken as a type so resolution can report it.
    DeclSpec decl_specifiers(bool allow_unknown = false) {
        DeclSpec ds;
        std::vector<std::string> words;
        const size_t first = pos_;
        while (!done()) {
            const Token& t = cur();
            if (t.kind == Tok::Keyword) {
                if (t.text == "static") {
                    ds.is_static = true;
                } else if (t.text == "inline") {
                    ds.is_inline = true;
                } else if (t.text == "extern" || t.text == "const" || t.text == "volatile") {
                    // qualifiers carry no width information
                } else if (t.text == "struct") {
                    if (!words.empty() || ds.has_type) {
                        throw ParseError(t.span, "unexpected 'struct'");
                    }
                    ++pos_;
                    ds.type.spelling = "struct " + expect(Tok::Ident, "struct name").text;
                    if (at(Tok::LBrace)) {
                        throw ParseError(cur().span, "struct definitions are only supported at file scope");
                    }
                    ds.has_type = true;
                    continue;
                } else if (type_keywords().count(t.text) != 0) {
                    if (ds.has_type) {
                        throw ParseError(t.span, "unexpected '" + t.text + "' after type name");
                    }
                    words.push_back(t.text);
                } else {
                    break;
                }
                ++pos_;
                continue;
            }
            if (t.kind == Tok::Ident && words.empty() && !ds.has_type &&
                (typedef_names_.count(t.text) != 0 || is_builtin_type_name(t.text))) {
                ds.type.spelling = t.text;
                ds.has_type = true;
                ++pos_;
                continue;
            }
            if (allow_unknown && t.kind == Tok::Ident && words.empty() && !ds.has_type &&
                (peek_is(1, Tok::Ident) || (peek_is(1, Tok::Star) && peek_is(2, Tok::Ident)))) {
                ds.type.spelling = t.text;
                ds.has_type = true;
                ++pos_;
                continue;
            }
            break;
        }
        if (!words.empty()) {
            ds.type.spelling = canonical_spelling(words, toks_.at(first).span);
            ds.has_type = true;
        }
        return ds;
    }

    unsigned pointers() {
        unsigned n = 0;
        while (at(Tok::Star) || at_kw("const") || at_kw("volatile")) {
            n += at(Tok::Star) ? 1 : 0;
            ++pos_;
        }
        return n;
    }

    std::vector<uint64_t> dims() {
        std::vector<uint64_t> out;
        while (at(Tok::LBracket)) {
            ++pos_;
            uint64_t n = 0;
            if (at(Tok::IntLit)) {
                n = cur().value;
                ++pos_;
            }
            expect(Tok::RBracket, "']' (array bounds must be integer literals)");
            out.push_back(n);
        }
        return out;
    }

    void skip_to_semicolon() {
        int depth = 0;
        while (!done()) {
            const Tok k = cur().kind;
            if (k == Tok::LParen || k == Tok::LBracket || k == Tok::LBrace) {
                ++depth;
            } else if (k == Tok::RParen || k == Tok::RBracket || k == Tok::RBrace) {
                --depth;
            } else if (k == Tok::Semi && depth <= 0) {
                ++pos_;
                return;
            }
            ++pos_;
        }
    }

    void typedef_decl() {
        const size_t first = pos_++;
        const DeclSpec ds = decl_specifiers();
        if (!ds.has_type) {
            throw ParseError(done() ? end_span() : cur().span, "expected type in typedef");
        }
        const unsigned ptr = pointers();
        if (at(Tok::LParen)) {
            skip_to_semicolon();
            unit_.skipped.push_back({span_from(first), "", "function pointer typedef", raw_text(first, pos_)});
            return;
        }
        const Token& name = expect(Tok::Ident, "typedef name");
        if (!dims().empty()) {
            throw ParseError(name.span, "array typedefs are not supported");
        }
        expect(Tok::Semi, "';' after typedef");
        unit_.typedefs.push_back({name.text, TypeSpec{ds.type.spelling, ds.type.pointer_depth + ptr}, span_from(first)});
        typedef_names_.insert(name.text);
    }

    void struct_decl() {
        const size_t first = pos_++;
        StructDef s;
        s.name = expect(Tok::Ident, "struct name").text;
        if (at(Tok::Semi)) {
            ++pos_;
            return;
        }
        expect(Tok::LBrace, "'{'");
        while (!at(Tok::RBrace)) {
            const DeclSpec ds = decl_specifiers();
            if (!ds.has_type) {
                throw ParseError(cur().span, "expected field type");
            }
            while (true) {
                const unsigned ptr = pointers();
                const Token& name = expect(Tok::Ident, "field name");
                s.fields.push_back({TypeSpec{ds.type.spelling, ptr}, name.text, dims()});
                if (at(Tok::Comma)) {
                    ++pos_;
                    continue;
                }
                break;
            }
            expect(Tok::Semi, "';' after field");
        }
        ++pos_;
        expect(Tok::Semi, "';' after struct definition");
        s.span = span_from(first);
        if (unit_.find_struct(s.name) != nullptr) {
            throw ParseError(s.span, "redefinition of struct " + s.name);
        }
        unit_.structs.push_back(std::move(s));
    }

    void external_decl() {
        const size_t first = pos_;
        const DeclSpec ds = decl_specifiers(true);
        if (!ds.has_type) {
            throw ParseError(cur().span, "expected declaration, found '" + cur().text + "'");
        }
        const unsigned ptr = pointers();
        const Token& name = expect(Tok::Ident, "declarator name");
        if (!at(Tok::LParen)) {
            skip_to_semicolon();
            unit_.skipped.push_back({span_from(first), "", "file-scope variable", raw_text(first, pos_)});
            return;
        }
        Function f;
        f.name = name.text;
        f.return_type = TypeSpec{ds.type.spelling, ptr};
        f.is_static = ds.is_static;
        f.is_inline = ds.is_inline;
        f.params = params();
        if (at(Tok::Semi)) {
            ++pos_;
            f.span = span_from(first);
            unit_.prototypes.push_back(std::move(f));
            return;
        }
        if (!at(Tok::LBrace)) {
            throw ParseError(done() ? end_span() : cur().span, "expected ';' or function body");
        }
        for (const auto& g : unit_.functions) {
            if (g.name == f.name) {
                throw ParseError(name.span, "redefinition of function " + f.name);
            }
        }
        function_ = f.name;
        ++pos_;
        f.has_body = true;
        f.body = block_contents();
        f.end_line = toks_[pos_ - 1].span.line;
        f.span = span_from(first);
        function_.clear();
        unit_.functions.push_back(std::move(f));
    }

    std::vector<Param> params() {
        expect(Tok::LParen, "'('");
        std::vector<Param> out;
        if (at_kw("void") && peek_is(1, Tok::RParen)) {
            pos_ += 2;
            return out;
        }
        if (at(Tok::RParen)) {
            ++pos_;
            return out;
        }
        while (true) {
            const size_t first = pos_;
            const DeclSpec ds = decl_specifiers(true);
            if (!ds.has_type) {
                throw ParseError(done() ? end_span() : cur().span, "expected parameter type");
            }
            Param p;
            p.type = TypeSpec{ds.type.spelling, pointers()};
            if (at(Tok::Ident)) {
                p.name = cur().text;
                ++pos_;
            }
            p.dims = dims();
            p.span = span_from(first);
            out.push_back(std::move(p));
            if (at(Tok::Comma)) {
                ++pos_;
                continue;
            }
            expect(Tok::RParen, "')' after parameters");
            return out;
        }
    }

    // -------------------------------------------------------- statements

    // Parses statements up to and including the closing brace.
    std::vector<StmtPtr> block_contents() {
        std::vector<StmtPtr> out;
        while (!at(Tok::RBrace)) {
            if (done()) {
                throw ParseError(end_span(), "expected '}'");
            }
            statement(out);
        }
        ++pos_;
        return out;
    }

    std::vector<StmtPtr> single(size_t) {
        std::vector<StmtPtr> out;
        statement(out);
        return out;
    }

    StmtPtr skipped(size_t first, const std::string& reason) {
        pos_ = first;
        skip_statement();
        auto s = std::make_shared<Stmt>();
        s->kind = StmtKind::Skipped;
        s->span = span_from(first);
        s->raw = raw_text(first, pos_);
        s->reason = reason;
        for (size_t i = first; i < pos_; ++i) {
            if (toks_[i].kind == Tok::Annotation) {
                const size_t save = pos_;
                pos_ = i;
                annotation();
                pos_ = save;
            }
        }
        unit_.skipped.push_back({s->span, function_, reason, s->raw});
        return s;
    }

    void skip_balanced(Tok open, Tok close) {
        expect(open, tok_name(open));
        int depth = 1;
        while (depth > 0) {
            if (done()) {
                throw ParseError(end_span(), std::string("expected '") + tok_name(close) + "'");
            }
            if (cur().kind == open) {
                ++depth;
            } else if (cur().kind == close) {
                --depth;
            }
            ++pos_;
        }
    }

    void skip_statement() {
        if (done()) {
            throw ParseError(end_span(), "expected statement");
        }
        if (at_kw("if")) {
            ++pos_;
            skip_balanced(Tok::LParen, Tok::RParen);
            skip_statement();
            if (at_kw("else")) {
                ++pos_;
                skip_statement();
            }
        } else if (at_kw("while") || at_kw("for") || at_kw("switch")) {
            ++pos_;
            skip_balanced(Tok::LParen, Tok::RParen);
            skip_statement();
        } else if (at_kw("do")) {
            ++pos_;
            skip_statement();
            if (!at_kw("while")) {
                throw ParseError(done() ? end_span() : cur().span, "expected 'while' after do body");
            }
            ++pos_;
            skip_balanced(Tok::LParen, Tok::RParen);
            expect(Tok::Semi, "';'");
        } else if (at(Tok::LBrace)) {
            skip_balanced(Tok::LBrace, Tok::RBrace);
        } else {
            int depth = 0;
            while (true) {
                if (done()) {
                    throw ParseError(end_span(), "expected ';'");
                }
                const Tok k = cur().kind;
                ++pos_;
                if (k == Tok::LParen || k == Tok::LBracket || k == Tok::LBrace) {
                    ++depth;
                } else if (k == Tok::RParen || k == Tok::RBracket || k == Tok::RBrace) {
                    --depth;
                } else if (k == Tok::Semi && depth == 0) {
                    return;
                }
            }
        }
    }

    static StmtPtr make_stmt(StmtKind kind) {
        auto s = std::make_shared<Stmt>();
        s->kind = kind;
        return s;
    }

    void statement(std::vector<StmtPtr>& out) {
        const size_t first = pos_;
        const Token& t = cur();
        if (t.kind == Tok::Annotation) {
            annotation();
            return;
        }
        if (t.kind == Tok::Semi) {
            ++pos_;
            return;
        }
        if (t.kind == Tok::LBrace) {
            ++pos_;
            auto s = make_stmt(StmtKind::Block);
            s->body = block_contents();
            s->span = span_from(first);
            out.push_back(s);
            return;
        }
        if (t.kind == Tok::Keyword) {
            static const std::map<std::string, std::string> unsupported{
                {"while", "loop"},     {"for", "loop"},        {"do", "loop"},         {"switch", "switch statement"},
                {"goto", "goto"},      {"break", "jump"},      {"continue", "jump"},   {"case", "switch label"},
                {"default", "switch label"},
            };
            if (const auto it = unsupported.find(t.text); it != unsupported.end()) {
                out.push_back(skipped(first, it->second));
                return;
            }
            if (t.text == "if") {
                out.push_back(if_statement(first));
                return;
            }
            if (t.text == "return") {
                out.push_back(return_statement(first));
                return;
            }
            if (t.text == "else") {
                throw ParseError(t.span, "'else' without 'if'");
            }
        }
        if (is_type_start(pos_) && !(peek_is(1, Tok::LParen) && t.kind == Tok::Ident && !is_builtin_type_name(t.text) &&
                                     typedef_names_.count(t.text) == 0)) {
            declaration(first, out);
            return;
        }
        out.push_back(expression_statement(first));
    }

    StmtPtr if_statement(size_t first) {
        ++pos_;
        auto s = make_stmt(StmtKind::If);
        try {
            expect(Tok::LParen, "'(' after if");
            s->expr = expression();
            if (at(Tok::Comma)) {
                throw Unsupported{"comma operator"};
            }
            expect(Tok::RParen, "')' after condition");
        } catch (const Unsupported& u) {
            return skipped(first, u.reason);
        }
        s->body = single(first);
        if (at_kw("else")) {
            ++pos_;
            s->has_else = true;
            s->else_body = single(first);
        }
        s->span = span_from(first);
        return s;
    }

    StmtPtr return_statement(size_t first) {
        ++pos_;
        auto s = make_stmt(StmtKind::Return);
        try {
            if (!at(Tok::Semi)) {
                s->expr = expression();
            }
            if (at(Tok::Comma)) {
                throw Unsupported{"comma operator"};
            }
        } catch (const Unsupported& u) {
            return skipped(first, u.reason);
        }
        expect(Tok::Semi, "';' after return");
        s->span = span_from(first);
        return s;
    }

    void declaration(size_t first, std::vector<StmtPtr>& out) {
        const DeclSpec ds = decl_specifiers();
        std::vector<StmtPtr> decls;
        try {
            while (true) {
                const size_t decl_first = pos_;
                auto s = make_stmt(StmtKind::Decl);
                s->decl_type = TypeSpec{ds.type.spelling, pointers()};
                s->is_static = ds.is_static;
                if (at(Tok::LParen)) {
                    throw Unsupported{"function pointer"};
                }
                s->name = expect(Tok::Ident, "variable name").text;
                s->dims = dims();
                if (at(Tok::Assign)) {
                    ++pos_;
                    if (at(Tok::LBrace)) {
                        throw Unsupported{"initializer list"};
                    }
                    s->expr = expression();
                }
                s->span = span_from(decl_first);
                decls.push_back(s);
                if (at(Tok::Comma)) {
                    ++pos_;
                    continue;
                }
                if (!at(Tok::Semi)) {
                    throw ParseError(done() ? end_span() : cur().span, "expected ';' after declaration");
                }
                ++pos_;
                break;
            }
        } catch (const Unsupported& u) {
            out.push_back(skipped(first, u.reason));
            return;
        }
        if (ds.is_static) {
            out.push_back(skipped(first, "static local"));
            return;
        }
        out.insert(out.end(), decls.begin(), decls.end());
    }

    StmtPtr expression_statement(size_t first) {
        static const std::map<Tok, BinOp> compound{
            {Tok::PlusAssign, BinOp::Add}, {Tok::MinusAssign, BinOp::Sub}, {Tok::StarAssign, BinOp::Mul},
            {Tok::ShlAssign, BinOp::Shl},  {Tok::ShrAssign, BinOp::Shr},   {Tok::AmpAssign, BinOp::And},
            {Tok::PipeAssign, BinOp::Or},
        };
        StmtPtr s;
        try {
            ExprPtr e = expression();
            if (at(Tok::Assign) || compound.count(cur().kind) != 0) {
                if (e->kind != ExprKind::Var && e->kind != ExprKind::Index && e->kind != ExprKind::Member) {
                    throw ParseError(e->span, "assignment target is not an lvalue");
                }
                const Tok op = cur().kind;
                ++pos_;
                ExprPtr value = expression();
                if (op != Tok::Assign) {
                    auto bin = std::make_shared<Expr>();
                    bin->kind = ExprKind::Binary;
                    bin->bop = compound.at(op);
                    bin->span = span_from(first);
                    bin->kids = {clone(*e), value};
                    value = bin;
                }
                s = make_stmt(StmtKind::Assign);
                s->target = e;
                s->expr = value;
            } else if (at(Tok::SlashAssign) || at(Tok::PercentAssign) || at(Tok::CaretAssign)) {
                throw Unsupported{"unsupported compound assignment"};
            } else {
                s = make_stmt(StmtKind::ExprStmt);
                s->expr = e;
            }
            if (at(Tok::Assign) || at(Tok::Comma)) {
                throw Unsupported{at(Tok::Assign) ? "chained assignment" : "comma operator"};
            }
        } catch (const Unsupported& u) {
            return skipped(first, u.reason);
        }
        expect(Tok::Semi, "';' after expression");
        s->span = span_from(first);
        return s;
    }

    // ------------------------------------------------------- expressions

    ExprPtr node(ExprKind kind, size_t first) {
        auto e = std::make_shared<Expr>();
        e->kind = kind;
        e->span = span_from(first);
        return e;
    }

    ExprPtr binary(BinOp op, ExprPtr lhs, ExprPtr rhs, size_t first) {
        auto e = node(ExprKind::Binary, first);
        e->bop = op;
        e->kids = {std::move(lhs), std::move(rhs)};
        return e;
    }

    ExprPtr expression() {
        const size_t first = pos_;
        ExprPtr e = logical_and();
        if (at(Tok::OrOr)) {
            throw Unsupported{"logical or"};
        }
        if (at(Tok::Question)) {
            throw Unsupported{"conditional operator"};
        }
        (void)first;
        return e;
    }

    ExprPtr logical_and() {
        const size_t first = pos_;
        ExprPtr e = bit_or();
        while (at(Tok::AndAnd)) {
            ++pos_;
            ExprPtr rhs = bit_or();
            e = binary(BinOp::LogAnd, e, rhs, first);
        }
        return e;
    }

    ExprPtr bit_or() {
        const size_t first = pos_;
        ExprPtr e = bit_xor();
        while (at(Tok::Pipe)) {
            ++pos_;
            ExprPtr rhs = bit_xor();
            e = binary(BinOp::Or, e, rhs, first);
        }
        return e;
    }

    ExprPtr bit_xor() {
        ExprPtr e = bit_and();
        if (at(Tok::Caret)) {
            throw Unsupported{"exclusive or"};
        }
        return e;
    }

    ExprPtr bit_and() {
        const size_t first = pos_;
        ExprPtr e = equality();
        while (at(Tok::Amp)) {
            ++pos_;
            ExprPtr rhs = equality();
            e = binary(BinOp::And, e, rhs, first);
        }
        return e;
    }

    ExprPtr equality() {
        const size_t first = pos_;
        ExprPtr e = relational();
        while (at(Tok::EqEq) || at(Tok::Ne)) {
            const BinOp op = at(Tok::EqEq) ? BinOp::Eq : BinOp::Ne;
            ++pos_;
            ExprPtr rhs = relational();
            e = binary(op, e, rhs, first);
        }
        return e;
    }

    ExprPtr relational() {
        const size_t first = pos_;
        ExprPtr e = shift();
        while (at(Tok::Lt) || at(Tok::Le) || at(Tok::Gt) || at(Tok::Ge)) {
            const Tok k = cur().kind;
            const BinOp op = k == Tok::Lt ? BinOp::Lt : k == Tok::Le ? BinOp::Le : k == Tok::Gt ? BinOp::Gt : BinOp::Ge;
            ++pos_;
            ExprPtr rhs = shift();
            e = binary(op, e, rhs, first);
        }
        return e;
    }

    ExprPtr shift() {
        const size_t first = pos_;
        ExprPtr e = additive();
        while (at(Tok::Shl) || at(Tok::Shr)) {
            const BinOp op = at(Tok::Shl) ? BinOp::Shl : BinOp::Shr;
            ++pos_;
            ExprPtr rhs = additive();
            e = binary(op, e, rhs, first);
        }
        return e;
    }

    ExprPtr additive() {
        const size_t first = pos_;
        ExprPtr e = multiplicative();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            const BinOp op = at(Tok::Plus) ? BinOp::Add : BinOp::Sub;
            ++pos_;
            ExprPtr rhs = multiplicative();
            e = binary(op, e, rhs, first);
        }
        return e;
    }

    ExprPtr multiplicative() {
        const size_t first = pos_;
        ExprPtr e = cast_expr();
        while (true) {
            if (at(Tok::Slash) || at(Tok::Percent)) {
                throw Unsupported{at(Tok::Slash) ? "division" : "remainder"};
            }
            if (!at(Tok::Star)) {
                return e;
            }
            ++pos_;
            ExprPtr rhs = cast_expr();
            e = binary(BinOp::Mul, e, rhs, first);
        }
    }

    TypeSpec type_name() {
        const DeclSpec ds = decl_specifiers();
        if (!ds.has_type) {
            throw ParseError(cur().span, "expected type name");
        }
        TypeSpec t{ds.type.spelling, pointers()};
        if (at(Tok::LParen) || at(Tok::LBracket)) {
            throw Unsupported{"abstract declarator"};
        }
        return t;
    }

    ExprPtr cast_expr() {
        const size_t first = pos_;
        if (at(Tok::LParen) && is_type_start(pos_ + 1)) {
            ++pos_;
            const TypeSpec target = type_name();
            expect(Tok::RParen, "')' after cast type");
            if (at(Tok::LBrace)) {
                throw Unsupported{"compound literal"};
            }
            ExprPtr operand = cast_expr();
            auto e = node(ExprKind::Cast, first);
            e->cast_spec = target;
            e->kids = {operand};
            return e;
        }
        return unary();
    }

    ExprPtr unary() {
        const size_t first = pos_;
        if (done()) {
            throw ParseError(end_span(), "expected expression");
        }
        const Tok k = cur().kind;
        if (k == Tok::Minus || k == Tok::Bang || k == Tok::Tilde) {
            ++pos_;
            ExprPtr operand = cast_expr();
            auto e = node(ExprKind::Unary, first);
            e->uop = k == Tok::Minus ? UnOp::Neg : k == Tok::Bang ? UnOp::LogNot : UnOp::BitNot;
            e->kids = {operand};
            return e;
        }
        if (k == Tok::Plus) {
            ++pos_;
            return cast_expr();
        }
        if (k == Tok::PlusPlus || k == Tok::MinusMinus) {
            throw Unsupported{"increment or decrement"};
        }
        if (k == Tok::Amp || k == Tok::Star) {
            throw Unsupported{"pointer operation"};
        }
        if (at_kw("sizeof")) {
            ++pos_;
            if (!(at(Tok::LParen) && is_type_start(pos_ + 1))) {
                throw Unsupported{"sizeof expression"};
            }
            ++pos_;
            const TypeSpec t = type_name();
            expect(Tok::RParen, "')' after sizeof type");
            auto e = node(ExprKind::IntLiteral, first);
            e->sizeof_type = t;
            return e;
        }
        return postfix();
    }

    ExprPtr postfix() {
        const size_t first = pos_;
        ExprPtr e = primary();
        while (!done()) {
            if (at(Tok::LBracket)) {
                ++pos_;
                ExprPtr index = expression();
                expect(Tok::RBracket, "']'");
                auto ix = node(ExprKind::Index, first);
                ix->kids = {e, index};
                e = ix;
            } else if (at(Tok::LParen)) {
                ++pos_;
                auto call = std::make_shared<Expr>();
                call->kind = ExprKind::Call;
                if (e->kind == ExprKind::Var) {
                    call->name = e->name;
                } else if (e->kind == ExprKind::Member) {
                    call->name = e->name;
                    call->receiver = print_expr(e->kid(0));
                    call->arrow = e->arrow;
                } else {
                    throw Unsupported{"call through expression"};
                }
                if (!at(Tok::RParen)) {
                    while (true) {
                        call->kids.push_back(expression());
                        if (at(Tok::Comma)) {
                            ++pos_;
                            continue;
                        }
                        break;
                    }
                }
                expect(Tok::RParen, "')' after arguments");
                call->span = span_from(first);
                e = call;
            } else if (at(Tok::Dot) || at(Tok::Arrow)) {
                const bool arrow = at(Tok::Arrow);
                ++pos_;
                const Token& field = expect(Tok::Ident, "member name");
                auto m = node(ExprKind::Member, first);
                m->name = field.text;
                m->arrow = arrow;
                m->kids = {e};
                e = m;
            } else if (at(Tok::PlusPlus) || at(Tok::MinusMinus)) {
                throw Unsupported{"increment or decrement"};
            } else {
                break;
            }
        }
        return e;
    }

    ExprPtr primary() {
        const size_t first = pos_;
        const Token& t = cur();
        if (t.kind == Tok::Ident) {
            ++pos_;
            auto e = node(ExprKind::Var, first);
            e->name = t.text;
            return e;
        }
        if (t.kind == Tok::IntLit) {
            ++pos_;
            auto e = node(ExprKind::IntLiteral, first);
            e->value = t.value;
            e->literal = t;
            return e;
        }
        if (t.kind == Tok::LParen) {
            ++pos_;
            ExprPtr e = expression();
            if (at(Tok::Comma)) {
                throw Unsupported{"comma operator"};
            }
            expect(Tok::RParen, "')'");
            return e;
        }
        throw ParseError(t.span, "expected expression, found '" + t.text + "'");
    }

    const std::vector<Token>& toks_;
    size_t pos_ = 0;
    TranslationUnit unit_;
    std::set<std::string> typedef_names_;
    std::string function_;
};

} // namespace

TranslationUnit parse_unit(const std::vector<Token>& tokens) { return Parser(tokens).run(); }

ExprPtr clone(const Expr& e) {
    auto c = std::make_shared<Expr>(e);
    for (auto& k : c->kids) {
        k = clone(*k);
    }
    return c;
}

StmtPtr clone(const Stmt& s) {
    auto c = std::make_shared<Stmt>(s);
    if (c->expr) {
        c->expr = clone(*c->expr);
    }
    if (c->target) {
        c->target = clone(*c->target);
    }
    for (auto& b : c->body) {
        b = clone(*b);
    }
    for (auto& b : c->else_body) {
        b = clone(*b);
    }
    return c;
}

} // namespace bvscan::fe
