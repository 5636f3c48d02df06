// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#pragma once

// Lexer, parser and type resolution for the analyzed C subset.
//
// The subset covers function definitions and prototypes, typedefs, struct
// definitions, local declarations, assignments, if/else, return and the
// integer expression grammar. Anything else inside a function body (loops,
// division, pointer dereference, ...) is kept as a SkippedRegion statement.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bvscan::fe {

struct SourceSpan {
    std::string file;
    uint32_t line = 1;
    uint32_t column = 1;
    uint32_t length = 1;
    uint32_t offset = 0; // byte offset of the first character

    [[nodiscard]] std::string str() const { return file + ":" + std::to_string(line) + ":" + std::to_string(column); }
};

/// Base of every frontend diagnostic. what() is "file:line:col: message".
class FrontendError : public std::runtime_error {
  public:
    FrontendError(const SourceSpan& span, const std::string& message)
        : std::runtime_error(span.str() + ": " + message), span_(span), message_(message) {}
    [[nodiscard]] const SourceSpan& span() const { return span_; }
    [[nodiscard]] const std::string& message() const { return message_; }

  private:
    SourceSpan span_;
    std::string message_;
};

class LexError : public FrontendError {
  public:
    using FrontendError::FrontendError;
};

class ParseError : public FrontendError {
  public:
    using FrontendError::FrontendError;
};

class TypeError : public FrontendError {
  public:
    using FrontendError::FrontendError;
};

struct IntType {
    unsigned width = 32;
    bool is_signed = true;
    std::string name = "int";

    bool operator==(const IntType& o) const { return width == o.width && is_signed == o.is_signed; }
};

struct DataModel {
    unsigned int_width = 32;
    unsigned long_width = 32;
    unsigned pointer_width = 32;
    std::string label = "ILP32";

    static DataModel ilp32() { return {32, 32, 32, "ILP32"}; }
    static DataModel lp64() { return {32, 64, 64, "LP64"}; }
    /// Accepts "ilp32"/"lp64" in any case; throws std::invalid_argument otherwise.
    static DataModel from_label(const std::string& label);
};

/// Built-in integer spellings (C keywords in canonical order plus the fixed
/// width and project typedefs). nullopt for unknown names.
std::optional<IntType> builtin_type(const std::string& spelling, const DataModel& model);
bool is_builtin_type_name(const std::string& name);

// ---------------------------------------------------------------- tokens

enum class Tok {
    Ident, Keyword, IntLit, Annotation,
    LParen, RParen, LBrace, RBrace, LBracket, RBracket, Semi, Comma, Dot, Arrow, Question, Colon,
    Plus, Minus, Star, Slash, Percent, Amp, Pipe, Caret, Tilde, Bang,
    Shl, Shr, Lt, Le, Gt, Ge, EqEq, Ne, AndAnd, OrOr,
    Assign, PlusAssign, MinusAssign, StarAssign, SlashAssign, PercentAssign,
    AmpAssign, PipeAssign, CaretAssign, ShlAssign, ShrAssign, PlusPlus, MinusMinus,
};

const char* tok_name(Tok t);

struct Token {
    Tok kind;
    std::string text;
    SourceSpan span;
    uint64_t value = 0;       // IntLit
    bool unsigned_suffix = false;
    unsigned long_suffix = 0; // number of L suffixes
    bool hex_or_octal = false;
};

/// Splits `source` into tokens. Comments and preprocessor lines are skipped;
/// `/* @range NAME LO HI */` comments become Annotation tokens.
std::vector<Token> tokenize(const std::string& source, const std::string& file = "<input>");

// ------------------------------------------------------------------- AST

/// A type as written: a spelling ("unsigned long", "sword32", "struct tcpcb")
/// plus pointer depth.
struct TypeSpec {
    std::string spelling;
    unsigned pointer_depth = 0;
};

enum class ExprKind { IntLiteral, Var, Binary, Unary, Cast, Call, Index, Member };

enum class BinOp { Add, Sub, Mul, Shl, Shr, Or, And, Lt, Le, Gt, Ge, Eq, Ne, LogAnd };
enum class UnOp { Neg, LogNot, BitNot };

const char* binop_text(BinOp op);
bool is_comparison(BinOp op);
bool is_arithmetic(BinOp op);

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
    ExprKind kind = ExprKind::IntLiteral;
    SourceSpan span;
    std::optional<IntType> type; // set by resolve_types

    uint64_t value = 0;                   // IntLiteral
    std::optional<Token> literal;         // IntLiteral spelling, unset for sizeof
    std::optional<TypeSpec> sizeof_type;  // IntLiteral produced by sizeof(type)
    std::string name;                     // Var, Call callee, Member field
    BinOp bop = BinOp::Add;
    UnOp uop = UnOp::Neg;
    TypeSpec cast_spec;                   // explicit Cast
    bool implicit = false;                // Cast inserted by resolve_types
    std::string receiver;                 // Call: "obj" for obj.method(...)
    bool arrow = false;                   // Member through ->
    std::vector<ExprPtr> kids;

    [[nodiscard]] const Expr& kid(size_t i) const { return *kids.at(i); }
};

enum class StmtKind { Decl, ExprStmt, Assign, If, Return, Block, Skipped };

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

struct Stmt {
    StmtKind kind = StmtKind::ExprStmt;
    SourceSpan span;
    // Decl
    TypeSpec decl_type;
    std::string name;
    std::vector<uint64_t> dims;
    bool is_static = false;
    // Decl init, ExprStmt expression, Assign value, If condition, Return value
    ExprPtr expr;
    // Assign target. Compound assignments are desugared into target = target op value.
    ExprPtr target;
    std::vector<StmtPtr> body;      // If then-branch, Block contents
    std::vector<StmtPtr> else_body; // If else-branch
    bool has_else = false;
    // Skipped: raw source text and why it is outside the subset
    std::string raw;
    std::string reason;
};

struct Param {
    TypeSpec type;
    std::string name;
    std::vector<uint64_t> dims;
    SourceSpan span;
};

struct Function {
    std::string name;
    TypeSpec return_type;
    std::vector<Param> params;
    std::vector<StmtPtr> body;
    bool has_body = false;
    bool is_static = false;
    bool is_inline = false;
    SourceSpan span;
    uint32_t end_line = 0;
};

struct Field {
    TypeSpec type;
    std::string name;
    std::vector<uint64_t> dims;
};

struct StructDef {
    std::string name;
    std::vector<Field> fields;
    SourceSpan span;
};

struct Typedef {
    std::string name;
    TypeSpec type;
    SourceSpan span;
};

/// `/* @range NAME LO HI */`: the declared value range of a variable.
struct RangeAnnotation {
    std::string name;
    uint64_t lo = 0;
    uint64_t hi = 0;
    SourceSpan span;
};

struct SkippedRegion {
    SourceSpan span;
    std::string function; // empty at file scope
    std::string reason;
    std::string raw;
};

struct TranslationUnit {
    std::string file;
    std::vector<Function> functions;  // definitions, unique names
    std::vector<Function> prototypes; // declarations without a body
    std::vector<Typedef> typedefs;
    std::vector<StructDef> structs;
    std::vector<RangeAnnotation> annotations;
    std::vector<SkippedRegion> skipped;
    std::string data_model; // set by resolve_types
    uint32_t source_length = 0;

    [[nodiscard]] const Function* find_function(const std::string& name) const;
    [[nodiscard]] const StructDef* find_struct(const std::string& name) const;
    [[nodiscard]] const Typedef* find_typedef(const std::string& name) const;
};

TranslationUnit parse_unit(const std::vector<Token>& tokens);

/// Types every expression, inserts implicit conversions (integer promotion,
/// usual arithmetic conversions, assignment and argument conversions) and
/// folds sizeof. Returns a new unit; the input is not modified.
TranslationUnit resolve_types(const TranslationUnit& unit, const DataModel& model);

/// Convenience: tokenize, parse and resolve.
TranslationUnit load_source(const std::string& source, const std::string& file, const DataModel& model);

/// C text that parses back to a structurally identical unit.
std::string print_unit(const TranslationUnit& unit);
std::string print_expr(const Expr& e);

/// Span-free S-expression dump; two units are structurally identical iff
/// their dumps are equal.
std::string dump_ast(const TranslationUnit& unit);
std::string dump_expr(const Expr& e);

/// Deep copy.
ExprPtr clone(const Expr& e);
StmtPtr clone(const Stmt& s);

} // namespace bvscan::fe
