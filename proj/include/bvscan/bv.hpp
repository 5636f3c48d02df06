// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#pragma once

// Fixed-width bitvector terms and quantifier-free formulas over them.
//
// Terms are immutable DAG nodes shared through shared_ptr; copying a Term or a
// Formula is cheap and never copies the tree. All arithmetic is modulo 2^width.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bvscan::bv {

constexpr unsigned max_width = 64;

class BvError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class MissingVar : public BvError {
  public:
    explicit MissingVar(std::string name) : BvError("unassigned variable '" + name + "'"), name_(std::move(name)) {}
    [[nodiscard]] const std::string& name() const { return name_; }

  private:
    std::string name_;
};

constexpr uint64_t mask(unsigned width) { return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1; }
constexpr uint64_t msb(unsigned width) { return uint64_t{1} << (width - 1); }
constexpr bool fits(uint64_t value, unsigned width) { return (value & ~mask(width)) == 0; }

/// A bit width in 1..64. Variables in encodings use machine widths {8,16,32,64};
/// Extract can produce any width in between.
class Width {
  public:
    explicit Width(unsigned bits);
    [[nodiscard]] unsigned bits() const { return bits_; }
    [[nodiscard]] bool is_machine() const { return bits_ == 8 || bits_ == 16 || bits_ == 32 || bits_ == 64; }
    auto operator<=>(const Width&) const = default;

  private:
    unsigned bits_;
};

enum class Op : uint8_t { Const, Var, Add, Sub, Mul, Shl, LShr, AShr, Or, And, Not, ZeroExt, SignExt, Extract };

const char* op_name(Op op);

class Term {
  public:
    struct Node {
        Op op;
        unsigned width;
        uint64_t value = 0;   // Const
        std::string name;     // Var
        unsigned hi = 0;      // Extract
        unsigned lo = 0;      // Extract
        unsigned extra = 0;   // ZeroExt / SignExt
        std::vector<Term> kids;
    };

    explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    [[nodiscard]] Op op() const { return node_->op; }
    [[nodiscard]] unsigned width() const { return node_->width; }
    [[nodiscard]] uint64_t value() const { return node_->value; }
    [[nodiscard]] const std::string& name() const { return node_->name; }
    [[nodiscard]] unsigned hi() const { return node_->hi; }
    [[nodiscard]] unsigned lo() const { return node_->lo; }
    [[nodiscard]] unsigned extra() const { return node_->extra; }
    [[nodiscard]] const std::vector<Term>& kids() const { return node_->kids; }
    [[nodiscard]] const Term& kid(size_t i) const { return node_->kids.at(i); }
    [[nodiscard]] bool is_const() const { return op() == Op::Const; }
    [[nodiscard]] bool is_var() const { return op() == Op::Var; }

    /// Node identity, usable as a memo key.
    [[nodiscard]] const Node* id() const { return node_.get(); }

  private:
    std::shared_ptr<const Node> node_;
};

// Builders. Binary kinds require equal widths and throw BvError otherwise.
// A node whose children are all constants is folded to a constant.
Term constant(uint64_t value, unsigned width);
Term var(std::string name, unsigned width);
Term add(const Term& a, const Term& b);
Term sub(const Term& a, const Term& b);
Term mul(const Term& a, const Term& b);
Term shl(const Term& a, const Term& b);
Term lshr(const Term& a, const Term& b);
Term ashr(const Term& a, const Term& b);
Term bv_or(const Term& a, const Term& b);
Term bv_and(const Term& a, const Term& b);
Term bv_not(const Term& a);
Term neg(const Term& a);
Term zero_ext(unsigned extra, const Term& a);
Term sign_ext(unsigned extra, const Term& a);
Term extract(unsigned hi, unsigned lo, const Term& a);

/// Resize to `width` by truncation or extension.
Term resize(const Term& a, unsigned width, bool is_signed);

enum class Rel : uint8_t { Eq, Ne, Ult, Ule, Ugt, Uge };

const char* rel_name(Rel rel);

class Formula {
  public:
    enum class Kind : uint8_t { Atom, And, Or, Not };

    struct Node {
        Kind kind;
        Rel rel = Rel::Eq;
        std::optional<Term> lhs;
        std::optional<Term> rhs;
        std::vector<Formula> kids;
    };

    explicit Formula(std::shared_ptr<const Node> node);

    [[nodiscard]] Kind kind() const { return node_->kind; }
    [[nodiscard]] Rel rel() const { return node_->rel; }
    [[nodiscard]] const Term& lhs() const { return *node_->lhs; }
    [[nodiscard]] const Term& rhs() const { return *node_->rhs; }
    [[nodiscard]] const std::vector<Formula>& kids() const { return node_->kids; }
    [[nodiscard]] const std::map<std::string, unsigned>& free_vars() const { return *free_vars_; }
    [[nodiscard]] const Node* id() const { return node_.get(); }

  private:
    std::shared_ptr<const Node> node_;
    std::shared_ptr<const std::map<std::string, unsigned>> free_vars_;
};

Formula atom(Rel rel, const Term& lhs, const Term& rhs);
Formula conj(std::vector<Formula> kids);
Formula disj(std::vector<Formula> kids);
Formula negate(const Formula& f);
Formula truth();

inline Formula eq(const Term& a, const Term& b) { return atom(Rel::Eq, a, b); }
inline Formula ne(const Term& a, const Term& b) { return atom(Rel::Ne, a, b); }
inline Formula ult(const Term& a, const Term& b) { return atom(Rel::Ult, a, b); }
inline Formula ule(const Term& a, const Term& b) { return atom(Rel::Ule, a, b); }
inline Formula ugt(const Term& a, const Term& b) { return atom(Rel::Ugt, a, b); }
inline Formula uge(const Term& a, const Term& b) { return atom(Rel::Uge, a, b); }

/// Variable name to value. Every value must fit the width of its variable.
using Assignment = std::map<std::string, uint64_t>;

uint64_t eval_term(const Term& t, const Assignment& a);
bool eval_formula(const Formula& f, const Assignment& a);

/// Collects the variables of a term with their widths.
std::map<std::string, unsigned> term_vars(const Term& t);

/// Replaces bound variables by constants. Throws BvError when a binding names
/// a variable the formula does not have or does not fit its width.
Formula substitute(const Formula& f, const Assignment& bindings);
Term substitute(const Term& t, const Assignment& bindings);

/// Replaces variables by arbitrary terms of the same width.
Formula replace(const Formula& f, const std::map<std::string, Term>& by);
Term replace(const Term& t, const std::map<std::string, Term>& by);

/// Canonical prefix form, e.g. (sub sack_start#32 rcv_nxt#32).
std::string to_string(const Term& t);
std::string to_string(const Formula& f);

/// Zero-padded hex of `value` with width/4 digits (rounded up), e.g. 0x0000fff9.
std::string hex(uint64_t value, unsigned width);

} // namespace bvscan::bv
