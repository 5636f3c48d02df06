// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "bvscan/frontend.hpp"
#include "doctest.h"

using namespace bvscan::fe;

namespace {

const std::vector<std::string> fixture_names{"openbsd_sack",    "alloc_size", "cfe_resourceid",   "wolfssl_mldsa",
                                             "mosquitto_proxy_v2", "fprime_fpy", "openbsd_tcp_input"};

std::string read_fixture(const std::string& name) {
    std::ifstream in(std::string(BVSCAN_CORPUS_DIR) + "/" + name + "/source.c");
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<Tok> kinds(const std::vector<Token>& toks) {
    std::vector<Tok> out;
    for (const auto& t : toks) {
        out.push_back(t.kind);
    }
    return out;
}

void walk_expr(const Expr& e, const std::function<void(const Expr&)>& fn) {
    fn(e);
    for (const auto& k : e.kids) {
        walk_expr(*k, fn);
    }
}

void walk_stmts(const std::vector<StmtPtr>& body, const std::function<void(const Stmt&)>& fn) {
    for (const auto& s : body) {
        fn(*s);
        walk_stmts(s->body, fn);
        walk_stmts(s->else_body, fn);
    }
}

void walk_unit_exprs(const TranslationUnit& u, const std::function<void(const Expr&)>& fn) {
    for (const auto& f : u.functions) {
        walk_stmts(f.body, [&](const Stmt& s) {
            if (s.expr) {
                walk_expr(*s.expr, fn);
            }
            if (s.target) {
                walk_expr(*s.target, fn);
            }
        });
    }
}

const Expr& strip_implicit(const Expr& e) {
    return e.kind == ExprKind::Cast && e.implicit ? strip_implicit(e.kid(0)) : e;
}

// Random programs over a fixed set of typed parameters, built as source text.
class ProgramGen {
  public:
    explicit ProgramGen(uint64_t seed) : rng_(seed) {}

    std::string program() {
        std::string out = "struct S { uint16_t f; uint64_t g; };\n";
        out += "uint32_t helper(uint8_t a, int32_t b);\n";
        out += "int fn(uint8_t u8, int16_t s16, uint32_t u32, int32_t s32, uint64_t u64, int64_t s64, "
               "unsigned long ul, long sl, struct S *p, uint32_t arr[8]) {\n";
        const int stmts = 1 + pick(5);
        for (int i = 0; i < stmts; ++i) {
            out += "    " + statement(i) + "\n";
        }
        out += "    return " + expr(3) + ";\n}\n";
        return out;
    }

  private:
    int pick(int n) { return static_cast<int>(rng_() % static_cast<uint64_t>(n)); }

    std::string statement(int i) {
        const std::string name = "v" + std::to_string(i);
        switch (pick(5)) {
        case 0: return "uint32_t " + name + " = " + expr(3) + ";";
        case 1: return "u32 += " + expr(2) + ";";
        case 2: return "if (" + expr(2) + ") { s32 = " + expr(2) + "; } else return 1;";
        case 3: return "p->f = " + expr(2) + ";";
        default: return "while (u32) { u32 = u32 / 2; }";
        }
    }

    std::string expr(int depth) {
        if (depth == 0 || pick(4) == 0) {
            static const char* leaves[] = {"u8",  "s16", "u32",  "s32",      "u64",  "s64",   "ul",
                                           "sl",  "p->f", "p->g", "arr[u8]", "7",    "0x80000000",
                                           "3U",  "1UL", "sizeof(uint16_t)", "helper(u8, s32)"};
            return leaves[pick(static_cast<int>(std::size(leaves)))];
        }
        static const char* ops[] = {"+", "-", "*", "<<", ">>", "|", "&", "<", "<=", ">", ">=", "==", "!=", "&&"};
        switch (pick(6)) {
        case 0: return "-" + expr(depth - 1);
        case 1: return "~(" + expr(depth - 1) + ")";
        case 2: return "(uint16_t)(" + expr(depth - 1) + ")";
        default: return "(" + expr(depth - 1) + " " + ops[pick(static_cast<int>(std::size(ops)))] + " " + expr(depth - 1) + ")";
        }
    }

    std::mt19937_64 rng_;
};

} // namespace

TEST_CASE("tokenize: hex literal value") {
    const auto toks = tokenize("0x80000000");
    REQUIRE(toks.size() == 1);
    CHECK(toks[0].kind == Tok::IntLit);
    CHECK(toks[0].value == 2147483648u);
}

TEST_CASE("tokenize: empty input") { CHECK(tokenize("").empty()); }

TEST_CASE("tokenize: indexed shift") {
    const auto toks = tokenize("w1[j+5] << 30");
    CHECK(kinds(toks) == std::vector{Tok::Ident, Tok::LBracket, Tok::Ident, Tok::Plus, Tok::IntLit, Tok::RBracket,
                                     Tok::Shl, Tok::IntLit});
    CHECK(toks[4].value == 5);
    CHECK(toks[7].value == 30);
}

TEST_CASE("tokenize: comments and directives keep line numbers") {
    const auto toks = tokenize("#include <x.h>\n#define A \\\n  1\n/* c\n */ int // t\nx;", "f.c");
    REQUIRE(toks.size() == 3);
    CHECK(toks[0].text == "int");
    CHECK(toks[0].span.line == 5);
    CHECK(toks[0].span.column == 5);
    CHECK(toks[1].span.line == 6);
    CHECK(toks[1].span.str() == "f.c:6:1");
}

TEST_CASE("tokenize: literal suffixes and bases") {
    const auto toks = tokenize("10u 0x10UL 017 42LL 0");
    REQUIRE(toks.size() == 5);
    CHECK(toks[0].unsigned_suffix);
    CHECK(toks[1].value == 16);
    CHECK(toks[1].long_suffix == 1);
    CHECK(toks[2].value == 15);
    CHECK(toks[2].hex_or_octal);
    CHECK(toks[3].long_suffix == 2);
    CHECK(toks[4].value == 0);
}

TEST_CASE("tokenize: maximal munch on punctuation") {
    CHECK(kinds(tokenize("a<<=b->c>=d")) ==
          std::vector{Tok::Ident, Tok::ShlAssign, Tok::Ident, Tok::Arrow, Tok::Ident, Tok::Ge, Tok::Ident});
}

TEST_CASE("tokenize: errors carry a location") {
    CHECK_THROWS_AS(tokenize("int a = $;"), LexError);
    try {
        tokenize("x\n  @", "g.c");
        FAIL("expected LexError");
    } catch (const LexError& e) {
        CHECK(std::string(e.what()).rfind("g.c:2:3:", 0) == 0);
    }
    CHECK_THROWS_AS(tokenize("12abc"), LexError);
    CHECK_THROWS_AS(tokenize("/* open"), LexError);
    CHECK_THROWS_AS(tokenize("0x1ffffffffffffffff"), ParseError);
    CHECK(tokenize("0xffffffffffffffff")[0].value == UINT64_MAX);
}

TEST_CASE("tokenize: range annotations") {
    const auto toks = tokenize("/* @range w1 0 43 */ /* plain */");
    REQUIRE(toks.size() == 1);
    CHECK(toks[0].kind == Tok::Annotation);
}

TEST_CASE("parse: SACK hole test") {
    const auto unit = parse_unit(tokenize(read_fixture("openbsd_sack")));
    REQUIRE(unit.functions.size() == 2);
    const Function* f = unit.find_function("is_in_hole");
    REQUIRE(f != nullptr);
    REQUIRE(f->body.size() == 1);
    const Stmt& ret = *f->body[0];
    CHECK(ret.kind == StmtKind::Return);
    REQUIRE(ret.expr->kind == ExprKind::Binary);
    CHECK(ret.expr->bop == BinOp::LogAnd);
    CHECK(ret.expr->kid(0).kind == ExprKind::Call);
    CHECK(ret.expr->kid(1).kind == ExprKind::Call);
    CHECK(ret.expr->kid(0).name == "tcp_seq_lt");
    CHECK(unit.find_function("tcp_seq_lt")->is_static);
}

TEST_CASE("parse: trivial function") {
    const auto unit = parse_unit(tokenize("int f(void){return 0;}"));
    REQUIRE(unit.functions.size() == 1);
    CHECK(unit.functions[0].params.empty());
    REQUIRE(unit.functions[0].body.size() == 1);
    CHECK(unit.functions[0].body[0]->kind == StmtKind::Return);
}

TEST_CASE("parse: guard multiplication in the F Prime fixture") {
    const auto unit = parse_unit(tokenize(read_fixture("fprime_fpy")));
    const Function* f = unit.find_function("equality_directive");
    REQUIRE(f != nullptr);
    const Stmt& guard = *f->body.at(0);
    REQUIRE(guard.kind == StmtKind::If);
    const Expr& cond = *guard.expr;
    CHECK(cond.bop == BinOp::Lt);
    const Expr& mul = cond.kid(1);
    REQUIRE(mul.kind == ExprKind::Binary);
    CHECK(mul.bop == BinOp::Mul);
    CHECK(mul.kid(0).kind == ExprKind::Call);
    CHECK(mul.kid(0).name == "get_size");
    CHECK(mul.kid(0).receiver == "directive");
    CHECK(mul.kid(1).kind == ExprKind::IntLiteral);
    CHECK(mul.kid(1).value == 2);
}

TEST_CASE("parse: compound assignment is desugared") {
    const auto unit = parse_unit(tokenize("void f(unsigned x) { x -= 3; }"));
    const Stmt& s = *unit.functions[0].body[0];
    REQUIRE(s.kind == StmtKind::Assign);
    CHECK(s.expr->bop == BinOp::Sub);
    CHECK(s.expr->kid(0).name == "x");
    CHECK(s.target->name == "x");
}

TEST_CASE("parse: C precedence") {
    const auto unit = parse_unit(tokenize("int f(int a, int b, int c) { return a + b * c << 2 < a & b | c && a; }"));
    CHECK(print_expr(*unit.functions[0].body[0]->expr) == "((((((a + (b * c)) << 2) < a) & b) | c) && a)");
}

TEST_CASE("parse: unsupported constructs become skipped regions") {
    const std::string src = "int g;\n"
                            "int f(unsigned n) {\n"
                            "    unsigned t = n / 2;\n"
                            "    for (n = 0; n < 4; n = n + 1) { t = t + 1; }\n"
                            "    n++;\n"
                            "    return n;\n"
                            "}\n";
    const auto unit = parse_unit(tokenize(src));
    REQUIRE(unit.skipped.size() == 4);
    CHECK(unit.skipped[0].function.empty());
    CHECK(unit.skipped[0].reason == "file-scope variable");
    CHECK(unit.skipped[1].reason == "division");
    CHECK(unit.skipped[1].function == "f");
    CHECK(unit.skipped[2].reason == "loop");
    CHECK(unit.skipped[2].span.line == 4);
    CHECK(unit.skipped[3].reason == "increment or decrement");
    const auto& body = unit.functions.at(0).body;
    REQUIRE(body.size() == 4);
    CHECK(body[3]->kind == StmtKind::Return);
}

TEST_CASE("parse: malformed subset syntax is an error") {
    CHECK_THROWS_AS(parse_unit(tokenize("int f( { }")), ParseError);
    CHECK_THROWS_AS(parse_unit(tokenize("int f(void) { return 1 }")), ParseError);
    CHECK_THROWS_AS(parse_unit(tokenize("int f(void) { return 1;")), ParseError);
    CHECK_THROWS_AS(parse_unit(tokenize("int f(void) {} int f(void) {}")), ParseError);
    CHECK_THROWS_AS(parse_unit(tokenize("int f(void) { 3 = 4; }")), ParseError);
    CHECK_THROWS_AS(parse_unit(tokenize("/* @range x 5 */")), ParseError);
}

TEST_CASE("resolve: unsigned long follows the data model") {
    const std::string src = "unsigned long f(unsigned long long x) { return (unsigned long)x; }";
    const auto ilp = load_source(src, "a.c", DataModel::ilp32());
    const auto lp = load_source(src, "a.c", DataModel::lp64());
    const Expr& cast_ilp = strip_implicit(*ilp.functions[0].body[0]->expr);
    const Expr& cast_lp = strip_implicit(*lp.functions[0].body[0]->expr);
    REQUIRE(cast_ilp.kind == ExprKind::Cast);
    CHECK(cast_ilp.type->width == 32);
    CHECK(cast_lp.type->width == 64);
    CHECK_FALSE(cast_ilp.type->is_signed);
    CHECK(cast_ilp.type->name == "unsigned long");
}

TEST_CASE("resolve: sword32 shift is signed 32-bit") {
    const auto unit = load_source("word32 f(const sword32 w1[], unsigned int j) { return w1[j+5] << 30; }", "w.c",
                                  DataModel::ilp32());
    const Expr& shift = strip_implicit(*unit.functions[0].body[0]->expr);
    REQUIRE(shift.kind == ExprKind::Binary);
    CHECK(shift.bop == BinOp::Shl);
    CHECK(shift.type->width == 32);
    CHECK(shift.type->is_signed);
    CHECK(shift.kid(0).type->name == "sword32");
}

TEST_CASE("resolve: integer promotion and usual conversions") {
    const auto unit = load_source("uint32_t f(uint16_t a, uint16_t b, uint32_t c, int64_t d) {\n"
                                  "    int x = a - b;\n"
                                  "    uint32_t y = c - 1;\n"
                                  "    int64_t z = c + d;\n"
                                  "    return sizeof(uint8_t) * 3;\n"
                                  "}",
                                  "p.c", DataModel::ilp32());
    const auto& body = unit.functions[0].body;
    const Expr& x = *body[0]->expr;
    CHECK(x.type->width == 32);
    CHECK(x.type->is_signed);
    CHECK(x.kid(0).kind == ExprKind::Cast);
    CHECK(x.kid(0).implicit);
    const Expr& y = *body[1]->expr;
    CHECK_FALSE(y.type->is_signed);
    CHECK(y.kid(1).kind == ExprKind::Cast); // int literal converted to unsigned
    const Expr& z = *body[2]->expr;
    CHECK(z.type->width == 64);
    CHECK(z.type->is_signed);
    const Expr& r = *body[3]->expr;
    CHECK(r.kid(0).value == 1);
    CHECK_FALSE(r.type->is_signed);
}

TEST_CASE("resolve: literal typing") {
    const auto unit = load_source("int f(void) { return 2147483647 + 0x80000000 + 2147483648 + 5U; }", "l.c",
                                  DataModel::ilp32());
    std::vector<IntType> lits;
    walk_unit_exprs(unit, [&](const Expr& e) {
        if (e.kind == ExprKind::IntLiteral) {
            lits.push_back(*e.type);
        }
    });
    REQUIRE(lits.size() == 4);
    CHECK(lits[0] == IntType{32, true});
    CHECK(lits[1] == IntType{32, false}); // hex falls through to unsigned int
    CHECK(lits[2] == IntType{64, true});  // decimal skips unsigned: long long under ILP32
    CHECK(lits[3] == IntType{32, false});
}

TEST_CASE("resolve: struct members, typedefs and sizeof") {
    const auto unit = load_source("typedef uint32_t tcp_seq;\n"
                                  "struct tcpcb { tcp_seq rcv_nxt; uint8_t pad; uint64_t wide; };\n"
                                  "int f(struct tcpcb *tp) { return tp->rcv_nxt + sizeof(struct tcpcb); }",
                                  "s.c", DataModel::ilp32());
    const Expr& sum = strip_implicit(*unit.functions[0].body[0]->expr);
    CHECK(sum.kid(0).type->name == "tcp_seq");
    CHECK(strip_implicit(sum.kid(1)).value == 16);
}

TEST_CASE("resolve: errors") {
    CHECK_THROWS_AS(load_source("int f(void) { return y; }", "e.c", DataModel::ilp32()), TypeError);
    CHECK_THROWS_AS(load_source("int f(void) { return g(1); }", "e.c", DataModel::ilp32()), TypeError);
    CHECK_THROWS_AS(load_source("int f(mystery_t x) { return 0; }", "e.c", DataModel::ilp32()), TypeError);
    CHECK_THROWS_AS(load_source("struct A { int x; }; int f(struct A *a) { return a->y; }", "e.c", DataModel::ilp32()),
                    TypeError);
    CHECK_THROWS_AS(DataModel::from_label("ilp16"), std::invalid_argument);
    CHECK(DataModel::from_label("lp64").long_width == 64);
    CHECK(DataModel::from_label("ILP32").long_width == 32);
}

TEST_CASE("resolve leaves the input unit untouched") {
    const auto parsed = parse_unit(tokenize("int f(uint8_t a) { return a + 1; }"));
    const std::string before = dump_ast(parsed);
    const auto resolved = resolve_types(parsed, DataModel::ilp32());
    CHECK(dump_ast(parsed) == before);
    CHECK(dump_ast(resolved) != before);
}

TEST_CASE("corpus fixtures parse with no skipped regions") {
    for (const auto& name : fixture_names) {
        CAPTURE(name);
        for (const auto& model : {DataModel::ilp32(), DataModel::lp64()}) {
            const auto unit = load_source(read_fixture(name), name + ".c", model);
            CHECK(unit.skipped.empty());
            CHECK_FALSE(unit.functions.empty());
        }
    }
}

TEST_CASE("round trip: print then reparse is structurally identical") {
    auto check_round_trip = [](const std::string& src) {
        const auto unit = parse_unit(tokenize(src));
        const std::string printed = print_unit(unit);
        const auto again = parse_unit(tokenize(printed));
        CAPTURE(src);
        CAPTURE(printed);
        REQUIRE(dump_ast(again) == dump_ast(unit));
        // Printing a resolved unit hides the implicit conversions.
        const auto resolved = resolve_types(unit, DataModel::ilp32());
        REQUIRE(dump_ast(parse_unit(tokenize(print_unit(resolved)))) == dump_ast(unit));
    };
    for (const auto& name : fixture_names) {
        check_round_trip(read_fixture(name));
    }
    ProgramGen gen(2024);
    for (int i = 0; i < 300; ++i) {
        check_round_trip(gen.program());
    }
}

TEST_CASE("spans lie within the source text") {
    ProgramGen gen(7);
    std::vector<std::string> sources;
    for (const auto& name : fixture_names) {
        sources.push_back(read_fixture(name));
    }
    for (int i = 0; i < 100; ++i) {
        sources.push_back(gen.program());
    }
    for (const auto& src : sources) {
        const auto unit = load_source(src, "x.c", DataModel::lp64());
        auto in_bounds = [&](const SourceSpan& s) {
            CHECK(s.line >= 1);
            CHECK(s.column >= 1);
            CHECK(s.length >= 1);
            CHECK(s.offset + s.length <= src.size());
        };
        walk_unit_exprs(unit, [&](const Expr& e) { in_bounds(e.span); });
        for (const auto& f : unit.functions) {
            in_bounds(f.span);
            walk_stmts(f.body, [&](const Stmt& s) { in_bounds(s.span); });
        }
        for (const auto& s : unit.skipped) {
            in_bounds(s.span);
        }
    }
}

TEST_CASE("every arithmetic binary has equal operand widths after resolution") {
    ProgramGen gen(31);
    int checked = 0;
    for (int i = 0; i < 400; ++i) {
        const std::string src = gen.program();
        for (const auto& model : {DataModel::ilp32(), DataModel::lp64()}) {
            const auto unit = load_source(src, "r.c", model);
            walk_unit_exprs(unit, [&](const Expr& e) {
                REQUIRE(e.type.has_value());
                if (e.kind == ExprKind::Binary && e.bop != BinOp::LogAnd) {
                    CAPTURE(src);
                    CHECK(e.kid(0).type->width == e.kid(1).type->width);
                    if (is_arithmetic(e.bop)) {
                        CHECK(e.type->width == e.kid(0).type->width);
                        CHECK(e.type->width >= model.int_width);
                    }
                    ++checked;
                }
            });
        }
    }
    CHECK(checked > 1000);
}
