// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include <sstream>

#include "bvscan/frontend.hpp"

namespace bvscan::fe {

namespace {

const char* unop_text(UnOp op) {
    switch (op) {
    case UnOp::Neg: return "-";
    case UnOp::LogNot: return "!";
    case UnOp::BitNot: return "~";
    }
    return "?";
}

std::string spec_text(const TypeSpec& t) { return t.spelling + std::string(t.pointer_depth, '*'); }

std::string declarator(const TypeSpec& t, const std::string& name, const std::vector<uint64_t>& dims) {
    std::string out = t.spelling + " " + std::string(t.pointer_depth, '*') + name;
    for (const uint64_t d : dims) {
        out += d == 0 ? "[]" : "[" + std::to_string(d) + "]";
    }
    return out;
}

std::string literal_text(const Expr& e) {
    if (e.sizeof_type) {
        return "sizeof(" + spec_text(*e.sizeof_type) + ")";
    }
    if (e.literal) {
        return e.literal->text;
    }
    return std::to_string(e.value) + (e.value > 0x7fffffffffffffffULL ? "ULL" : "");
}

class UnitPrinter {
  public:
    std::string run(const TranslationUnit& u) {
        for (const auto& a : u.annotations) {
            out_ << "/* @range " << a.name << " " << a.lo << " " << a.hi << " */\n";
        }
        for (const auto& t : u.typedefs) {
            out_ << "typedef " << declarator(t.type, t.name, {}) << ";\n";
        }
        for (const auto& s : u.structs) {
            out_ << "struct " << s.name << " {\n";
            for (const auto& f : s.fields) {
                out_ << "    " << declarator(f.type, f.name, f.dims) << ";\n";
            }
            out_ << "};\n";
        }
        for (const auto& f : u.prototypes) {
            out_ << signature(f) << ";\n";
        }
        for (const auto& s : u.skipped) {
            if (s.function.empty()) {
                out_ << s.raw << "\n";
            }
        }
        for (const auto& f : u.functions) {
            out_ << "\n" << signature(f) << " {\n";
            for (const auto& s : f.body) {
                stmt(*s, 1);
            }
            out_ << "}\n";
        }
        return out_.str();
    }

  private:
    static std::string signature(const Function& f) {
        std::string out;
        if (f.is_static) {
            out += "static ";
        }
        if (f.is_inline) {
            out += "inline ";
        }
        out += declarator(f.return_type, f.name, {}) + "(";
        if (f.params.empty()) {
            out += "void";
        }
        for (size_t i = 0; i < f.params.size(); ++i) {
            const auto& p = f.params[i];
            out += (i == 0 ? "" : ", ") + declarator(p.type, p.name, p.dims);
        }
        return out + ")";
    }

    void indent(int depth) { out_ << std::string(static_cast<size_t>(depth) * 4, ' '); }

    void branch(const std::vector<StmtPtr>& body, int depth) {
        if (body.size() == 1 && body[0]->kind == StmtKind::Block) {
            out_ << " {\n";
            for (const auto& s : body[0]->body) {
                stmt(*s, depth + 1);
            }
            indent(depth);
            out_ << "}";
            return;
        }
        if (body.empty()) {
            out_ << " ;";
            return;
        }
        out_ << "\n";
        for (const auto& s : body) {
            stmt(*s, depth + 1);
        }
        indent(depth);
    }

    void stmt(const Stmt& s, int depth) {
        indent(depth);
        switch (s.kind) {
        case StmtKind::Decl:
            out_ << declarator(s.decl_type, s.name, s.dims);
            if (s.expr) {
                out_ << " = " << print_expr(*s.expr);
            }
            out_ << ";\n";
            break;
        case StmtKind::Assign: out_ << print_expr(*s.target) << " = " << print_expr(*s.expr) << ";\n"; break;
        case StmtKind::ExprStmt: out_ << print_expr(*s.expr) << ";\n"; break;
        case StmtKind::Return: out_ << "return" << (s.expr ? " " + print_expr(*s.expr) : "") << ";\n"; break;
        case StmtKind::Skipped: out_ << s.raw << "\n"; break;
        case StmtKind::Block:
            out_ << "{\n";
            for (const auto& k : s.body) {
                stmt(*k, depth + 1);
            }
            indent(depth);
            out_ << "}\n";
            break;
        case StmtKind::If: {
            out_ << "if (" << print_expr(*s.expr) << ")";
            const bool braced = s.body.size() == 1 && s.body[0]->kind == StmtKind::Block;
            branch(s.body, depth);
            if (s.has_else) {
                out_ << (braced ? " else" : "else");
                branch(s.else_body, depth);
                const bool else_braced = s.else_body.size() == 1 && s.else_body[0]->kind == StmtKind::Block;
                out_ << (else_braced || s.else_body.empty() ? "\n" : "");
            } else {
                out_ << (braced || s.body.empty() ? "\n" : "");
            }
            break;
        }
        }
    }

    std::ostringstream out_;
};

std::string type_tag(const Expr& e) {
    if (!e.type) {
        return "";
    }
    return std::string(" :") + (e.type->is_signed ? "s" : "u") + std::to_string(e.type->width);
}

void dump_stmt(std::ostringstream& out, const Stmt& s);

void dump_body(std::ostringstream& out, const std::vector<StmtPtr>& body) {
    out << "(";
    for (size_t i = 0; i < body.size(); ++i) {
        out << (i == 0 ? "" : " ");
        dump_stmt(out, *body[i]);
    }
    out << ")";
}

std::string dims_text(const std::vector<uint64_t>& dims) {
    std::string out;
    for (const uint64_t d : dims) {
        out += "[" + std::to_string(d) + "]";
    }
    return out;
}

void dump_stmt(std::ostringstream& out, const Stmt& s) {
    switch (s.kind) {
    case StmtKind::Decl:
        out << "(decl " << spec_text(s.decl_type) << " " << s.name << dims_text(s.dims);
        if (s.expr) {
            out << " " << dump_expr(*s.expr);
        }
        out << ")";
        break;
    case StmtKind::Assign: out << "(assign " << dump_expr(*s.target) << " " << dump_expr(*s.expr) << ")"; break;
    case StmtKind::ExprStmt: out << "(expr " << dump_expr(*s.expr) << ")"; break;
    case StmtKind::Return: out << "(return" << (s.expr ? " " + dump_expr(*s.expr) : "") << ")"; break;
    case StmtKind::Block:
        out << "(block ";
        dump_body(out, s.body);
        out << ")";
        break;
    case StmtKind::If:
        out << "(if " << dump_expr(*s.expr) << " ";
        dump_body(out, s.body);
        if (s.has_else) {
            out << " else ";
            dump_body(out, s.else_body);
        }
        out << ")";
        break;
    case StmtKind::Skipped: out << "(skipped \"" << s.reason << "\" \"" << s.raw << "\")"; break;
    }
}

} // namespace

std::string print_expr(const Expr& e) {
    switch (e.kind) {
    case ExprKind::IntLiteral: return literal_text(e);
    case ExprKind::Var: return e.name;
    case ExprKind::Binary:
        return "(" + print_expr(e.kid(0)) + " " + binop_text(e.bop) + " " + print_expr(e.kid(1)) + ")";
    case ExprKind::Unary: return std::string("(") + unop_text(e.uop) + print_expr(e.kid(0)) + ")";
    case ExprKind::Cast:
        if (e.implicit) {
            return print_expr(e.kid(0));
        }
        return "((" + spec_text(e.cast_spec) + ")" + print_expr(e.kid(0)) + ")";
    case ExprKind::Call: {
        std::string out = e.receiver.empty() ? e.name : e.receiver + (e.arrow ? "->" : ".") + e.name;
        out += "(";
        for (size_t i = 0; i < e.kids.size(); ++i) {
            out += (i == 0 ? "" : ", ") + print_expr(*e.kids[i]);
        }
        return out + ")";
    }
    case ExprKind::Index: return print_expr(e.kid(0)) + "[" + print_expr(e.kid(1)) + "]";
    case ExprKind::Member: return print_expr(e.kid(0)) + (e.arrow ? "->" : ".") + e.name;
    }
    return "?";
}

std::string print_unit(const TranslationUnit& unit) { return UnitPrinter().run(unit); }

std::string dump_expr(const Expr& e) {
    std::string out;
    switch (e.kind) {
    case ExprKind::IntLiteral:
        out = e.sizeof_type && !e.type ? "(sizeof " + spec_text(*e.sizeof_type) : "(lit " + std::to_string(e.value);
        break;
    case ExprKind::Var: out = "(var " + e.name; break;
    case ExprKind::Binary: out = std::string("(") + binop_text(e.bop); break;
    case ExprKind::Unary: out = std::string("(") + (e.uop == UnOp::Neg ? "neg" : e.uop == UnOp::LogNot ? "lnot" : "bnot"); break;
    case ExprKind::Cast: out = (e.implicit ? "(icast " : "(cast ") + spec_text(e.cast_spec); break;
    case ExprKind::Call: out = "(call " + (e.receiver.empty() ? "" : e.receiver + (e.arrow ? "->" : ".")) + e.name; break;
    case ExprKind::Index: out = "(index"; break;
    case ExprKind::Member: out = std::string("(member ") + (e.arrow ? "->" : ".") + e.name; break;
    }
    out += type_tag(e);
    for (const auto& k : e.kids) {
        out += " " + dump_expr(*k);
    }
    return out + ")";
}

std::string dump_ast(const TranslationUnit& unit) {
    std::ostringstream out;
    for (const auto& a : unit.annotations) {
        out << "(range " << a.name << " " << a.lo << " " << a.hi << ")\n";
    }
    for (const auto& t : unit.typedefs) {
        out << "(typedef " << t.name << " " << spec_text(t.type) << ")\n";
    }
    for (const auto& s : unit.structs) {
        out << "(struct " << s.name;
        for (const auto& f : s.fields) {
            out << " (" << spec_text(f.type) << " " << f.name << dims_text(f.dims) << ")";
        }
        out << ")\n";
    }
    auto function = [&](const Function& f, const char* tag) {
        out << "(" << tag << " " << (f.is_static ? "static " : "") << (f.is_inline ? "inline " : "")
            << spec_text(f.return_type) << " " << f.name << " (";
        for (size_t i = 0; i < f.params.size(); ++i) {
            const auto& p = f.params[i];
            out << (i == 0 ? "" : " ") << "(" << spec_text(p.type) << " " << p.name << dims_text(p.dims) << ")";
        }
        out << ")";
        if (f.has_body) {
            out << " ";
            dump_body(out, f.body);
        }
        out << ")\n";
    };
    for (const auto& f : unit.prototypes) {
        function(f, "proto");
    }
    for (const auto& s : unit.skipped) {
        out << "(skipped-region \"" << s.function << "\" \"" << s.reason << "\" \"" << s.raw << "\")\n";
    }
    for (const auto& f : unit.functions) {
        function(f, "function");
    }
    return out.str();
}

} // namespace bvscan::fe
