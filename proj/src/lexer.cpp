// Copyright (c) bvscan contributors.
// SPDX-License-Identifier: MIT
#include <cctype>
#include <set>
#include <sstream>

#include "bvscan/frontend.hpp"

namespace bvscan::fe {

namespace {

const std::set<std::string>& keywords() {
    static const std::set<std::string> k{
        "if",     "else",  "return", "static", "inline",   "const",  "extern", "volatile", "int",
        "unsigned", "signed", "char", "short",  "long",    "void",   "typedef", "sizeof",  "struct",
        "while",  "for",   "do",     "switch", "goto",     "break",  "continue", "case",   "default",
    };
    return k;
}

struct Punct {
    const char* text;
    Tok kind;
};

// Longest spellings first so a prefix scan finds the maximal munch.
constexpr Punct puncts[] = {
    {"<<=", Tok::ShlAssign}, {">>=", Tok::ShrAssign}, {"->", Tok::Arrow},        {"++", Tok::PlusPlus},
    {"--", Tok::MinusMinus}, {"<<", Tok::Shl},        {">>", Tok::Shr},          {"<=", Tok::Le},
    {">=", Tok::Ge},         {"==", Tok::EqEq},       {"!=", Tok::Ne},           {"&&", Tok::AndAnd},
    {"||", Tok::OrOr},       {"+=", Tok::PlusAssign}, {"-=", Tok::MinusAssign},  {"*=", Tok::StarAssign},
    {"/=", Tok::SlashAssign}, {"%=", Tok::PercentAssign}, {"&=", Tok::AmpAssign}, {"|=", Tok::PipeAssign},
    {"^=", Tok::CaretAssign}, {"(", Tok::LParen},     {")", Tok::RParen},        {"{", Tok::LBrace},
    {"}", Tok::RBrace},      {"[", Tok::LBracket},    {"]", Tok::RBracket},      {";", Tok::Semi},
    {",", Tok::Comma},       {".", Tok::Dot},         {"?", Tok::Question},      {":", Tok::Colon},
    {"+", Tok::Plus},        {"-", Tok::Minus},       {"*", Tok::Star},          {"/", Tok::Slash},
    {"%", Tok::Percent},     {"&", Tok::Amp},         {"|", Tok::Pipe},          {"^", Tok::Caret},
    {"~", Tok::Tilde},       {"!", Tok::Bang},        {"<", Tok::Lt},            {">", Tok::Gt},
    {"=", Tok::Assign},
};

class Lexer {
  public:
    Lexer(const std::string& src, std::string file) : src_(src), file_(std::move(file)) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        bool line_start = true;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\n') {
                advance();
                line_start = true;
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
                advance();
                continue;
            }
            if (c == '#' && line_start) {
                skip_directive();
                continue;
            }
            line_start = false;
            if (c == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') {
                    advance();
                }
                continue;
            }
            if (c == '/' && peek(1) == '*') {
                block_comment(out);
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                out.push_back(identifier());
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                out.push_back(number());
                continue;
            }
            out.push_back(punct());
        }
        return out;
    }

  private:
    [[nodiscard]] char peek(size_t ahead) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    [[nodiscard]] SourceSpan here(uint32_t length = 1) const {
        return SourceSpan{file_, line_, col_, length, static_cast<uint32_t>(pos_)};
    }

    void skip_directive() {
        while (pos_ < src_.size()) {
            if (src_[pos_] == '\\' && peek(1) == '\n') {
                advance();
                advance();
                continue;
            }
            if (src_[pos_] == '\n') {
                return;
            }
            advance();
        }
    }

    void block_comment(std::vector<Token>& out) {
        const SourceSpan start = here(2);
        const size_t begin = pos_;
        advance();
        advance();
        while (pos_ < src_.size() && !(src_[pos_] == '*' && peek(1) == '/')) {
            advance();
        }
        if (pos_ >= src_.size()) {
            throw LexError(start, "unterminated comment");
        }
        advance();
        advance();
        const std::string body = src_.substr(begin + 2, pos_ - begin - 4);
        std::istringstream words(body);
        std::string tag;
        words >> tag;
        if (tag == "@range") {
            SourceSpan span = start;
            span.length = static_cast<uint32_t>(pos_ - begin);
            out.push_back(Token{.kind = Tok::Annotation, .text = body, .span = span});
        }
    }

    Token identifier() {
        const SourceSpan start = here();
        const size_t begin = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            advance();
        }
        Token t{.kind = Tok::Ident, .text = src_.substr(begin, pos_ - begin), .span = start};
        t.span.length = static_cast<uint32_t>(pos_ - begin);
        if (keywords().count(t.text) != 0) {
            t.kind = Tok::Keyword;
        }
        return t;
    }

    Token number() {
        const SourceSpan start = here();
        const size_t begin = pos_;
        unsigned base = 10;
        if (src_[pos_] == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
            base = 16;
            advance();
            advance();
        } else if (src_[pos_] == '0' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
            base = 8;
        }
        const size_t digits_begin = pos_;
        uint64_t value = 0;
        bool overflow = false;
        while (pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_]))) {
            const char d = static_cast<char>(std::tolower(static_cast<unsigned char>(src_[pos_])));
            const unsigned digit = d >= 'a' ? static_cast<unsigned>(d - 'a' + 10) : static_cast<unsigned>(d - '0');
            if (digit >= base) {
                break;
            }
            if (value > (UINT64_MAX - digit) / base) {
                overflow = true;
            }
            value = value * base + digit;
            advance();
        }
        if (pos_ == digits_begin) {
            throw LexError(start, "malformed integer literal");
        }
        Token t{.kind = Tok::IntLit, .span = start, .value = value, .hex_or_octal = base != 10};
        while (pos_ < src_.size()) {
            const char s = src_[pos_];
            if ((s == 'u' || s == 'U') && !t.unsigned_suffix) {
                t.unsigned_suffix = true;
            } else if ((s == 'l' || s == 'L') && t.long_suffix < 2) {
                ++t.long_suffix;
            } else {
                break;
            }
            advance();
        }
        if (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            throw LexError(here(), "invalid suffix on integer literal");
        }
        t.text = src_.substr(begin, pos_ - begin);
        t.span.length = static_cast<uint32_t>(pos_ - begin);
        if (overflow) {
            throw ParseError(t.span, "integer literal '" + t.text + "' does not fit in 64 bits");
        }
        return t;
    }

    Token punct() {
        for (const auto& p : puncts) {
            const std::string_view text(p.text);
            if (src_.compare(pos_, text.size(), text) == 0) {
                Token t{.kind = p.kind, .text = std::string(text), .span = here(static_cast<uint32_t>(text.size()))};
                for (size_t i = 0; i < text.size(); ++i) {
                    advance();
                }
                return t;
            }
        }
        const unsigned char c = static_cast<unsigned char>(src_[pos_]);
        std::ostringstream msg;
        msg << "illegal character ";
        if (std::isprint(c)) {
            msg << '\'' << src_[pos_] << '\'';
        } else {
            msg << "0x" << std::hex << static_cast<unsigned>(c);
        }
        throw LexError(here(), msg.str());
    }

    const std::string& src_;
    std::string file_;
    size_t pos_ = 0;
    uint32_t line_ = 1;
    uint32_t col_ = 1;
};

} // namespace

const char* tok_name(Tok t) {
    switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Keyword: return "keyword";
    case Tok::IntLit: return "integer literal";
    case Tok::Annotation: return "annotation";
    default: break;
    }
    for (const auto& p : puncts) {
        if (p.kind == t) {
            return p.text;
        }
    }
    return "?";
}

std::vector<Token> tokenize(const std::string& source, const std::string& file) { return Lexer(source, file).run(); }

} // namespace bvscan::fe
