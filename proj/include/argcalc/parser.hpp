#ifndef ARGCALC_PARSER_HPP
#define ARGCALC_PARSER_HPP

#include <string>
#include <string_view>
#include <vector>

#include "argcalc/errors.hpp"
#include "argcalc/formula.hpp"

namespace argcalc {

namespace detail {

enum class Tok : std::uint8_t {
    ident, lit_true, lit_false, bang, amp, pipe, arrow, darrow, lparen, rparen, end
};

struct Token {
    Tok kind;
    std::string_view text;
    int line;
    int column;
};

class Lexer {
public:
    Lexer(std::string_view src, int start_line = 1)
        : src_(src), line_(start_line) {}

    Token next() {
        skip_trivia();
        int line = line_, col = column();
        if (pos_ >= src_.size())
            return {Tok::end, {}, line, col};
        char c = src_[pos_];
        switch (c) {
        case '!': ++pos_; return {Tok::bang, src_.substr(pos_ - 1, 1), line, col};
        case '&': ++pos_; return {Tok::amp, src_.substr(pos_ - 1, 1), line, col};
        case '|': ++pos_; return {Tok::pipe, src_.substr(pos_ - 1, 1), line, col};
        case '(': ++pos_; return {Tok::lparen, src_.substr(pos_ - 1, 1), line, col};
        case ')': ++pos_; return {Tok::rparen, src_.substr(pos_ - 1, 1), line, col};
        case '<':
            if (src_.substr(pos_, 3) == "<=>") {
                pos_ += 3;
                return {Tok::darrow, src_.substr(pos_ - 3, 3), line, col};
            }
            throw ParseError("stray '<'", line, col);
        case '=':
            if (src_.substr(pos_, 2) == "=>") {
                pos_ += 2;
                return {Tok::arrow, src_.substr(pos_ - 2, 2), line, col};
            }
            throw ParseError("stray '='", line, col);
        default:
            break;
        }
        if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size()) {
                char d = src_[pos_];
                bool word = (d >= 'A' && d <= 'Z') || (d >= 'a' && d <= 'z') ||
                            (d >= '0' && d <= '9') || d == '_';
                if (!word)
                    break;
                ++pos_;
            }
            std::string_view word = src_.substr(start, pos_ - start);
            if (word == "true")
                return {Tok::lit_true, word, line, col};
            if (word == "false")
                return {Tok::lit_false, word, line, col};
            return {Tok::ident, word, line, col};
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }

private:
    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                ++line_;
                line_start_ = ++pos_;
            } else if (c == ' ' || c == '\t' || c == '\r') {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n')
                    ++pos_;
            } else {
                break;
            }
        }
    }

    int column() const { return static_cast<int>(pos_ - line_start_) + 1; }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_start_ = 0;
    int line_;
};

// Recursive descent over: iff <- imp ('<=>' iff)?; imp <- or ('=>' imp)?;
// or <- and ('|' and)*; and <- unary ('&' unary)*.  Raw constructors keep
// the parse tree intact so printing round-trips.
class FormulaParser {
public:
    FormulaParser(const Context& ctx, std::string_view src, int start_line = 1)
        : ctx_(ctx), lexer_(src, start_line) {
        advance();
    }

    Formula parse_whole() {
        Formula f = parse_iff();
        expect(Tok::end, "end of formula");
        return f;
    }

private:
    void advance() { tok_ = lexer_.next(); }

    void expect(Tok k, const char* what) {
        if (tok_.kind != k)
            throw ParseError(std::string("expected ") + what, tok_.line, tok_.column);
    }

    Formula parse_iff() {
        Formula l = parse_imp();
        if (tok_.kind == Tok::darrow) {
            advance();
            return ctx_.raw_iff(l, parse_iff());
        }
        return l;
    }

    Formula parse_imp() {
        Formula l = parse_or();
        if (tok_.kind == Tok::arrow) {
            advance();
            return ctx_.raw_implies(l, parse_imp());
        }
        return l;
    }

    Formula parse_or() {
        Formula l = parse_and();
        while (tok_.kind == Tok::pipe) {
            advance();
            l = ctx_.raw_or(l, parse_and());
        }
        return l;
    }

    Formula parse_and() {
        Formula l = parse_unary();
        while (tok_.kind == Tok::amp) {
            advance();
            l = ctx_.raw_and(l, parse_unary());
        }
        return l;
    }

    Formula parse_unary() {
        if (tok_.kind == Tok::bang) {
            advance();
            return ctx_.raw_not(parse_unary());
        }
        return parse_atom();
    }

    Formula parse_atom() {
        switch (tok_.kind) {
        case Tok::lit_true:
            advance();
            return ctx_.constant(true);
        case Tok::lit_false:
            advance();
            return ctx_.constant(false);
        case Tok::ident: {
            auto v = ctx_.lookup(tok_.text);
            if (!v)
                throw ParseError("undeclared variable '" + std::string(tok_.text) + "'",
                                 tok_.line, tok_.column);
            advance();
            return ctx_.variable(*v);
        }
        case Tok::lparen: {
            advance();
            Formula f = parse_iff();
            expect(Tok::rparen, "')'");
            advance();
            return f;
        }
        default:
            throw ParseError("expected a formula", tok_.line, tok_.column);
        }
    }

    const Context& ctx_;
    Lexer lexer_;
    Token tok_;
};

} // namespace detail

// Parses one formula; all variables must already be declared in ctx.
inline Formula parse_formula(const Context& ctx, std::string_view text, int start_line = 1) {
    detail::FormulaParser p(ctx, text, start_line);
    return p.parse_whole();
}

} // namespace argcalc

#endif
