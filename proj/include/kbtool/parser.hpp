#pragma once

// Text format for knowledge bases:
//
//   # comment
//   var v1 in 1..5;
//   var v2 in {1, 3, 5};
//   constraint c1: v1 = 3 -> v2 > 1;
//
// Connectives by loosening precedence: comparisons, "not", "and", "or",
// then "->" / "<-" (right-associative; the two arrows cannot be chained
// together without parentheses). Comparison right-hand sides are integer
// literals or variable names.

#include <charconv>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kb.hpp"

namespace kbtool {

enum class ParseErrorKind { Syntax, UnknownVariable, DuplicateId, EmptyDomain };

struct ParseError {
    int line = 0;
    int column = 0;
    std::string message;
    ParseErrorKind kind = ParseErrorKind::Syntax;
};

inline std::string to_string(const ParseError& e) {
    std::ostringstream os;
    os << "line " << e.line << ", col " << e.column << ": " << e.message;
    return os.str();
}

class ParseFailure : public Error {
public:
    explicit ParseFailure(std::vector<ParseError> errors)
        : Error(errors.empty() ? std::string("parse failed")
                               : to_string(errors.front()) +
                                     (errors.size() > 1 ? " (and " + std::to_string(errors.size() - 1) + " more)"
                                                        : "")),
          errors_(std::move(errors)) {}
    const std::vector<ParseError>& errors() const { return errors_; }

private:
    std::vector<ParseError> errors_;
};

struct ParseResult {
    std::optional<KnowledgeBase> kb;  // engaged iff errors is empty
    std::vector<ParseError> errors;

    bool ok() const { return kb.has_value() && errors.empty(); }
};

// ======================= lexer =======================

namespace detail {

enum class Tok {
    Ident, Int, KwVar, KwIn, KwConstraint, KwNot, KwAnd, KwOr,
    Semi, Colon, Comma, LBrace, RBrace, LParen, RParen, DotDot,
    Arrow, RevArrow, Eq, Ne, Lt, Gt, Le, Ge, End, Bad
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int value = 0;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {
        // tolerate a UTF-8 byte order mark
        if (src_.size() >= 3 && src_.substr(0, 3) == "\xef\xbb\xbf") pos_ = 3;
    }

    Token next() {
        skip_blank();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= src_.size()) return t;

        char c = src_[pos_];
        if (is_ident_start(c)) {
            size_t start = pos_;
            while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
            t.text = std::string(src_.substr(start, pos_ - start));
            if (t.text == "var") t.kind = Tok::KwVar;
            else if (t.text == "in") t.kind = Tok::KwIn;
            else if (t.text == "constraint") t.kind = Tok::KwConstraint;
            else if (t.text == "not") t.kind = Tok::KwNot;
            else if (t.text == "and") t.kind = Tok::KwAnd;
            else if (t.text == "or") t.kind = Tok::KwOr;
            else t.kind = Tok::Ident;
            return t;
        }
        if (is_digit(c) || (c == '-' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
            size_t start = pos_;
            advance();
            while (pos_ < src_.size() && is_digit(src_[pos_])) advance();
            std::string_view text = src_.substr(start, pos_ - start);
            t.text = std::string(text);
            int value = 0;
            auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
            if (ec != std::errc() || p != text.data() + text.size()) {
                t.kind = Tok::Bad;
                t.text = "integer literal out of range";
                return t;
            }
            t.kind = Tok::Int;
            t.value = value;
            return t;
        }
        switch (c) {
        case ';': advance(); t.kind = Tok::Semi; return t;
        case ':': advance(); t.kind = Tok::Colon; return t;
        case ',': advance(); t.kind = Tok::Comma; return t;
        case '{': advance(); t.kind = Tok::LBrace; return t;
        case '}': advance(); t.kind = Tok::RBrace; return t;
        case '(': advance(); t.kind = Tok::LParen; return t;
        case ')': advance(); t.kind = Tok::RParen; return t;
        case '.':
            advance();
            if (pos_ < src_.size() && src_[pos_] == '.') { advance(); t.kind = Tok::DotDot; return t; }
            t.kind = Tok::Bad; t.text = "expected '..'"; return t;
        case '-':
            advance();
            if (pos_ < src_.size() && src_[pos_] == '>') { advance(); t.kind = Tok::Arrow; return t; }
            t.kind = Tok::Bad; t.text = "stray '-'"; return t;
        case '<':
            advance();
            if (pos_ < src_.size() && src_[pos_] == '-') { advance(); t.kind = Tok::RevArrow; return t; }
            if (pos_ < src_.size() && src_[pos_] == '=') { advance(); t.kind = Tok::Le; return t; }
            t.kind = Tok::Lt; return t;
        case '>':
            advance();
            if (pos_ < src_.size() && src_[pos_] == '=') { advance(); t.kind = Tok::Ge; return t; }
            t.kind = Tok::Gt; return t;
        case '=': advance(); t.kind = Tok::Eq; return t;
        case '!':
            advance();
            if (pos_ < src_.size() && src_[pos_] == '=') { advance(); t.kind = Tok::Ne; return t; }
            t.kind = Tok::Bad; t.text = "stray '!'"; return t;
        default:
            advance();
            t.kind = Tok::Bad;
            t.text = "unexpected character";
            return t;
        }
    }

private:
    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_ident_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

    void advance() {
        if (src_[pos_] == '\n') { ++line_; col_ = 1; }
        else ++col_;
        ++pos_;
    }

    void skip_blank() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { advance(); continue; }
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
                continue;
            }
            break;
        }
    }

    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

struct ParseAbort {
    ParseError error;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lexer_(src) { cur_ = lexer_.next(); }

    ParseResult parse_kb() {
        ParseResult result;
        KnowledgeBase kb;
        while (cur_.kind != Tok::End) {
            try {
                if (cur_.kind == Tok::KwVar) {
                    parse_var_decl(kb, result.errors);
                } else if (cur_.kind == Tok::KwConstraint) {
                    parse_constraint_decl(kb, result.errors);
                } else {
                    throw abort("expected 'var' or 'constraint'");
                }
            } catch (const ParseAbort& a) {
                result.errors.push_back(a.error);
                sync_to_semi();
            }
        }
        if (result.errors.empty()) result.kb = std::move(kb);
        return result;
    }

    ExprPtr parse_expr_only() {
        ExprPtr e = parse_expr();
        if (cur_.kind != Tok::End) throw abort("trailing input after expression");
        return e;
    }

private:
    ParseAbort abort(const std::string& msg, ParseErrorKind kind = ParseErrorKind::Syntax) {
        std::string text = msg;
        if (cur_.kind == Tok::Bad && !cur_.text.empty()) text = cur_.text;
        return ParseAbort{ParseError{cur_.line, cur_.col, text, kind}};
    }

    void bump() { cur_ = lexer_.next(); }

    void expect(Tok kind, const char* what) {
        if (cur_.kind != kind) throw abort(std::string("expected ") + what);
        bump();
    }

    void sync_to_semi() {
        while (cur_.kind != Tok::Semi && cur_.kind != Tok::End) bump();
        if (cur_.kind == Tok::Semi) bump();
    }

    void parse_var_decl(KnowledgeBase& kb, std::vector<ParseError>& errors) {
        bump();  // var
        if (cur_.kind != Tok::Ident) throw abort("expected variable name");
        std::string name = cur_.text;
        int at_line = cur_.line, at_col = cur_.col;
        bump();
        expect(Tok::KwIn, "'in'");
        std::vector<int> domain = parse_domain();
        expect(Tok::Semi, "';'");

        bool bad = false;
        if (declared(name)) {
            errors.push_back({at_line, at_col, "duplicate variable: " + name, ParseErrorKind::DuplicateId});
            bad = true;
        }
        if (domain.empty()) {
            errors.push_back({at_line, at_col, "empty domain for variable " + name, ParseErrorKind::EmptyDomain});
            bad = true;
        }
        // register the name even on error so later references do not cascade
        var_names_.push_back(name);
        if (!bad && errors.empty()) kb.add_variable(Variable{name, std::move(domain)});
    }

    std::vector<int> parse_domain() {
        if (cur_.kind == Tok::Int) {
            int lo = cur_.value;
            bump();
            expect(Tok::DotDot, "'..'");
            if (cur_.kind != Tok::Int) throw abort("expected integer");
            int hi = cur_.value;
            bump();
            if (lo > hi) return {};
            if (static_cast<long long>(hi) - lo >= 65536) throw abort("domain too large");
            std::vector<int> values;
            for (int v = lo; v <= hi; ++v) values.push_back(v);
            return values;
        }
        if (cur_.kind == Tok::LBrace) {
            bump();
            std::vector<int> values;
            if (cur_.kind != Tok::RBrace) {
                while (true) {
                    if (cur_.kind != Tok::Int) throw abort("expected integer");
                    values.push_back(cur_.value);
                    bump();
                    if (cur_.kind == Tok::Comma) { bump(); continue; }
                    break;
                }
            }
            expect(Tok::RBrace, "'}'");
            return make_domain(std::move(values));
        }
        throw abort("expected domain (lo..hi or {a, b, ...})");
    }

    void parse_constraint_decl(KnowledgeBase& kb, std::vector<ParseError>& errors) {
        bump();  // constraint
        if (cur_.kind != Tok::Ident) throw abort("expected constraint id");
        std::string id = cur_.text;
        int at_line = cur_.line, at_col = cur_.col;
        bump();
        expect(Tok::Colon, "':'");
        ExprPtr expr = parse_expr();
        expect(Tok::Semi, "';'");

        bool bad = false;
        for (const auto& cid : constraint_ids_) {
            if (cid == id) {
                errors.push_back({at_line, at_col, "duplicate constraint: " + id, ParseErrorKind::DuplicateId});
                bad = true;
                break;
            }
        }
        constraint_ids_.push_back(id);
        std::vector<std::string> unknown;
        for (const auto& name : referenced_variables(*expr)) {
            if (!declared(name)) unknown.push_back(name);
        }
        for (const auto& name : unknown) {
            errors.push_back({at_line, at_col, "unknown variable " + name + " in constraint " + id,
                              ParseErrorKind::UnknownVariable});
            bad = true;
        }
        if (!bad && errors.empty()) kb.add_constraint(id, std::move(expr));
    }

    bool declared(const std::string& name) const {
        for (const auto& n : var_names_)
            if (n == name) return true;
        return false;
    }

    // expr := or_chain (("->" | "<-") or_chain)*   right-assoc, arrows not mixed
    ExprPtr parse_expr() {
        ExprPtr first = parse_or();
        if (cur_.kind != Tok::Arrow && cur_.kind != Tok::RevArrow) return first;
        Tok arrow = cur_.kind;
        std::vector<ExprPtr> operands{first};
        while (cur_.kind == Tok::Arrow || cur_.kind == Tok::RevArrow) {
            if (cur_.kind != arrow)
                throw abort("cannot mix '->' and '<-' without parentheses");
            bump();
            operands.push_back(parse_or());
        }
        ExprPtr result = operands.back();
        for (size_t i = operands.size() - 1; i-- > 0;)
            result = arrow == Tok::Arrow ? implies(operands[i], result) : implied_by(operands[i], result);
        return result;
    }

    ExprPtr parse_or() {
        ExprPtr e = parse_and();
        while (cur_.kind == Tok::KwOr) {
            bump();
            e = disj(std::move(e), parse_and());
        }
        return e;
    }

    ExprPtr parse_and() {
        ExprPtr e = parse_not();
        while (cur_.kind == Tok::KwAnd) {
            bump();
            e = conj(std::move(e), parse_not());
        }
        return e;
    }

    ExprPtr parse_not() {
        if (cur_.kind == Tok::KwNot) {
            bump();
            return neg(parse_not());
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        if (cur_.kind == Tok::LParen) {
            bump();
            ExprPtr e = parse_expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        if (cur_.kind != Tok::Ident) throw abort("expected comparison or '('");
        std::string var = cur_.text;
        bump();
        CmpOp op;
        switch (cur_.kind) {
        case Tok::Eq: op = CmpOp::Eq; break;
        case Tok::Ne: op = CmpOp::Ne; break;
        case Tok::Lt: op = CmpOp::Lt; break;
        case Tok::Gt: op = CmpOp::Gt; break;
        case Tok::Le: op = CmpOp::Le; break;
        case Tok::Ge: op = CmpOp::Ge; break;
        default: throw abort("expected comparison operator");
        }
        bump();
        if (cur_.kind == Tok::Int) {
            int value = cur_.value;
            bump();
            return cmp(std::move(var), op, value);
        }
        if (cur_.kind == Tok::Ident) {
            std::string rhs = cur_.text;
            bump();
            return cmp(std::move(var), op, std::move(rhs));
        }
        throw abort("expected integer or variable");
    }

    Lexer lexer_;
    Token cur_;
    std::vector<std::string> var_names_;
    std::vector<std::string> constraint_ids_;
};

}  // namespace detail

// Parses a knowledge base. Collects every diagnosable error in one pass;
// never throws on malformed input.
inline ParseResult parse_kb(std::string_view source) {
    detail::Parser p(source);
    return p.parse_kb();
}

inline KnowledgeBase parse_kb_or_throw(std::string_view source) {
    ParseResult r = parse_kb(source);
    if (!r.ok()) throw ParseFailure(std::move(r.errors));
    return std::move(*r.kb);
}

// Parses a bare expression (no variable declarations in scope, so names are
// not checked). Throws ParseFailure on syntax errors.
inline ExprPtr parse_expr(std::string_view source) {
    detail::Parser p(source);
    try {
        return p.parse_expr_only();
    } catch (const detail::ParseAbort& a) {
        throw ParseFailure({a.error});
    }
}

// ======================= serialization =======================

namespace detail {

// precedence: arrows 1, or 2, and 3, not 4, comparison 5
inline int expr_prec(const Expr& e) {
    return std::visit(
        [](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Comparison>) return 5;
            else if constexpr (std::is_same_v<T, Not>) return 4;
            else if constexpr (std::is_same_v<T, And>) return 3;
            else if constexpr (std::is_same_v<T, Or>) return 2;
            else return 1;
        },
        e.node);
}

inline void write_expr(std::ostream& os, const Expr& e, int min_prec) {
    int prec = expr_prec(e);
    bool parens = prec < min_prec;
    if (parens) os << '(';
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Comparison>) {
                os << n.var << ' ' << cmp_op_text(n.op) << ' ';
                if (const auto* c = std::get_if<int>(&n.rhs)) os << *c;
                else os << std::get<std::string>(n.rhs);
            } else if constexpr (std::is_same_v<T, Not>) {
                os << "not ";
                write_expr(os, *n.child, 4);
            } else if constexpr (std::is_same_v<T, And>) {
                write_expr(os, *n.lhs, 3);
                os << " and ";
                write_expr(os, *n.rhs, 4);
            } else if constexpr (std::is_same_v<T, Or>) {
                write_expr(os, *n.lhs, 2);
                os << " or ";
                write_expr(os, *n.rhs, 3);
            } else {
                // arrows are right-associative and must not chain mixed, so a
                // right child that is the other arrow gets parentheses
                const bool fwd = std::is_same_v<T, Implies>;
                write_expr(os, *n.lhs, 2);
                os << (fwd ? " -> " : " <- ");
                bool same = std::holds_alternative<Implies>(n.rhs->node) == fwd &&
                            expr_prec(*n.rhs) == 1;
                write_expr(os, *n.rhs, same ? 1 : 2);
            }
        },
        e.node);
    if (parens) os << ')';
}

}  // namespace detail

inline std::string expr_text(const Expr& e) {
    std::ostringstream os;
    detail::write_expr(os, e, 0);
    return os.str();
}

inline std::string expr_text(const ExprPtr& e) { return expr_text(*e); }

// Canonical text form. parse_kb(serialize_kb(kb)) reproduces kb exactly.
inline std::string serialize_kb(const KnowledgeBase& kb) {
    std::ostringstream os;
    for (const auto& v : kb.variables()) {
        os << "var " << v.name << " in ";
        bool contiguous = true;
        for (size_t i = 1; i < v.domain.size(); ++i)
            if (v.domain[i] != v.domain[i - 1] + 1) { contiguous = false; break; }
        if (contiguous) {
            os << v.domain.front() << ".." << v.domain.back();
        } else {
            os << '{';
            for (size_t i = 0; i < v.domain.size(); ++i) {
                if (i) os << ", ";
                os << v.domain[i];
            }
            os << '}';
        }
        os << ";\n";
    }
    if (!kb.variables().empty() && !kb.constraints().empty()) os << '\n';
    for (const auto& c : kb.constraints()) {
        os << "constraint " << c.id << ": ";
        detail::write_expr(os, *c.expr, 0);
        os << ";\n";
    }
    return os.str();
}

}  // namespace kbtool
