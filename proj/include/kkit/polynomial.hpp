#pragma once

#include "kkit/rational.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace kkit {

// Multivariate polynomial with rational coefficients over variables x1..xd.
// Exponent vectors are kept sorted so equality/serialization are canonical.
struct Polynomial {
    size_t nvars = 0;
    std::map<std::vector<unsigned>, Rational> terms; // exponents -> coeff, no zero coeffs

    static Polynomial constant(size_t nvars, const Rational& c) {
        Polynomial p;
        p.nvars = nvars;
        if (c != 0) p.terms[std::vector<unsigned>(nvars, 0)] = c;
        return p;
    }
    static Polynomial var(size_t nvars, size_t i) {
        Polynomial p;
        p.nvars = nvars;
        std::vector<unsigned> e(nvars, 0);
        e[i] = 1;
        p.terms[e] = 1;
        return p;
    }

    void add_term(std::vector<unsigned> e, const Rational& c) {
        auto it = terms.find(e);
        if (it == terms.end()) {
            if (c != 0) terms[std::move(e)] = c;
        } else {
            it->second += c;
            if (it->second == 0) terms.erase(it);
        }
    }

    Polynomial operator+(const Polynomial& o) const {
        Polynomial r = *this;
        for (const auto& [e, c] : o.terms) r.add_term(e, c);
        return r;
    }
    Polynomial operator-(const Polynomial& o) const {
        Polynomial r = *this;
        for (const auto& [e, c] : o.terms) r.add_term(e, -c);
        return r;
    }
    Polynomial operator*(const Polynomial& o) const {
        Polynomial r;
        r.nvars = nvars;
        for (const auto& [e1, c1] : terms)
            for (const auto& [e2, c2] : o.terms) {
                std::vector<unsigned> e(nvars);
                for (size_t i = 0; i < nvars; ++i) e[i] = e1[i] + e2[i];
                r.add_term(std::move(e), c1 * c2);
            }
        return r;
    }
    Polynomial pow(unsigned k) const {
        Polynomial r = constant(nvars, 1);
        for (unsigned i = 0; i < k; ++i) r = r * (*this);
        return r;
    }

    Rational eval(const Vec& x) const {
        require(x.size() == nvars, "ShapeMismatch", "polynomial arity");
        Rational s = 0;
        for (const auto& [e, c] : terms) {
            Rational t = c;
            for (size_t i = 0; i < nvars; ++i)
                for (unsigned k = 0; k < e[i]; ++k) t *= x[i];
            s += t;
        }
        return s;
    }

    // substitute variable i := value, producing a polynomial in the remaining vars
    Polynomial substitute(size_t i, const Rational& value) const {
        Polynomial r;
        r.nvars = nvars - 1;
        for (const auto& [e, c] : terms) {
            Rational t = c;
            for (unsigned k = 0; k < e[i]; ++k) t *= value;
            std::vector<unsigned> f;
            f.reserve(nvars - 1);
            for (size_t j = 0; j < nvars; ++j)
                if (j != i) f.push_back(e[j]);
            r.add_term(std::move(f), t);
        }
        return r;
    }

    std::string str() const {
        if (terms.empty()) return "0";
        std::string s;
        bool first = true;
        for (const auto& [e, c] : terms) {
            std::string mono;
            for (size_t i = 0; i < nvars; ++i) {
                if (!e[i]) continue;
                if (!mono.empty()) mono += "*";
                mono += "x" + std::to_string(i + 1);
                if (e[i] > 1) mono += "^" + std::to_string(e[i]);
            }
            std::string coeff = rat_str(c);
            std::string term;
            if (mono.empty())
                term = coeff;
            else if (c == 1)
                term = mono;
            else if (c == -1)
                term = "-" + mono;
            else
                term = coeff + "*" + mono;
            if (!first && term[0] != '-') s += "+";
            s += term;
            first = false;
        }
        return s;
    }
};

// ---------------------------------------------------------------------------
// Expression parsing: rational arithmetic expressions over x1..xd (polynomials
// only — no division by variables), plus boolean predicates built from
// comparisons, "and", "or", "not".
// ---------------------------------------------------------------------------

namespace detail {

struct Lexer {
    std::string src;
    size_t pos = 0;

    void skip() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }
    bool eat(const std::string& tok) {
        skip();
        if (src.compare(pos, tok.size(), tok) == 0) {
            // avoid eating a prefix of an identifier
            if (std::isalpha(static_cast<unsigned char>(tok[0]))) {
                size_t end = pos + tok.size();
                if (end < src.size() && (std::isalnum(static_cast<unsigned char>(src[end])) || src[end] == '_'))
                    return false;
            }
            pos += tok.size();
            return true;
        }
        return false;
    }
    bool peek(char c) {
        skip();
        return pos < src.size() && src[pos] == c;
    }
    bool done() {
        skip();
        return pos >= src.size();
    }
    [[noreturn]] void err(const std::string& what) {
        fail("ParseError", what + " at offset " + std::to_string(pos) + " in '" + src + "'");
    }
};

struct PolyParser {
    Lexer& lx;
    size_t nvars;

    Polynomial parse_expr() {
        Polynomial p = parse_term();
        while (true) {
            if (lx.eat("+"))
                p = p + parse_term();
            else if (lx.peek('-')) {
                // binary minus (unary handled in factor)
                lx.eat("-");
                p = p - parse_term();
            } else
                break;
        }
        return p;
    }
    Polynomial parse_term() {
        Polynomial p = parse_factor();
        while (lx.eat("*")) p = p * parse_factor();
        return p;
    }
    Polynomial parse_factor() {
        Polynomial p = parse_atom();
        if (lx.eat("^")) {
            lx.skip();
            size_t start = lx.pos;
            while (lx.pos < lx.src.size() && std::isdigit(static_cast<unsigned char>(lx.src[lx.pos])))
                ++lx.pos;
            if (start == lx.pos) lx.err("expected exponent");
            p = p.pow(unsigned(std::stoul(lx.src.substr(start, lx.pos - start))));
        }
        return p;
    }
    Polynomial parse_atom() {
        lx.skip();
        if (lx.eat("-")) return Polynomial::constant(nvars, -1) * parse_factor();
        if (lx.eat("(")) {
            Polynomial p = parse_expr();
            if (!lx.eat(")")) lx.err("expected ')'");
            return p;
        }
        if (lx.pos < lx.src.size() && (lx.src[lx.pos] == 'x' || lx.src[lx.pos] == 'X')) {
            size_t q = lx.pos + 1, start = q;
            while (q < lx.src.size() && std::isdigit(static_cast<unsigned char>(lx.src[q]))) ++q;
            if (q == start) lx.err("expected variable index");
            size_t idx = std::stoul(lx.src.substr(start, q - start));
            if (idx < 1 || idx > nvars) lx.err("variable x" + std::to_string(idx) + " out of range");
            lx.pos = q;
            return Polynomial::var(nvars, idx - 1);
        }
        // rational literal p or p/q
        size_t q = lx.pos;
        while (q < lx.src.size() && std::isdigit(static_cast<unsigned char>(lx.src[q]))) ++q;
        if (q == lx.pos) lx.err("expected number, variable or '('");
        std::string num = lx.src.substr(lx.pos, q - lx.pos);
        lx.pos = q;
        if (lx.peek('/')) {
            ++lx.pos;
            lx.skip();
            size_t r = lx.pos;
            while (r < lx.src.size() && std::isdigit(static_cast<unsigned char>(lx.src[r]))) ++r;
            if (r == lx.pos) lx.err("expected denominator");
            std::string den = lx.src.substr(lx.pos, r - lx.pos);
            lx.pos = r;
            return Polynomial::constant(nvars, parse_rational(num + "/" + den));
        }
        return Polynomial::constant(nvars, parse_rational(num));
    }
};

} // namespace detail

inline Polynomial parse_polynomial(const std::string& src, size_t nvars) {
    detail::Lexer lx{src};
    detail::PolyParser pp{lx, nvars};
    Polynomial p = pp.parse_expr();
    if (!lx.done()) lx.err("trailing input");
    return p;
}

// Boolean predicate over sample coordinates, e.g. "(x1 > 2/3 and x2 > 0) or x1 <= 0".
struct Predicate {
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;
    struct Node {
        enum Kind { Cmp, And, Or, Not, True } kind = True;
        // Cmp
        Polynomial lhs, rhs;
        std::string op;
        // And/Or/Not
        NodePtr a, b;
    };
    NodePtr root;
    size_t nvars = 0;

    bool eval(const Vec& x) const { return eval_node(root.get(), x); }

    static bool eval_node(const Node* n, const Vec& x) {
        if (!n || n->kind == Node::True) return true;
        switch (n->kind) {
        case Node::Cmp: {
            Rational l = n->lhs.eval(x), r = n->rhs.eval(x);
            if (n->op == "<") return l < r;
            if (n->op == "<=") return l <= r;
            if (n->op == ">") return l > r;
            if (n->op == ">=") return l >= r;
            if (n->op == "==") return l == r;
            return l != r; // "!="
        }
        case Node::And:
            return eval_node(n->a.get(), x) && eval_node(n->b.get(), x);
        case Node::Or:
            return eval_node(n->a.get(), x) || eval_node(n->b.get(), x);
        case Node::Not:
            return !eval_node(n->a.get(), x);
        default:
            return true;
        }
    }
};

namespace detail {

struct PredParser {
    Lexer& lx;
    size_t nvars;

    Predicate::NodePtr parse_or() {
        auto a = parse_and();
        while (lx.eat("or")) {
            auto b = parse_and();
            auto n = std::make_shared<Predicate::Node>();
            n->kind = Predicate::Node::Or;
            n->a = a;
            n->b = b;
            a = n;
        }
        return a;
    }
    Predicate::NodePtr parse_and() {
        auto a = parse_not();
        while (lx.eat("and")) {
            auto b = parse_not();
            auto n = std::make_shared<Predicate::Node>();
            n->kind = Predicate::Node::And;
            n->a = a;
            n->b = b;
            a = n;
        }
        return a;
    }
    Predicate::NodePtr parse_not() {
        if (lx.eat("not")) {
            auto n = std::make_shared<Predicate::Node>();
            n->kind = Predicate::Node::Not;
            n->a = parse_not();
            return n;
        }
        return parse_primary();
    }
    Predicate::NodePtr parse_primary() {
        lx.skip();
        // lookahead: '(' could open a boolean group or a polynomial atom.
        if (lx.peek('(')) {
            size_t save = lx.pos;
            ++lx.pos;
            try {
                auto inner = parse_or();
                if (lx.eat(")")) {
                    // boolean group only if next token is not a comparison/arith op
                    lx.skip();
                    if (lx.done() || lx.peek(')') ||
                        lx.src.compare(lx.pos, 3, "and") == 0 || lx.src.compare(lx.pos, 2, "or") == 0)
                        return inner;
                }
            } catch (const Error&) {
                // fall through: treat as polynomial comparison
            }
            lx.pos = save;
        }
        return parse_cmp();
    }
    Predicate::NodePtr parse_cmp() {
        PolyParser pp{lx, nvars};
        Polynomial l = pp.parse_expr();
        std::string op;
        for (const char* c : {"<=", ">=", "==", "!=", "<", ">"})
            if (lx.eat(c)) {
                op = c;
                break;
            }
        if (op.empty()) lx.err("expected comparison operator");
        Polynomial r = pp.parse_expr();
        auto n = std::make_shared<Predicate::Node>();
        n->kind = Predicate::Node::Cmp;
        n->lhs = l;
        n->rhs = r;
        n->op = op;
        return n;
    }
};

} // namespace detail

inline Predicate parse_predicate(const std::string& src, size_t nvars) {
    detail::Lexer lx{src};
    detail::PredParser pp{lx, nvars};
    Predicate p;
    p.nvars = nvars;
    p.root = pp.parse_or();
    if (!lx.done()) lx.err("trailing input");
    return p;
}

} // namespace kkit
