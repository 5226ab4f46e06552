#pragma once

// Small symbolic expression layer for real-analytic coefficient functions.
//
// Grammar (used by the parser and the CLI):
//   expr   := term  (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' integer)*
//   atom   := number | z<k> | i<k> | exp|sin|cos|sqrt|ln '(' expr ')' | '(' expr ')'
// Variables are z0..z31; i<k> denotes the k-th basis generator.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "cd.hpp"

namespace hypercd {

class ParseError : public Error {
public:
    ParseError(const std::string& what, size_t pos)
        : Error(what + " (at offset " + std::to_string(pos) + ")"), pos_(pos) {}
    size_t position() const { return pos_; }

private:
    size_t pos_;
};

class Expr;
namespace detail {
struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

enum class Op { Num, CDConst, Var, Add, Sub, Mul, Div, Neg, Pow, Exp, Sin, Cos, Sqrt, Ln };

struct ExprNode {
    Op op;
    double num = 0.0;
    CDNumber cd;       // CDConst
    int var = -1;      // Var index / Pow exponent
    NodePtr a, b;
};
}  // namespace detail

class Expr {
public:
    Expr() : n_(make(detail::Op::Num)) {}

    static Expr number(double x) {
        auto n = make(detail::Op::Num);
        n->num = x;
        return Expr(n);
    }
    static Expr cd_constant(CDNumber c) {
        auto n = make(detail::Op::CDConst);
        n->cd = std::move(c);
        return Expr(n);
    }
    static Expr var(int k) {
        if (k < 0 || k > 31) throw DomainError("variable index out of range (z0..z31)");
        auto n = make(detail::Op::Var);
        n->var = k;
        return Expr(n);
    }

    friend Expr operator+(const Expr& a, const Expr& b) { return binary(detail::Op::Add, a, b); }
    friend Expr operator-(const Expr& a, const Expr& b) { return binary(detail::Op::Sub, a, b); }
    friend Expr operator*(const Expr& a, const Expr& b) { return binary(detail::Op::Mul, a, b); }
    friend Expr operator/(const Expr& a, const Expr& b) { return binary(detail::Op::Div, a, b); }
    Expr operator-() const { return unary(detail::Op::Neg, *this); }
    Expr pow(int k) const {
        auto n = make(detail::Op::Pow);
        n->a = n_;
        n->var = k;
        return Expr(n).folded();
    }
    static Expr exp(const Expr& a) { return unary(detail::Op::Exp, a); }
    static Expr sin(const Expr& a) { return unary(detail::Op::Sin, a); }
    static Expr cos(const Expr& a) { return unary(detail::Op::Cos, a); }
    static Expr sqrt(const Expr& a) { return unary(detail::Op::Sqrt, a); }
    static Expr ln(const Expr& a) { return unary(detail::Op::Ln, a); }

    // Evaluate at a real point.  The result is Cayley-Dickson valued because
    // i<k> literals may appear; purely real expressions yield real results.
    CDNumber eval(const std::vector<double>& z) const { return eval_node(n_, z); }

    double eval_real(const std::vector<double>& z) const {
        CDNumber v = eval(z);
        for (size_t j = 1; j < v.dim(); ++j)
            if (std::abs(v[j]) > 1e-14 * (1.0 + std::abs(v[0])))
                throw DomainError("expression is not real-valued");
        return v.re();
    }

    Expr differentiate(int var) const { return Expr(diff_node(n_, var)).folded(); }

    // Re-index variables z_k -> z_{k+offset} (used when adjoining a new
    // leading coordinate).
    Expr shift_coords(int offset) const { return Expr(shift_node(n_, offset)); }

    bool is_zero() const {
        const auto f = folded();
        return f.n_->op == detail::Op::Num && f.n_->num == 0.0;
    }
    bool is_constant() const { return max_var(n_) < 0; }
    int max_variable() const { return max_var(n_); }

    Expr folded() const { return Expr(fold(n_)); }

    std::string str() const { return print(n_); }

    static Expr parse(const std::string& text);

private:
    explicit Expr(detail::NodePtr n) : n_(std::move(n)) {}
    using Node = detail::ExprNode;
    using Op = detail::Op;

    static std::shared_ptr<Node> make(Op op) {
        auto n = std::make_shared<Node>();
        n->op = op;
        return n;
    }
    static Expr binary(Op op, const Expr& a, const Expr& b) {
        auto n = make(op);
        n->a = a.n_;
        n->b = b.n_;
        return Expr(n).folded();
    }
    static Expr unary(Op op, const Expr& a) {
        auto n = make(op);
        n->a = a.n_;
        return Expr(n).folded();
    }

    static CDNumber eval_node(const detail::NodePtr& n, const std::vector<double>& z) {
        auto real_arg = [&](const detail::NodePtr& m) {
            CDNumber v = eval_node(m, z);
            for (size_t j = 1; j < v.dim(); ++j)
                if (std::abs(v[j]) > 1e-14 * (1.0 + std::abs(v[0])))
                    throw DomainError("transcendental function of a non-real value");
            return v.re();
        };
        switch (n->op) {
            case Op::Num: return CDNumber::real(n->num);
            case Op::CDConst: return n->cd;
            case Op::Var:
                if (static_cast<size_t>(n->var) >= z.size())
                    throw DomainError("point has too few coordinates for z" + std::to_string(n->var));
                return CDNumber::real(z[static_cast<size_t>(n->var)]);
            case Op::Add: return eval_node(n->a, z) + eval_node(n->b, z);
            case Op::Sub: return eval_node(n->a, z) - eval_node(n->b, z);
            case Op::Mul: return eval_node(n->a, z) * eval_node(n->b, z);
            case Op::Div: {
                CDNumber num = eval_node(n->a, z);
                CDNumber den = eval_node(n->b, z);
                return num * inverse(den);
            }
            case Op::Neg: return -eval_node(n->a, z);
            case Op::Pow: return power(eval_node(n->a, z), n->var);
            case Op::Exp: return CDNumber::real(std::exp(real_arg(n->a)));
            case Op::Sin: return CDNumber::real(std::sin(real_arg(n->a)));
            case Op::Cos: return CDNumber::real(std::cos(real_arg(n->a)));
            case Op::Sqrt: {
                double x = real_arg(n->a);
                if (x < 0) throw DomainError("sqrt of a negative value");
                return CDNumber::real(std::sqrt(x));
            }
            case Op::Ln: {
                double x = real_arg(n->a);
                if (x <= 0) throw DomainError("ln of a non-positive value");
                return CDNumber::real(std::log(x));
            }
        }
        throw Error("unreachable");
    }

    static detail::NodePtr diff_node(const detail::NodePtr& n, int v) {
        auto zero = make(Op::Num);
        auto D = [v](const detail::NodePtr& m) { return diff_node(m, v); };
        switch (n->op) {
            case Op::Num:
            case Op::CDConst: return zero;
            case Op::Var: {
                auto r = make(Op::Num);
                r->num = (n->var == v) ? 1.0 : 0.0;
                return r;
            }
            case Op::Add:
            case Op::Sub: {
                auto r = make(n->op);
                r->a = D(n->a);
                r->b = D(n->b);
                return r;
            }
            case Op::Mul: {
                // order-preserving product rule
                auto l = make(Op::Mul); l->a = D(n->a); l->b = n->b;
                auto rr = make(Op::Mul); rr->a = n->a; rr->b = D(n->b);
                auto r = make(Op::Add); r->a = l; r->b = rr;
                return r;
            }
            case Op::Div: {
                // (a/b)' = a'/b - (a b') / b^2, b real-valued in practice
                auto t1 = make(Op::Div); t1->a = D(n->a); t1->b = n->b;
                auto ab = make(Op::Mul); ab->a = n->a; ab->b = D(n->b);
                auto b2 = make(Op::Pow); b2->a = n->b; b2->var = 2;
                auto t2 = make(Op::Div); t2->a = ab; t2->b = b2;
                auto r = make(Op::Sub); r->a = t1; r->b = t2;
                return r;
            }
            case Op::Neg: {
                auto r = make(Op::Neg);
                r->a = D(n->a);
                return r;
            }
            case Op::Pow: {
                if (n->var == 0) return zero;
                auto k = make(Op::Num); k->num = n->var;
                auto p = make(Op::Pow); p->a = n->a; p->var = n->var - 1;
                auto kp = make(Op::Mul); kp->a = k; kp->b = p;
                auto r = make(Op::Mul); r->a = kp; r->b = D(n->a);
                return r;
            }
            case Op::Exp: {
                auto r = make(Op::Mul);
                r->a = n;
                r->b = D(n->a);
                return r;
            }
            case Op::Sin: {
                auto c = make(Op::Cos); c->a = n->a;
                auto r = make(Op::Mul); r->a = c; r->b = D(n->a);
                return r;
            }
            case Op::Cos: {
                auto s = make(Op::Sin); s->a = n->a;
                auto ns = make(Op::Neg); ns->a = s;
                auto r = make(Op::Mul); r->a = ns; r->b = D(n->a);
                return r;
            }
            case Op::Sqrt: {
                auto two = make(Op::Num); two->num = 2.0;
                auto den = make(Op::Mul); den->a = two; den->b = n;
                auto r = make(Op::Div); r->a = D(n->a); r->b = den;
                return r;
            }
            case Op::Ln: {
                auto r = make(Op::Div);
                r->a = D(n->a);
                r->b = n->a;
                return r;
            }
        }
        throw Error("unreachable");
    }

    static detail::NodePtr shift_node(const detail::NodePtr& n, int offset) {
        auto r = std::make_shared<Node>(*n);
        if (n->op == Op::Var) {
            if (n->var + offset < 0 || n->var + offset > 31)
                throw DomainError("shifted variable index out of range");
            r->var = n->var + offset;
        }
        if (n->a) r->a = shift_node(n->a, offset);
        if (n->b) r->b = shift_node(n->b, offset);
        return r;
    }

    static int max_var(const detail::NodePtr& n) {
        int m = (n->op == Op::Var) ? n->var : -1;
        if (n->a) m = std::max(m, max_var(n->a));
        if (n->b) m = std::max(m, max_var(n->b));
        return m;
    }

    static bool is_num(const detail::NodePtr& n, double x) {
        return n->op == Op::Num && n->num == x;
    }

    static detail::NodePtr fold(const detail::NodePtr& n) {
        auto r = std::make_shared<Node>(*n);
        if (n->a) r->a = fold(n->a);
        if (n->b) r->b = fold(n->b);
        const bool na = r->a && r->a->op == Op::Num;
        const bool nb = r->b && r->b->op == Op::Num;
        auto num = [](double x) {
            auto m = make(Op::Num);
            m->num = x;
            return m;
        };
        switch (r->op) {
            case Op::Add:
                if (na && nb) return num(r->a->num + r->b->num);
                if (is_num(r->a, 0.0)) return r->b;
                if (is_num(r->b, 0.0)) return r->a;
                break;
            case Op::Sub:
                if (na && nb) return num(r->a->num - r->b->num);
                if (is_num(r->b, 0.0)) return r->a;
                break;
            case Op::Mul:
                if (na && nb) return num(r->a->num * r->b->num);
                if (is_num(r->a, 0.0) || is_num(r->b, 0.0)) return num(0.0);
                if (is_num(r->a, 1.0)) return r->b;
                if (is_num(r->b, 1.0)) return r->a;
                break;
            case Op::Div:
                if (is_num(r->a, 0.0)) return num(0.0);
                if (na && nb && r->b->num != 0.0) return num(r->a->num / r->b->num);
                if (is_num(r->b, 1.0)) return r->a;
                break;
            case Op::Neg:
                if (na) return num(-r->a->num);
                break;
            case Op::Pow:
                if (r->var == 0) return num(1.0);
                if (r->var == 1) return r->a;
                if (na) return num(std::pow(r->a->num, r->var));
                break;
            default: break;
        }
        return r;
    }

    static std::string print(const detail::NodePtr& n) {
        std::ostringstream os;
        switch (n->op) {
            case Op::Num: {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", n->num);
                return buf;
            }
            case Op::CDConst: {
                std::string s = "(";
                bool first = true;
                for (size_t j = 0; j < n->cd.dim(); ++j) {
                    if (n->cd[j] == 0.0) continue;
                    char buf[40];
                    std::snprintf(buf, sizeof buf, "%.17g", n->cd[j]);
                    if (!first) s += "+";
                    s += buf;
                    if (j > 0) s += "*i" + std::to_string(j);
                    first = false;
                }
                if (first) s += "0";
                return s + ")";
            }
            case Op::Var: return "z" + std::to_string(n->var);
            case Op::Add: return "(" + print(n->a) + "+" + print(n->b) + ")";
            case Op::Sub: return "(" + print(n->a) + "-" + print(n->b) + ")";
            case Op::Mul: return "(" + print(n->a) + "*" + print(n->b) + ")";
            case Op::Div: return "(" + print(n->a) + "/" + print(n->b) + ")";
            case Op::Neg: return "(-" + print(n->a) + ")";
            case Op::Pow: return print(n->a) + "^" + std::to_string(n->var);
            case Op::Exp: return "exp(" + print(n->a) + ")";
            case Op::Sin: return "sin(" + print(n->a) + ")";
            case Op::Cos: return "cos(" + print(n->a) + ")";
            case Op::Sqrt: return "sqrt(" + print(n->a) + ")";
            case Op::Ln: return "ln(" + print(n->a) + ")";
        }
        throw Error("unreachable");
    }

    detail::NodePtr n_;
    friend class ExprParser;
};

class ExprParser {
public:
    explicit ExprParser(const std::string& s) : s_(s) {}

    Expr parse() {
        Expr e = expr();
        skip_ws();
        if (pos_ != s_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    Expr expr() {
        Expr e = term();
        for (;;) {
            skip_ws();
            if (accept('+')) e = e + term();
            else if (accept('-')) e = e - term();
            else return e;
        }
    }
    Expr term() {
        Expr e = unary();
        for (;;) {
            skip_ws();
            if (accept('*')) e = e * unary();
            else if (accept('/')) e = e / unary();
            else return e;
        }
    }
    Expr unary() {
        skip_ws();
        if (accept('-')) return -unary();
        return power();
    }
    Expr power() {
        Expr e = atom();
        skip_ws();
        while (accept('^')) {
            e = e.pow(integer());
            skip_ws();
        }
        return e;
    }
    Expr atom() {
        skip_ws();
        if (pos_ >= s_.size()) throw ParseError("unexpected end of expression", pos_);
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            skip_ws();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return Expr::number(number());
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::string id = ident();
            if ((id[0] == 'z' || id[0] == 'i') && id.size() > 1 &&
                std::all_of(id.begin() + 1, id.end(),
                            [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
                int k = std::stoi(id.substr(1));
                if (id[0] == 'z') return Expr::var(k);
                if (k > 1023) throw ParseError("basis index too large", pos_);
                return Expr::cd_constant(CDNumber::basis(k));
            }
            skip_ws();
            if (!accept('(')) throw ParseError("expected '(' after function name", pos_);
            Expr arg = expr();
            skip_ws();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            if (id == "exp") return Expr::exp(arg);
            if (id == "sin") return Expr::sin(arg);
            if (id == "cos") return Expr::cos(arg);
            if (id == "sqrt") return Expr::sqrt(arg);
            if (id == "ln") return Expr::ln(arg);
            throw ParseError("unknown function '" + id + "'", pos_);
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    double number() {
        size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                s_[pos_] == 'e' || s_[pos_] == 'E' ||
                ((s_[pos_] == '+' || s_[pos_] == '-') && pos_ > start &&
                 (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
            ++pos_;
        try {
            return std::stod(s_.substr(start, pos_ - start));
        } catch (const std::exception&) {
            throw ParseError("malformed number", start);
        }
    }
    int integer() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == start) throw ParseError("expected integer exponent", pos_);
        return std::stoi(s_.substr(start, pos_ - start));
    }
    std::string ident() {
        size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_]))))
            ++pos_;
        return s_.substr(start, pos_ - start);
    }
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    const std::string& s_;
    size_t pos_ = 0;
};

inline Expr Expr::parse(const std::string& text) { return ExprParser(text).parse(); }

}  // namespace hypercd
