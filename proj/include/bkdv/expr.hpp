#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bkdv/number.hpp"

namespace bkdv {

enum class Var : std::uint8_t { t, x };

enum class Kind : std::uint8_t {
    constant, variable, add, sub, mul, div, neg, pow, func,
    quad,     // quad(f, a, U) = integral of f(t, xi) dxi from a to U; x is bound inside f
    inverse,  // inv(F, lo, hi, A) = y in [lo, hi] with F(t, y) = A; x is bound inside F
};

enum class Fn : std::uint8_t { abs, sign, exp, ln, sin, cos, tan, atan, sqrt };

struct ParseError : std::runtime_error {
    int line, column;
    ParseError(const std::string& msg, int line, int column);
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Node;

// Immutable, shared expression DAG in the variables t and x.
class Expr {
public:
    Expr();  // the constant 0
    Expr(int v);  // NOLINT(google-explicit-constructor): integer literals read naturally
    explicit Expr(std::shared_ptr<const Node> p) : p_(std::move(p)) {}

    const Node& node() const { return *p_; }
    const Node* id() const { return p_.get(); }
    Kind kind() const;
    bool depends_on(Var v) const;
    bool is_const() const { return kind() == Kind::constant; }
    const Number* constant() const;
    bool is_zero() const;
    bool is_one() const;
    const Expr& arg(std::size_t i = 0) const;
    std::size_t hash() const;

private:
    std::shared_ptr<const Node> p_;
};

struct Node {
    Kind kind = Kind::constant;
    Fn fn = Fn::abs;
    Var var = Var::t;
    Number value;
    std::vector<Expr> args;
    bool has_t = false, has_x = false;
    std::size_t hash = 0;
};

// leaves
Expr num(std::int64_t v);
Expr num(const Number& v);
Expr rat(std::int64_t p, std::int64_t q);
Expr real(double v);  // exact when v is a small rational
Expr var(Var v);
inline Expr t_() { return var(Var::t); }
inline Expr x_() { return var(Var::x); }

// smart constructors: fold constants and 0/1 identities, merge powers, fuse sign*abs
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);
Expr apply(Fn f, const Expr& a);
inline Expr abs(const Expr& a) { return apply(Fn::abs, a); }
inline Expr sign(const Expr& a) { return apply(Fn::sign, a); }
inline Expr exp(const Expr& a) { return apply(Fn::exp, a); }
inline Expr ln(const Expr& a) { return apply(Fn::ln, a); }
inline Expr sin(const Expr& a) { return apply(Fn::sin, a); }
inline Expr cos(const Expr& a) { return apply(Fn::cos, a); }
inline Expr tan(const Expr& a) { return apply(Fn::tan, a); }
inline Expr atan(const Expr& a) { return apply(Fn::atan, a); }
inline Expr sqrt(const Expr& a) { return apply(Fn::sqrt, a); }
Expr quad(const Expr& integrand, const Expr& lower, const Expr& upper);
Expr inverse(const Expr& F, const Expr& lo, const Expr& hi, const Expr& arg);

const char* fn_name(Fn f);

bool same(const Expr& a, const Expr& b);  // structural equality
std::size_t node_count(const Expr& e);

Expr differentiate(const Expr& e, Var v);
Expr differentiate(const Expr& e, Var v, int order);
Expr substitute(const Expr& e, Var v, const Expr& replacement);

// ln evaluates as ln|.|; rational powers with odd denominator take the real root.
double evaluate(const Expr& e, double t, double x);

// Evaluates many expressions at one point, sharing common subexpressions.
class Evaluator {
public:
    Evaluator(double t, double x) : t_(t), x_(x) {}
    double operator()(const Expr& e);

private:
    double t_, x_;
    std::unordered_map<const Node*, double> cache_;
};

// Subexpressions whose zeros are singular points (denominators, ln/sign
// arguments, bases of negative or fractional powers, cos under tan).
std::vector<Expr> exclusions(const Expr& e);

std::string print(const Expr& e);
Expr parse_expression(std::string_view text, int line = 1);

}  // namespace bkdv
