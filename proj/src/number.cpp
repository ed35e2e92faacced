#include "bkdv/number.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

namespace bkdv {

namespace {

using i128 = __int128;

std::optional<Rational> normalize(i128 p, i128 q) {
    if (q == 0) return std::nullopt;
    if (q < 0) { p = -p; q = -q; }
    i128 a = p < 0 ? -p : p, b = q;
    while (b != 0) { i128 t = a % b; a = b; b = t; }
    if (a > 1) { p /= a; q /= a; }
    constexpr i128 lim = INT64_MAX;
    if (p > lim || p < -lim || q > lim) return std::nullopt;
    return Rational{static_cast<std::int64_t>(p), static_cast<std::int64_t>(q)};
}

}  // namespace

std::optional<Rational> Rational::make(std::int64_t p, std::int64_t q) { return normalize(p, q); }

std::optional<Rational> add(const Rational& a, const Rational& b) {
    return normalize(i128(a.num) * b.den + i128(b.num) * a.den, i128(a.den) * b.den);
}
std::optional<Rational> sub(const Rational& a, const Rational& b) {
    return normalize(i128(a.num) * b.den - i128(b.num) * a.den, i128(a.den) * b.den);
}
std::optional<Rational> mul(const Rational& a, const Rational& b) {
    return normalize(i128(a.num) * b.num, i128(a.den) * b.den);
}
std::optional<Rational> div(const Rational& a, const Rational& b) {
    if (b.num == 0) return std::nullopt;
    return normalize(i128(a.num) * b.den, i128(a.den) * b.num);
}
std::optional<Rational> ipow(const Rational& a, std::int64_t n) {
    if (n < 0) {
        if (a.num == 0) return std::nullopt;
        auto inv = div(Rational{1, 1}, a);
        if (!inv) return std::nullopt;
        return ipow(*inv, -n);
    }
    Rational r{1, 1}, b = a;
    while (n > 0) {
        if (n & 1) {
            auto m = mul(r, b);
            if (!m) return std::nullopt;
            r = *m;
        }
        n >>= 1;
        if (n > 0) {
            auto s = mul(b, b);
            if (!s) return std::nullopt;
            b = *s;
        }
    }
    return r;
}

Number Number::real(double v) {
    Number n;
    n.exact_ = false;
    n.d_ = v;
    return n;
}

Number Number::from_double(double v) {
    if (!std::isfinite(v)) return real(v);
    if (v == std::floor(v) && std::fabs(v) < 9e15) return integer(static_cast<std::int64_t>(v));
    // continued fractions, accept only when the rational rounds back to v exactly
    double x = v;
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    for (int i = 0; i < 40; ++i) {
        double a = std::floor(x);
        if (std::fabs(a) > 1e12) break;
        auto ai = static_cast<std::int64_t>(a);
        std::int64_t p2 = ai * p1 + p0, q2 = ai * q1 + q0;
        if (q2 > 1000000) break;
        if (static_cast<double>(p2) / static_cast<double>(q2) == v) {
            if (auto r = Rational::make(p2, q2)) return rational(*r);
            break;
        }
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        double f = x - a;
        if (f == 0) break;
        x = 1.0 / f;
    }
    return real(v);
}

bool Number::is_integer() const {
    if (exact_) return q_.den == 1;
    return std::isfinite(d_) && d_ == std::floor(d_);
}

Number Number::operator-() const {
    if (exact_) {
        if (auto r = Rational::make(-q_.num, q_.den)) return Number(*r);
        return real(-value());
    }
    return real(-d_);
}

Number operator+(const Number& a, const Number& b) {
    if (a.exact_ && b.exact_)
        if (auto r = add(a.q_, b.q_)) return Number(*r);
    return Number::real(a.value() + b.value());
}
Number operator-(const Number& a, const Number& b) {
    if (a.exact_ && b.exact_)
        if (auto r = sub(a.q_, b.q_)) return Number(*r);
    return Number::real(a.value() - b.value());
}
Number operator*(const Number& a, const Number& b) {
    if (a.exact_ && b.exact_)
        if (auto r = mul(a.q_, b.q_)) return Number(*r);
    return Number::real(a.value() * b.value());
}
Number operator/(const Number& a, const Number& b) {
    if (a.exact_ && b.exact_)
        if (auto r = div(a.q_, b.q_)) return Number(*r);
    return Number::real(a.value() / b.value());
}

bool Number::same(const Number& o) const {
    if (exact_ != o.exact_) return false;
    if (exact_) return q_ == o.q_;
    return d_ == o.d_ || (std::isnan(d_) && std::isnan(o.d_));
}

std::string Number::str() const {
    if (exact_) {
        if (q_.den == 1) return std::to_string(q_.num);
        return std::to_string(q_.num) + "/" + std::to_string(q_.den);
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d_);
    return buf;
}

std::optional<Number> pow(const Number& base, const Number& exponent) {
    if (base.exact() && exponent.exact() && exponent.q().den == 1) {
        if (auto r = ipow(base.q(), exponent.q().num)) return Number::rational(*r);
    }
    return std::nullopt;
}

}  // namespace bkdv
