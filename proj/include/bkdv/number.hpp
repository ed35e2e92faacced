#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace bkdv {

// Exact rational with 64-bit parts; arithmetic reports overflow instead of wrapping.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static std::optional<Rational> make(std::int64_t p, std::int64_t q);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool is_integer() const { return den == 1; }
    bool operator==(const Rational&) const = default;
};

std::optional<Rational> add(const Rational& a, const Rational& b);
std::optional<Rational> sub(const Rational& a, const Rational& b);
std::optional<Rational> mul(const Rational& a, const Rational& b);
std::optional<Rational> div(const Rational& a, const Rational& b);
std::optional<Rational> ipow(const Rational& a, std::int64_t n);

// Either an exact rational or a double. Exactness is sticky only while
// every operand is exact and nothing overflows.
class Number {
public:
    Number() = default;
    static Number integer(std::int64_t v) { return Number(Rational{v, 1}); }
    static Number rational(const Rational& q) { return Number(q); }
    static Number real(double v);
    // Recovers a small exact rational when v is one (den <= 1e6), else keeps v.
    static Number from_double(double v);

    bool exact() const { return exact_; }
    const Rational& q() const { return q_; }
    double value() const { return exact_ ? q_.value() : d_; }
    bool is_zero() const { return exact_ ? q_.num == 0 : d_ == 0.0; }
    bool is_one() const { return exact_ ? (q_.num == 1 && q_.den == 1) : d_ == 1.0; }
    bool is_minus_one() const { return exact_ ? (q_.num == -1 && q_.den == 1) : d_ == -1.0; }
    bool is_integer() const;
    bool negative() const { return value() < 0; }

    Number operator-() const;
    friend Number operator+(const Number& a, const Number& b);
    friend Number operator-(const Number& a, const Number& b);
    friend Number operator*(const Number& a, const Number& b);
    friend Number operator/(const Number& a, const Number& b);
    bool same(const Number& o) const;

    std::string str() const;

private:
    explicit Number(const Rational& q) : exact_(true), q_(q) {}
    bool exact_ = true;
    Rational q_{};
    double d_ = 0.0;
};

std::optional<Number> pow(const Number& base, const Number& exponent);

}  // namespace bkdv
