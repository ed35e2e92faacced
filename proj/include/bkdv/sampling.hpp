#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bkdv/expr.hpp"

namespace bkdv {

struct Interval {
    double lo = 0, hi = 0;
    double length() const { return hi - lo; }
    bool contains(double v) const { return v >= lo && v <= hi; }
};

// t-interval times a union of x-intervals.
struct Box {
    Interval t{0.1, 0.9};
    std::vector<Interval> x{{0.25, 2.0}};

    static Box standard() { return {}; }
    bool contains(double tv, double xv) const;
    double x_length() const;
    // maps (u, v) in [0,1)^2 onto the box
    std::pair<double, double> map(double u, double v) const;
};

// Global default seed for every quasi-random sampler (set by the CLI).
std::uint64_t default_seed();
void set_default_seed(std::uint64_t seed);

double halton(std::uint64_t index, unsigned base);

// Quasi-random points in the box (Halton bases 2 and 3, offset by the seed),
// rejecting points where `accept` is false. Throws DomainError if none survive.
std::vector<std::pair<double, double>> sample_points(const Box& box, std::size_t n, std::uint64_t seed,
                                                     const std::function<bool(double, double)>& accept = {});

// true when no exclusion subexpression of any listed expression is (nearly) zero at the point
bool clear_of_exclusions(const std::vector<Expr>& excl, double t, double x, double margin = 1e-9);

struct SampleReport {
    bool equal = false;
    double max_deviation = 0;
    double worst_t = 0, worst_x = 0;
    double worst_lhs = 0, worst_rhs = 0;
    std::size_t points = 0;
};

// Symmetric relative metric |e1 - e2| / (1 + min(|e1|, |e2|)).
double relative_deviation(double a, double b);

SampleReport sample_equiv(const Expr& e1, const Expr& e2, const Box& box, std::size_t n = 200,
                          double tol = 1e-10, std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace bkdv
