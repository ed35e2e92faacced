#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bkdv/expr.hpp"
#include "bkdv/model.hpp"

namespace bkdv {

// t~ = T(t), x~ = X1(t) x + X0(t), u~ = X1/T_t u + X1_t/T_t x + X0_t/T_t
struct FiberTransformation {
    Expr T = t_();
    Expr X1 = num(1);
    Expr X0 = num(0);

    static FiberTransformation identity() { return {}; }
};

// t~ = c1 t, x~ = X(x), u~ = c3 u + U0(x); Xinv is X^{-1} written in x~ (placed in the variable x).
struct GaugeTransformation {
    Expr X = x_();
    Expr U0 = num(0);
    double c1 = 1, c3 = 1;
    Expr Xinv = x_();
};

// Faa di Bruno: partial Bell polynomial B_{n,k}(d[1], ..., d[n-k+1]); d[0] is ignored.
Expr bell(int n, int k, const std::vector<Expr>& d);

TimeDependentReducedEquation apply_reduced(const TimeDependentReducedEquation& eq, const FiberTransformation& tr);
TimeDependentReducedEquation apply_reduced(const ReducedEquation& eq, const FiberTransformation& tr);

// Pushforward of u (a function of the source time parameter and x) to a function of (s, x~).
Expr pushforward(const FiberTransformation& tr, const Expr& u, const std::optional<Expr>& source_time_map = {});

// Freezes the time parameter when every coefficient is time independent
// (checked on `n` samples); returns nothing otherwise.
std::optional<ReducedEquation> as_time_independent(const TimeDependentReducedEquation& eq, double tol = 1e-9,
                                                   std::size_t n = 64);

// Rewrites the equation in target time when its time map has a closed-form inverse.
std::optional<TimeDependentReducedEquation> to_target_time(const TimeDependentReducedEquation& eq);

FiberTransformation compose(const FiberTransformation& tr2, const FiberTransformation& tr1);

// Inverse function g of f (both in t) with f(g(s)) = s near the image of `domain`.
// Handles affine, Möbius, exp, ln|.|, powers, tan, atan and sqrt layers. Throws DomainError otherwise.
Expr inverse_function(const Expr& f, const Interval& domain);

FiberTransformation invert(const FiberTransformation& tr, const Interval& t_domain = Interval{0.1, 0.9});

// Image of a source box under tr: t-range stays the source time parameter, x-range is the
// part of the x~ line covered at every sampled time.
Box image_box(const Box& src, const FiberTransformation& tr);

// ---- stationary class and its gauge ----

// General G~ action on the stationary class (Faa di Bruno chain rule); output in x~.
StationaryGeneralEquation apply_stationary(const StationaryGeneralEquation& eq, const GaugeTransformation& g);
GaugeTransformation invert(const GaugeTransformation& g);
Expr pushforward(const GaugeTransformation& g, const Expr& u);

std::pair<ReducedEquation, GaugeTransformation> gauge_stationary(const StationaryGeneralEquation& eq,
                                                                 int max_order = 8);

StationaryGeneralEquation as_stationary(const ReducedEquation& eq);

// ---- classifying conditions ----

struct ResidualPair {
    Expr lhs, rhs, scale;  // scale: sum of |terms|, used to normalize the residual
};

struct ClassifyingResiduals {
    std::vector<ResidualPair> a;  // index j = 2..r (0, 1 unused)
    ResidualPair a0, b;
};

enum class A0Rule { derived, printed };

ClassifyingResiduals classifying_residuals(const FiberTransformation& tr, const ReducedEquation& target,
                                           A0Rule form = A0Rule::derived);

}  // namespace bkdv
