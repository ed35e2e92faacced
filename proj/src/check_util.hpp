#pragma once

// helpers shared by the check and audit sources

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "bkdv/sampling.hpp"
#include "bkdv/verify.hpp"

namespace bkdv::detail {

inline Expr R(double v) { return real(v); }
inline Expr dt(const Expr& e) { return differentiate(e, Var::t); }

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline CheckReport base(const std::string& check, const std::string& tag, double tol) {
    CheckReport r;
    r.check = check;
    r.tag = tag;
    r.tol = tol;
    return r;
}

inline void note_worst(CheckReport& r, double d, double t, double x) {
    if (std::isnan(r.worst_t) || d > r.value) {
        r.value = std::max(r.value, d);
        r.worst_t = t;
        r.worst_x = x;
    }
}

inline std::vector<Expr> all_exclusions(const std::vector<Expr>& es) {
    std::vector<Expr> out;
    for (const auto& e : es) {
        auto v = exclusions(e);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

inline std::vector<double> t_grid(const Interval& dom, std::size_t n) {
    std::vector<double> ts;
    for (std::size_t k = 0; k < n; ++k) ts.push_back(dom.lo + dom.length() * (k + 0.5) / static_cast<double>(n));
    return ts;
}

// max deviation between two t-only expressions on a grid, relative to the largest of
// |lhs|, |rhs| and the summed magnitude of the given terms (cancellation between large terms)
inline CheckReport compare_in_t(CheckReport r, const Expr& lhs, const Expr& rhs, const Interval& dom, std::size_t n,
                         const std::vector<Expr>& terms = {}) {
    r.value = 0;
    for (double t : t_grid(dom, n)) {
        Evaluator ev(t, 0);
        double a = ev(lhs), b = ev(rhs), s = 0;
        for (auto& e : terms) s += std::fabs(ev(e));
        double d = std::isfinite(a) && std::isfinite(b) && std::isfinite(s)
                       ? std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b), s})
                       : INFINITY;
        note_worst(r, d, t, NAN);
    }
    r.pass = r.value <= r.tol;
    return r;
}

inline double term_scale(const std::vector<Expr>& terms, double t, double x) {
    Evaluator ev(t, x);
    double s = 0;
    for (auto& e : terms) s += std::fabs(ev(e));
    return s;
}

// relative deviation, but measured against the residual's term magnitude when that is larger:
// residuals of steep equations are differences of huge terms and carry their rounding
inline double scaled_deviation(double a, double b, double scale) {
    return std::fabs(a - b) / std::max(1 + std::min(std::fabs(a), std::fabs(b)), scale);
}

inline std::vector<Expr> schwarzian_terms(const Expr& T) {
    Expr Tt = dt(T);
    Expr q = dt(Tt) / Tt;
    return {dt(q), pow(q, num(2)) / num(2)};
}

inline Expr schwarzian_part(const Expr& T) {
    Expr Tt = dt(T);
    Expr q = dt(Tt) / Tt;
    return dt(q) - pow(q, num(2)) / num(2);
}

}  // namespace bkdv::detail
