#include "bkdv/transform.hpp"

#include <cmath>
#include <functional>
#include <unordered_set>

namespace bkdv {

namespace {

Expr dt(const Expr& e) { return differentiate(e, Var::t); }
Expr dx(const Expr& e) { return differentiate(e, Var::x); }

}  // namespace

Expr bell(int n, int k, const std::vector<Expr>& d) {
    // B_{n,k} = sum_{i=1}^{n-k+1} C(n-1, i-1) d[i] B_{n-i,k-1}, tabulated bottom-up
    std::vector<std::vector<Expr>> tab(n + 1, std::vector<Expr>(k + 1, num(0)));
    tab[0][0] = num(1);
    for (int nn = 1; nn <= n; ++nn) {
        for (int kk = 1; kk <= std::min(nn, k); ++kk) {
            Expr s = num(0);
            std::int64_t binom = 1;  // C(nn-1, i-1)
            for (int i = 1; i <= nn - kk + 1; ++i) {
                if (i > 1) binom = binom * (nn - i + 1) / (i - 1);
                if (!tab[nn - i][kk - 1].is_zero()) s = s + num(binom) * d.at(i) * tab[nn - i][kk - 1];
            }
            tab[nn][kk] = s;
        }
    }
    return tab[n][k];
}

namespace {

struct Components {
    Expr T, Tt, Ttt, X1, X1t, X0, X0t, p, q, pt, qt;  // p = X1_t/T_t, q = X0_t/T_t
};

Components components(const FiberTransformation& tr, const std::optional<Expr>& time_map) {
    Components c;
    Expr Tt = dt(tr.T), X1t = dt(tr.X1), X0t = dt(tr.X0);
    Expr p = X1t / Tt, q = X0t / Tt;
    auto at = [&](const Expr& e) { return time_map ? substitute(e, Var::t, *time_map) : e; };
    c.T = at(tr.T);
    c.Tt = at(Tt);
    c.Ttt = at(dt(Tt));
    c.X1 = at(tr.X1);
    c.X1t = at(X1t);
    c.X0 = at(tr.X0);
    c.X0t = at(X0t);
    c.p = at(p);
    c.q = at(q);
    c.pt = at(dt(p));
    c.qt = at(dt(q));
    return c;
}

Box image_of(const Box& src, const Expr& X1, const Expr& X0) {
    Box out;
    out.t = src.t;
    out.x.clear();
    for (const auto& iv : src.x) {
        double lo = -INFINITY, hi = INFINITY;
        for (int k = 0; k <= 20; ++k) {
            double s = src.t.lo + src.t.length() * k / 20.0;
            Evaluator ev(s, 0);
            double a = ev(X1), b = ev(X0);
            double e1 = a * iv.lo + b, e2 = a * iv.hi + b;
            lo = std::max(lo, std::min(e1, e2));
            hi = std::min(hi, std::max(e1, e2));
        }
        if (std::isfinite(lo) && std::isfinite(hi) && hi > lo) out.x.push_back({lo, hi});
    }
    if (out.x.empty()) throw DomainError("domain collapse: the transformed x-range is empty");
    return out;
}

}  // namespace

TimeDependentReducedEquation apply_reduced(const TimeDependentReducedEquation& eq, const FiberTransformation& tr) {
    Components c = components(tr, eq.time_map);
    const Expr x = x_();
    const Expr xi = (x - c.X0) / c.X1;
    auto pull = [&](const Expr& e) { return substitute(e, Var::x, xi); };

    TimeDependentReducedEquation out;
    out.order = eq.order;
    out.A.assign(eq.order + 1, num(0));
    for (int j = 2; j <= eq.order; ++j) out.A[j] = pow(c.X1, num(j)) / c.Tt * pull(eq.A[j]);
    Expr A0 = (pull(eq.A[0]) + num(2) * c.X1t / c.X1 - c.Ttt / c.Tt) / c.Tt;
    out.A[0] = A0;
    out.B = c.X1 / pow(c.Tt, num(2)) * pull(eq.B) + c.pt / c.Tt * xi + c.qt / c.Tt - (c.p * xi + c.q) * A0;
    out.time_map = c.T;
    out.domain = image_of(eq.domain, c.X1, c.X0);
    return out;
}

TimeDependentReducedEquation apply_reduced(const ReducedEquation& eq, const FiberTransformation& tr) {
    return apply_reduced(TimeDependentReducedEquation(eq), tr);
}

Expr pushforward(const FiberTransformation& tr, const Expr& u, const std::optional<Expr>& source_time_map) {
    Components c = components(tr, source_time_map);
    const Expr xi = (x_() - c.X0) / c.X1;
    return c.X1 / c.Tt * substitute(u, Var::x, xi) + c.p * xi + c.q;
}

std::optional<ReducedEquation> as_time_independent(const TimeDependentReducedEquation& eq, double tol,
                                                   std::size_t n) {
    std::vector<Expr> coeffs(eq.A.begin(), eq.A.end());
    coeffs.push_back(eq.B);
    std::vector<Expr> ders;
    for (const auto& c : coeffs) ders.push_back(dt(c));
    auto excl = equation_exclusions(eq);
    auto pts = sample_points(eq.domain, n, default_seed(), [&](double t, double x) {
        return clear_of_exclusions(excl, t, x);
    });
    for (auto [t, x] : pts) {
        Evaluator ev(t, x);
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            double v = ev(coeffs[i]), d = ev(ders[i]);
            if (!std::isfinite(v) || !std::isfinite(d)) return std::nullopt;
            if (std::fabs(d) > tol * (1 + std::fabs(v))) return std::nullopt;
        }
    }
    const Expr s0 = real(0.5 * (eq.domain.t.lo + eq.domain.t.hi));
    std::vector<Expr> A;
    for (const auto& a : eq.A) A.push_back(substitute(a, Var::t, s0));
    ReducedEquation out(eq.order, A, substitute(eq.B, Var::t, s0), eq.domain);
    return out;
}

std::optional<TimeDependentReducedEquation> to_target_time(const TimeDependentReducedEquation& eq) {
    if (!eq.time_map) return eq;
    Expr g;
    try {
        g = inverse_function(*eq.time_map, eq.domain.t);
    } catch (const DomainError&) {
        return std::nullopt;
    }
    TimeDependentReducedEquation out = eq;
    for (auto& a : out.A) a = substitute(a, Var::t, g);
    out.B = substitute(eq.B, Var::t, g);
    out.time_map.reset();
    double a = evaluate(*eq.time_map, eq.domain.t.lo, 0), b = evaluate(*eq.time_map, eq.domain.t.hi, 0);
    out.domain.t = {std::min(a, b), std::max(a, b)};
    return out;
}

FiberTransformation compose(const FiberTransformation& tr2, const FiberTransformation& tr1) {
    auto at = [&](const Expr& e) { return substitute(e, Var::t, tr1.T); };
    Expr X1b = at(tr2.X1);
    return {at(tr2.T), X1b * tr1.X1, X1b * tr1.X0 + at(tr2.X0)};
}

// ---- inversion ----

namespace {

std::optional<std::pair<Expr, Expr>> affine_in(const Expr& e, const Expr& G) {
    if (same(e, G)) return std::make_pair(num(1), num(0));
    if (!e.depends_on(Var::t)) return std::make_pair(num(0), e);
    const Node& n = e.node();
    switch (n.kind) {
        case Kind::add:
        case Kind::sub: {
            auto a = affine_in(n.args[0], G), b = affine_in(n.args[1], G);
            if (!a || !b) return std::nullopt;
            if (n.kind == Kind::add) return std::make_pair(a->first + b->first, a->second + b->second);
            return std::make_pair(a->first - b->first, a->second - b->second);
        }
        case Kind::neg: {
            auto a = affine_in(n.args[0], G);
            if (!a) return std::nullopt;
            return std::make_pair(-a->first, -a->second);
        }
        case Kind::mul: {
            const Expr &l = n.args[0], &r = n.args[1];
            if (!l.depends_on(Var::t)) {
                auto a = affine_in(r, G);
                if (!a) return std::nullopt;
                return std::make_pair(l * a->first, l * a->second);
            }
            if (!r.depends_on(Var::t)) {
                auto a = affine_in(l, G);
                if (!a) return std::nullopt;
                return std::make_pair(a->first * r, a->second * r);
            }
            return std::nullopt;
        }
        case Kind::div:
            if (!n.args[1].depends_on(Var::t)) {
                auto a = affine_in(n.args[0], G);
                if (!a) return std::nullopt;
                return std::make_pair(a->first / n.args[1], a->second / n.args[1]);
            }
            return std::nullopt;
        default: return std::nullopt;
    }
}

struct PathInverter {
    double t_ref;

    double ref(const Expr& e) const { return evaluate(e, t_ref, 0); }

    // returns y(s) with f(y) = w
    Expr solve(const Expr& f, const Expr& w) {
        if (!f.depends_on(Var::t)) throw DomainError("time map is constant");
        const Node& n = f.node();
        auto dep = [](const Expr& e) { return e.depends_on(Var::t); };
        switch (n.kind) {
            case Kind::variable: return w;
            case Kind::add:
                if (!dep(n.args[1])) return solve(n.args[0], w - n.args[1]);
                if (!dep(n.args[0])) return solve(n.args[1], w - n.args[0]);
                break;
            case Kind::sub:
                if (!dep(n.args[1])) return solve(n.args[0], w + n.args[1]);
                if (!dep(n.args[0])) return solve(n.args[1], n.args[0] - w);
                break;
            case Kind::mul:
                if (!dep(n.args[1])) return solve(n.args[0], w / n.args[1]);
                if (!dep(n.args[0])) return solve(n.args[1], w / n.args[0]);
                break;
            case Kind::div:
                if (!dep(n.args[1])) return solve(n.args[0], w * n.args[1]);
                if (!dep(n.args[0])) return solve(n.args[1], n.args[0] / w);
                return mobius(n.args[0], n.args[1], w);
            case Kind::neg: return solve(n.args[0], -w);
            case Kind::pow: {
                const Expr &b = n.args[0], &p = n.args[1];
                if (!dep(p)) {
                    double bref = ref(b);
                    Expr root = pow(abs(w), num(1) / p);
                    return solve(b, bref < 0 ? -root : root);
                }
                if (!dep(b)) return solve(p, ln(w) / ln(b));
                break;
            }
            case Kind::func: {
                const Expr& a = n.args[0];
                switch (n.fn) {
                    case Fn::exp: return solve(a, ln(w));
                    case Fn::ln: return solve(a, ref(a) < 0 ? -exp(w) : exp(w));
                    case Fn::sqrt: return solve(a, pow(w, num(2)));
                    case Fn::abs: return solve(a, ref(a) < 0 ? -w : w);
                    case Fn::atan: return solve(a, tan(w));
                    case Fn::tan: {
                        double ar = ref(a);
                        double k = std::round((ar - std::atan(std::tan(ar))) / M_PI);
                        Expr base = atan(w);
                        if (k != 0) base = base + real(k) * real(M_PI);
                        return solve(a, base);
                    }
                    default: break;
                }
                break;
            }
            default: break;
        }
        throw DomainError("time map is not in an invertible closed-form family");
    }

    Expr mobius(const Expr& a, const Expr& b, const Expr& w) {
        std::vector<Expr> cands;
        std::unordered_set<const Node*> seen;
        std::function<void(const Expr&)> walk = [&](const Expr& e) {
            if (!e.depends_on(Var::t) || !seen.insert(e.id()).second) return;
            cands.push_back(e);
            for (const auto& c : e.node().args) walk(c);
        };
        walk(a);
        for (const auto& G : cands) {
            auto pa = affine_in(a, G), pb = affine_in(b, G);
            if (!pa || !pb) continue;
            // (p1 G + q1) / (p2 G + q2) = w
            Expr den = pa->first - w * pb->first;
            if (den.is_zero()) continue;
            return solve(G, (w * pb->second - pa->second) / den);
        }
        throw DomainError("quotient is not a Möbius map of a single invertible layer");
    }
};

}  // namespace

Expr inverse_function(const Expr& f, const Interval& domain) {
    PathInverter inv{0.5 * (domain.lo + domain.hi)};
    Expr g = inv.solve(f, t_());
    for (int k = 0; k <= 4; ++k) {
        double s = domain.lo + domain.length() * (0.1 + 0.2 * k);
        double v = evaluate(f, s, 0);
        double back = evaluate(g, v, 0);
        if (!(std::fabs(back - s) <= 1e-8 * (1 + std::fabs(s))))
            throw DomainError("inverse leaves the branch of the time map on the domain");
    }
    return g;
}

FiberTransformation invert(const FiberTransformation& tr, const Interval& t_domain) {
    Expr g = inverse_function(tr.T, t_domain);
    Expr X1g = substitute(tr.X1, Var::t, g);
    Expr X0g = substitute(tr.X0, Var::t, g);
    return {g, num(1) / X1g, -X0g / X1g};
}

Box image_box(const Box& src, const FiberTransformation& tr) { return image_of(src, tr.X1, tr.X0); }

// ---- stationary class ----

StationaryGeneralEquation apply_stationary(const StationaryGeneralEquation& eq, const GaugeTransformation& g) {
    const int r = eq.order;
    std::vector<Expr> Xd(r + 1, num(0)), Ud(r + 1, num(0));
    Xd[0] = g.X;
    Ud[0] = g.U0;
    for (int k = 1; k <= r; ++k) {
        Xd[k] = dx(Xd[k - 1]);
        Ud[k] = dx(Ud[k - 1]);
    }
    const Expr c1 = real(g.c1), c3 = real(g.c3);
    StationaryGeneralEquation out;
    out.order = r;
    out.A.assign(r + 1, num(0));
    out.C = eq.C * Xd[1] / (c1 * c3);
    for (int m = 2; m <= r; ++m) {
        Expr s = num(0);
        for (int k = m; k <= r; ++k) s = s + eq.A[k] * bell(k, m, Xd);
        out.A[m] = s / c1;
    }
    Expr a1 = eq.C * Xd[1] * g.U0 / c3;
    for (int k = 1; k <= r; ++k) a1 = a1 + eq.A[k] * Xd[k];
    out.A[1] = a1 / c1;
    out.A[0] = (eq.A[0] + eq.C * Ud[1] / c3) / c1;
    Expr b = c3 * eq.B - eq.A[0] * g.U0 - eq.C * g.U0 * Ud[1] / c3;
    for (int k = 1; k <= r; ++k) b = b - eq.A[k] * Ud[k];
    out.B = b / c1;

    auto pull = [&](const Expr& e) { return substitute(e, Var::x, g.Xinv); };
    out.C = pull(out.C);
    for (auto& a : out.A) a = pull(a);
    out.B = pull(out.B);

    out.domain.t = {eq.domain.t.lo * g.c1, eq.domain.t.hi * g.c1};
    if (out.domain.t.lo > out.domain.t.hi) std::swap(out.domain.t.lo, out.domain.t.hi);
    out.domain.x.clear();
    for (const auto& iv : eq.domain.x) {
        double a = evaluate(g.X, 0, iv.lo), b2 = evaluate(g.X, 0, iv.hi);
        out.domain.x.push_back({std::min(a, b2), std::max(a, b2)});
    }
    return out;
}

GaugeTransformation invert(const GaugeTransformation& g) {
    GaugeTransformation h;
    h.X = g.Xinv;
    h.Xinv = g.X;
    h.c1 = 1 / g.c1;
    h.c3 = 1 / g.c3;
    h.U0 = -substitute(g.U0, Var::x, g.Xinv) / real(g.c3);
    return h;
}

Expr pushforward(const GaugeTransformation& g, const Expr& u) {
    Expr us = substitute(substitute(u, Var::t, t_() / real(g.c1)), Var::x, g.Xinv);
    return real(g.c3) * us + substitute(g.U0, Var::x, g.Xinv);
}

StationaryGeneralEquation as_stationary(const ReducedEquation& eq) {
    StationaryGeneralEquation s;
    s.order = eq.order;
    s.C = num(1);
    s.A = eq.A;
    s.A[1] = num(0);
    s.B = eq.B;
    s.domain = eq.domain;
    return s;
}

namespace {

// X = integral dx / C and its inverse; exact for constant, power and exponential C.
std::pair<Expr, Expr> primitive_of_reciprocal(const Expr& C, const Box& dom) {
    const Expr x = x_();
    double lo = dom.x.front().lo, hi = dom.x.front().hi;
    for (const auto& iv : dom.x) {
        lo = std::min(lo, iv.lo);
        hi = std::max(hi, iv.hi);
    }
    std::vector<double> xs;
    for (int i = 0; i < 16; ++i) xs.push_back(lo + (hi - lo) * (i + 0.5) / 16);
    Expr dC = dx(C);
    std::vector<double> cv, dv;
    for (double v : xs) {
        cv.push_back(evaluate(C, 0, v));
        dv.push_back(evaluate(dC, 0, v));
    }
    auto constant_ratio = [&](const std::function<double(std::size_t)>& f, double& mean) {
        mean = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) mean += f(i);
        mean /= static_cast<double>(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (std::fabs(f(i) - mean) > 1e-11 * (1 + std::fabs(mean))) return false;
        return true;
    };
    double m;
    if (!C.depends_on(Var::x)) {
        return {x / C, C * x};
    }
    if (lo > 0 && constant_ratio([&](std::size_t i) { return xs[i] * dv[i] / cv[i]; }, m)) {
        Expr p = real(m);
        double kk = 0;
        constant_ratio([&](std::size_t i) { return cv[i] / std::pow(xs[i], p.constant()->value()); }, kk);
        Expr k = real(kk);
        if (sample_equiv(C, k * pow(x, p), dom, 32, 1e-12).equal) {
            if (p.is_one()) return {ln(x) / k, exp(k * x)};
            Expr q = num(1) - p;
            return {pow(x, q) / (k * q), pow(k * q * x, num(1) / q)};
        }
    }
    if (constant_ratio([&](std::size_t i) { return dv[i] / cv[i]; }, m)) {
        Expr a = real(m);
        double kk = 0;
        constant_ratio([&](std::size_t i) { return cv[i] / std::exp(a.constant()->value() * xs[i]); }, kk);
        Expr k = real(kk);
        if (sample_equiv(C, k * exp(a * x), dom, 32, 1e-12).equal)
            return {-exp(-a * x) / (k * a), -ln(-k * a * x) / a};
    }
    Expr F = quad(num(1) / C, real(lo), x);
    return {F, inverse(F, real(lo), real(hi), x)};
}

}  // namespace

std::pair<ReducedEquation, GaugeTransformation> gauge_stationary(const StationaryGeneralEquation& eq, int max_order) {
    if (eq.order < 2) throw DomainError("order must be at least 2");
    if (eq.order > max_order) throw DomainError("order exceeds the configured cap of " + std::to_string(max_order));
    auto pts = sample_points(eq.domain, 200, default_seed());
    int sgn = 0;
    for (auto [t, x] : pts) {
        double c = evaluate(eq.C, t, x);
        if (!std::isfinite(c) || c == 0) throw DomainError("C vanishes or is singular on the domain");
        int s = c > 0 ? 1 : -1;
        if (sgn != 0 && s != sgn) throw DomainError("C changes sign on the domain");
        sgn = s;
    }
    auto [X, Xinv] = primitive_of_reciprocal(eq.C, eq.domain);
    GaugeTransformation g;
    g.X = X;
    g.Xinv = Xinv;
    Expr Xk = num(1) / eq.C;  // X'
    Expr U0 = num(0);
    for (int k = 1; k <= eq.order; ++k) {
        U0 = U0 - eq.A[k] * Xk;
        Xk = dx(Xk);
    }
    g.U0 = U0;
    // quick inversion sanity check
    for (auto [t, x] : sample_points(eq.domain, 8, default_seed())) {
        double back = evaluate(Xinv, t, evaluate(X, t, x));
        if (!(std::fabs(back - x) <= 1e-9 * (1 + std::fabs(x)))) throw DomainError("inversion of X failed");
    }
    StationaryGeneralEquation s = apply_stationary(eq, g);
    std::vector<Expr> A = s.A;
    A[1] = num(0);
    ReducedEquation out(eq.order, A, s.B, s.domain);
    return {out, g};
}

// ---- classifying conditions ----

ClassifyingResiduals classifying_residuals(const FiberTransformation& tr, const ReducedEquation& target,
                                           A0Rule form) {
    const Expr x = x_();
    const Expr Tt = dt(tr.T), Ttt = dt(Tt), X1 = tr.X1, X1t = dt(X1), X0t = dt(tr.X0);
    const Expr V = X1t * x + X0t;  // source x
    const Expr xi = (x - tr.X0) / X1;
    auto pull = [&](const Expr& e) { return substitute(e, Var::x, xi); };
    const Expr Vs = pull(V);

    ClassifyingResiduals out;
    out.a.resize(target.order + 1);
    for (int j = 2; j <= target.order; ++j) {
        const Expr& A = target.A[j];
        Expr t1 = Vs * dx(A), t2 = (Ttt / Tt - num(j) * X1t / X1) * A;
        out.a[j] = {t1 + t2, num(0), abs(t1) + abs(t2)};
    }
    {
        const Expr& A0 = target.A[0];
        Expr t1 = Vs * dx(A0), t2 = Ttt / Tt * A0;
        Expr r = dt(num(2) * X1t / X1 - Ttt / Tt) / Tt;
        out.a0 = {t1 + t2, r, abs(t1) + abs(t2) + abs(r)};
    }
    {
        const Expr &A0 = target.A[0], &B = target.B;
        Expr l1 = Vs * dx(B), l2 = (num(2) * Ttt / Tt - X1t / X1) * B;
        Expr k1 = form == A0Rule::derived ? num(1) / Tt : Tt / X1;
        Expr r1 = -(k1 * pow(Vs, num(2)) * dx(A0));
        Expr r2 = -(X1 / pow(Tt, num(2)) * pull(dt(Tt * V / X1)) * A0);
        Expr r3 = X1 / pow(Tt, num(2)) * pull(dt(Tt / X1 * dt(V / Tt)));
        out.b = {l1 + l2, r1 + r2 + r3, abs(l1) + abs(l2) + abs(r1) + abs(r2) + abs(r3)};
    }
    return out;
}

}  // namespace bkdv
