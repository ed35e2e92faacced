#include "bkdv/sampling.hpp"

#include <atomic>
#include <cmath>
#include <limits>

namespace bkdv {

namespace {
std::atomic<std::uint64_t> g_seed{0};
}

std::uint64_t default_seed() { return g_seed.load(); }
void set_default_seed(std::uint64_t seed) { g_seed.store(seed); }

bool Box::contains(double tv, double xv) const {
    if (!t.contains(tv)) return false;
    for (const auto& iv : x)
        if (iv.contains(xv)) return true;
    return false;
}

double Box::x_length() const {
    double s = 0;
    for (const auto& iv : x) s += iv.length();
    return s;
}

std::pair<double, double> Box::map(double u, double v) const {
    double tv = t.lo + u * t.length();
    double w = v * x_length();
    for (const auto& iv : x) {
        if (w <= iv.length()) return {tv, iv.lo + w};
        w -= iv.length();
    }
    return {tv, x.back().hi};
}

double halton(std::uint64_t index, unsigned base) {
    double f = 1, r = 0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

std::vector<std::pair<double, double>> sample_points(const Box& box, std::size_t n, std::uint64_t seed,
                                                     const std::function<bool(double, double)>& accept) {
    std::vector<std::pair<double, double>> pts;
    if (box.x.empty() || box.x_length() <= 0 || box.t.length() < 0) throw DomainError("empty sampling box");
    std::uint64_t idx = 1 + seed * 7919ULL;
    std::size_t tries = 0, limit = 50 * n + 100;
    while (pts.size() < n && tries < limit) {
        ++tries;
        auto p = box.map(halton(idx, 2), halton(idx, 3));
        ++idx;
        if (!accept || accept(p.first, p.second)) pts.push_back(p);
    }
    if (pts.empty() && n > 0) throw DomainError("domain exhausted: every sample point was excluded");
    return pts;
}

bool clear_of_exclusions(const std::vector<Expr>& excl, double t, double x, double margin) {
    Evaluator ev(t, x);
    for (const auto& g : excl) {
        double v = ev(g);
        if (!std::isfinite(v) || std::fabs(v) < margin) return false;
    }
    return true;
}

double relative_deviation(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::infinity();
    if (a == b) return 0;
    return std::fabs(a - b) / (1 + std::min(std::fabs(a), std::fabs(b)));
}

SampleReport sample_equiv(const Expr& e1, const Expr& e2, const Box& box, std::size_t n, double tol,
                          std::optional<std::uint64_t> seed) {
    auto excl = exclusions(e1);
    auto more = exclusions(e2);
    excl.insert(excl.end(), more.begin(), more.end());
    std::vector<double> v1, v2;
    auto accept = [&](double t, double x) {
        if (!clear_of_exclusions(excl, t, x)) return false;
        double a = evaluate(e1, t, x), b = evaluate(e2, t, x);
        if (!std::isfinite(a) || !std::isfinite(b)) return false;
        v1.push_back(a);
        v2.push_back(b);
        return true;
    };
    auto pts = sample_points(box, n, seed.value_or(default_seed()), accept);
    SampleReport rep;
    rep.points = pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double d = relative_deviation(v1[i], v2[i]);
        if (i == 0 || d > rep.max_deviation) {
            rep.max_deviation = d;
            rep.worst_t = pts[i].first;
            rep.worst_x = pts[i].second;
            rep.worst_lhs = v1[i];
            rep.worst_rhs = v2[i];
        }
    }
    rep.equal = rep.max_deviation <= tol;
    return rep;
}

}  // namespace bkdv
