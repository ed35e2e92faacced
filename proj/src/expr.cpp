#include "bkdv/expr.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <unordered_set>

namespace bkdv {

ParseError::ParseError(const std::string& msg, int l, int c)
    : std::runtime_error("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + msg),
      line(l), column(c) {}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t number_hash(const Number& n) {
    if (n.exact()) return mix(std::hash<std::int64_t>{}(n.q().num), std::hash<std::int64_t>{}(n.q().den));
    return mix(17, std::hash<double>{}(n.value()));
}

Expr make(Kind k, std::vector<Expr> args, Fn fn = Fn::abs) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->fn = fn;
    n->args = std::move(args);
    std::size_t h = mix(static_cast<std::size_t>(k) * 131 + static_cast<std::size_t>(fn), 7);
    for (const auto& a : n->args) h = mix(h, a.hash());
    n->hash = h;
    switch (k) {
        case Kind::quad:
            n->has_t = n->args[0].depends_on(Var::t) || n->args[1].depends_on(Var::t) ||
                       n->args[2].depends_on(Var::t);
            n->has_x = n->args[1].depends_on(Var::x) || n->args[2].depends_on(Var::x);
            break;
        case Kind::inverse:
            n->has_t = n->args[0].depends_on(Var::t) || n->args[3].depends_on(Var::t);
            n->has_x = n->args[3].depends_on(Var::x);
            break;
        default:
            for (const auto& a : n->args) {
                n->has_t = n->has_t || a.depends_on(Var::t);
                n->has_x = n->has_x || a.depends_on(Var::x);
            }
    }
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}

bool is_neg_const(const Expr& e) { return e.is_const() && e.constant()->negative(); }

std::pair<Expr, Expr> base_exponent(const Expr& e) {
    if (e.kind() == Kind::pow && e.arg(1).is_const()) return {e.arg(0), e.arg(1)};
    return {e, num(1)};
}

}  // namespace

// ---- Expr basics ----

Expr::Expr() : Expr(num(0)) {}
Expr::Expr(int v) : Expr(num(v)) {}

Kind Expr::kind() const { return p_->kind; }
bool Expr::depends_on(Var v) const { return v == Var::t ? p_->has_t : p_->has_x; }
const Number* Expr::constant() const { return p_->kind == Kind::constant ? &p_->value : nullptr; }
bool Expr::is_zero() const { return is_const() && p_->value.is_zero(); }
bool Expr::is_one() const { return is_const() && p_->value.is_one(); }
const Expr& Expr::arg(std::size_t i) const { return p_->args.at(i); }
std::size_t Expr::hash() const { return p_->hash; }

Expr num(const Number& v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::constant;
    n->value = v;
    n->hash = mix(1, number_hash(v));
    return Expr(std::shared_ptr<const Node>(std::move(n)));
}
Expr num(std::int64_t v) { return num(Number::integer(v)); }
Expr rat(std::int64_t p, std::int64_t q) {
    auto r = Rational::make(p, q);
    if (!r) throw DomainError("malformed rational");
    return num(Number::rational(*r));
}
Expr real(double v) { return num(Number::from_double(v)); }

Expr var(Var v) {
    static const Expr tv = [] {
        auto n = std::make_shared<Node>();
        n->kind = Kind::variable;
        n->var = Var::t;
        n->has_t = true;
        n->hash = 0x7431;
        return Expr(std::shared_ptr<const Node>(std::move(n)));
    }();
    static const Expr xv = [] {
        auto n = std::make_shared<Node>();
        n->kind = Kind::variable;
        n->var = Var::x;
        n->has_x = true;
        n->hash = 0x7832;
        return Expr(std::shared_ptr<const Node>(std::move(n)));
    }();
    return v == Var::t ? tv : xv;
}

const char* fn_name(Fn f) {
    switch (f) {
        case Fn::abs: return "abs";
        case Fn::sign: return "sign";
        case Fn::exp: return "exp";
        case Fn::ln: return "ln";
        case Fn::sin: return "sin";
        case Fn::cos: return "cos";
        case Fn::tan: return "tan";
        case Fn::atan: return "atan";
        case Fn::sqrt: return "sqrt";
    }
    return "?";
}

bool same(const Expr& a, const Expr& b) {
    if (a.id() == b.id()) return true;
    const Node& p = a.node();
    const Node& q = b.node();
    if (p.hash != q.hash || p.kind != q.kind || p.args.size() != q.args.size()) return false;
    switch (p.kind) {
        case Kind::constant: return p.value.same(q.value);
        case Kind::variable: return p.var == q.var;
        case Kind::func:
            if (p.fn != q.fn) return false;
            break;
        default: break;
    }
    for (std::size_t i = 0; i < p.args.size(); ++i)
        if (!same(p.args[i], q.args[i])) return false;
    return true;
}

std::size_t node_count(const Expr& e) {
    std::unordered_set<const Node*> seen;
    std::function<void(const Expr&)> walk = [&](const Expr& f) {
        if (!seen.insert(f.id()).second) return;
        for (const auto& a : f.node().args) walk(a);
    };
    walk(e);
    return seen.size();
}

// ---- smart constructors ----

Expr operator-(const Expr& a) {
    if (a.is_const()) return num(-*a.constant());
    if (a.kind() == Kind::neg) return a.arg(0);
    if (a.kind() == Kind::mul && a.arg(0).is_const()) return num(-*a.arg(0).constant()) * a.arg(1);
    return make(Kind::neg, {a});
}

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_const() && b.is_const()) return num(*a.constant() + *b.constant());
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (b.kind() == Kind::neg) return a - b.arg(0);
    if (is_neg_const(b)) return a - num(-*b.constant());
    if (a.kind() == Kind::neg) return b - a.arg(0);
    return make(Kind::add, {a, b});
}

Expr operator-(const Expr& a, const Expr& b) {
    if (a.is_const() && b.is_const()) return num(*a.constant() - *b.constant());
    if (b.is_zero()) return a;
    if (a.is_zero()) return -b;
    if (b.kind() == Kind::neg) return a + b.arg(0);
    if (is_neg_const(b)) return a + num(-*b.constant());
    if (same(a, b)) return num(0);
    return make(Kind::sub, {a, b});
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_const() && b.is_const()) return num(*a.constant() * *b.constant());
    if (a.is_zero() || b.is_zero()) return num(0);
    if (a.is_one()) return b;
    if (b.is_one()) return a;
    if (b.is_const()) return b * a;
    if (a.is_const() && a.constant()->is_minus_one()) return -b;
    if (a.is_const() && b.kind() == Kind::mul && b.arg(0).is_const())
        return num(*a.constant() * *b.arg(0).constant()) * b.arg(1);
    if (a.kind() == Kind::neg) return -(a.arg(0) * b);
    if (b.kind() == Kind::neg) return -(a * b.arg(0));
    // sign(f)*abs(f) = f
    if (a.kind() == Kind::func && b.kind() == Kind::func && same(a.arg(0), b.arg(0)) &&
        ((a.node().fn == Fn::sign && b.node().fn == Fn::abs) ||
         (a.node().fn == Fn::abs && b.node().fn == Fn::sign)))
        return a.arg(0);
    if (!a.is_const()) {
        auto [ba, ea] = base_exponent(a);
        auto [bb, eb] = base_exponent(b);
        if (same(ba, bb)) return pow(ba, ea + eb);
    }
    return make(Kind::mul, {a, b});
}

Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_zero()) throw DomainError("division by zero");
    if (a.is_zero()) return num(0);
    if (b.is_one()) return a;
    if (b.is_const() && b.constant()->is_minus_one()) return -a;
    if (a.is_const() && b.is_const()) return num(*a.constant() / *b.constant());
    if (a.kind() == Kind::neg) return -(a.arg(0) / b);
    if (b.kind() == Kind::neg) return -(a / b.arg(0));
    if (same(a, b)) return num(1);
    return make(Kind::div, {a, b});
}

Expr pow(const Expr& base, const Expr& e) {
    if (e.is_zero()) return num(1);
    if (e.is_one()) return base;
    if (base.is_one()) return num(1);
    if (base.is_const() && e.is_const()) {
        if (base.is_zero() && e.constant()->value() < 0) throw DomainError("zero to a negative power");
        if (auto r = pow(*base.constant(), *e.constant())) return num(*r);
    }
    if (base.is_zero() && e.is_const() && e.constant()->value() > 0) return num(0);
    if (base.kind() == Kind::pow && base.arg(1).is_const() && e.is_const()) {
        bool safe = e.constant()->is_integer() ||
                    (base.arg(0).kind() == Kind::func && base.arg(0).node().fn == Fn::abs);
        if (safe) return pow(base.arg(0), base.arg(1) * e);
    }
    return make(Kind::pow, {base, e});
}

Expr apply(Fn f, const Expr& a) {
    if (a.is_const()) {
        const Number& v = *a.constant();
        switch (f) {
            case Fn::abs: return num(v.negative() ? -v : v);
            case Fn::sign: return num(v.is_zero() ? 0 : (v.negative() ? -1 : 1));
            case Fn::exp: if (v.is_zero()) return num(1); break;
            case Fn::ln: if (v.is_one() || v.is_minus_one()) return num(0); break;
            case Fn::sin:
            case Fn::tan:
            case Fn::atan: if (v.is_zero()) return num(0); break;
            case Fn::cos: if (v.is_zero()) return num(1); break;
            case Fn::sqrt:
                if (v.exact() && !v.negative()) {
                    auto r = [](std::int64_t n) -> std::int64_t {
                        auto s = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(n))));
                        return s * s == n ? s : -1;
                    };
                    std::int64_t p = r(v.q().num), q = r(v.q().den);
                    if (p >= 0 && q > 0) return rat(p, q);
                }
                break;
        }
    }
    if (f == Fn::abs) {
        if (a.kind() == Kind::neg) return abs(a.arg(0));
        if (a.kind() == Kind::func && (a.node().fn == Fn::abs || a.node().fn == Fn::exp)) return a;
    }
    if (f == Fn::sign && a.kind() == Kind::func && a.node().fn == Fn::sign) return a;
    return make(Kind::func, {a}, f);
}

Expr quad(const Expr& integrand, const Expr& lower, const Expr& upper) {
    return make(Kind::quad, {integrand, lower, upper});
}

Expr inverse(const Expr& F, const Expr& lo, const Expr& hi, const Expr& arg) {
    return make(Kind::inverse, {F, lo, hi, arg, differentiate(F, Var::x)});
}

// ---- differentiation ----

namespace {

struct Differ {
    Var v;
    std::unordered_map<const Node*, Expr> memo;

    Expr operator()(const Expr& e) {
        if (!e.depends_on(v)) return num(0);
        auto it = memo.find(e.id());
        if (it != memo.end()) return it->second;
        Expr d = rule(e);
        memo.emplace(e.id(), d);
        return d;
    }

    Expr rule(const Expr& e) {
        const Node& n = e.node();
        switch (n.kind) {
            case Kind::constant: return num(0);
            case Kind::variable: return num(n.var == v ? 1 : 0);
            case Kind::add: return (*this)(n.args[0]) + (*this)(n.args[1]);
            case Kind::sub: return (*this)(n.args[0]) - (*this)(n.args[1]);
            case Kind::neg: return -(*this)(n.args[0]);
            case Kind::mul: {
                const Expr &a = n.args[0], &b = n.args[1];
                return (*this)(a) * b + a * (*this)(b);
            }
            case Kind::div: {
                const Expr &a = n.args[0], &b = n.args[1];
                if (!b.depends_on(v)) return (*this)(a) / b;
                if (!a.depends_on(v)) return -(a * (*this)(b)) / pow(b, num(2));
                return ((*this)(a) * b - a * (*this)(b)) / pow(b, num(2));
            }
            case Kind::pow: {
                const Expr &b = n.args[0], &p = n.args[1];
                if (!p.depends_on(v)) return p * pow(b, p - num(1)) * (*this)(b);
                return e * ((*this)(p) * ln(b) + p * (*this)(b) / b);
            }
            case Kind::func: {
                const Expr& a = n.args[0];
                Expr da = (*this)(a);
                switch (n.fn) {
                    case Fn::abs: return sign(a) * da;
                    case Fn::sign: return num(0);
                    case Fn::exp: return e * da;
                    case Fn::ln: return da / a;
                    case Fn::sin: return cos(a) * da;
                    case Fn::cos: return -(sin(a) * da);
                    case Fn::tan: return da / pow(cos(a), num(2));
                    case Fn::atan: return da / (num(1) + pow(a, num(2)));
                    case Fn::sqrt: return da / (num(2) * e);
                }
                break;
            }
            case Kind::quad: {
                const Expr &f = n.args[0], &upper = n.args[2];
                Expr d = substitute(f, Var::x, upper) * (*this)(upper);
                if (v == Var::t && f.depends_on(Var::t))
                    d = d + quad(differentiate(f, Var::t), n.args[1], upper);
                return d;
            }
            case Kind::inverse: {
                const Expr &F = n.args[0], &A = n.args[3], &Fx = n.args[4];
                Expr num_ = (*this)(A);
                if (v == Var::t && F.depends_on(Var::t))
                    num_ = num_ - substitute(differentiate(F, Var::t), Var::x, e);
                return num_ / substitute(Fx, Var::x, e);
            }
        }
        throw std::logic_error("differentiate: unknown node");
    }
};

struct Substituter {
    Var v;
    Expr r;
    std::unordered_map<const Node*, Expr> memo;

    Expr operator()(const Expr& e) {
        if (!e.depends_on(v) && !(v == Var::t && binds_t(e))) return e;
        auto it = memo.find(e.id());
        if (it != memo.end()) return it->second;
        Expr out = rule(e);
        memo.emplace(e.id(), out);
        return out;
    }

    static bool binds_t(const Expr& e) {
        return (e.kind() == Kind::quad || e.kind() == Kind::inverse) && e.arg(0).depends_on(Var::t);
    }

    Expr rule(const Expr& e) {
        const Node& n = e.node();
        auto s = [&](std::size_t i) { return (*this)(n.args[i]); };
        switch (n.kind) {
            case Kind::constant: return e;
            case Kind::variable: return n.var == v ? r : e;
            case Kind::add: return s(0) + s(1);
            case Kind::sub: return s(0) - s(1);
            case Kind::mul: return s(0) * s(1);
            case Kind::div: return s(0) / s(1);
            case Kind::neg: return -s(0);
            case Kind::pow: return pow(s(0), s(1));
            case Kind::func: return apply(n.fn, s(0));
            case Kind::quad:
                if (v == Var::x) return quad(n.args[0], s(1), s(2));
                if (r.depends_on(Var::x)) throw std::logic_error("substitution would capture bound x");
                return quad(s(0), s(1), s(2));
            case Kind::inverse:
                if (v == Var::x) return make(Kind::inverse, {n.args[0], n.args[1], n.args[2], s(3), n.args[4]});
                if (r.depends_on(Var::x)) throw std::logic_error("substitution would capture bound x");
                return make(Kind::inverse, {s(0), n.args[1], n.args[2], s(3), s(4)});
        }
        throw std::logic_error("substitute: unknown node");
    }
};

}  // namespace

Expr differentiate(const Expr& e, Var v) {
    Differ d{v, {}};
    return d(e);
}

Expr differentiate(const Expr& e, Var v, int order) {
    Expr out = e;
    for (int i = 0; i < order; ++i) out = differentiate(out, v);
    return out;
}

Expr substitute(const Expr& e, Var v, const Expr& replacement) {
    Substituter s{v, replacement, {}};
    return s(e);
}

// ---- evaluation ----

namespace {

double eval_impl(const Node& n, double t, double x, std::unordered_map<const Node*, double>* cache);

double ev(const Expr& e, double t, double x, std::unordered_map<const Node*, double>* cache) {
    const Node& n = e.node();
    if (n.kind == Kind::constant) return n.value.value();
    if (n.kind == Kind::variable) return n.var == Var::t ? t : x;
    if (cache) {
        auto it = cache->find(&n);
        if (it != cache->end()) return it->second;
        double v = eval_impl(n, t, x, cache);
        cache->emplace(&n, v);
        return v;
    }
    return eval_impl(n, t, x, nullptr);
}

double real_pow(double b, const Expr& p, double pv) {
    if (b >= 0) return std::pow(b, pv);
    if (const Number* c = p.constant(); c && c->exact()) {
        const Rational& q = c->q();
        if (q.den % 2 == 0) return kNaN;
        double m = std::pow(-b, pv);
        return (q.num % 2 != 0) ? -m : m;
    }
    if (pv == std::floor(pv)) return std::pow(b, pv);
    return kNaN;
}

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
    double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6 * (fa + 4 * flm + fm);
    double right = (b - m) / 6 * (fm + 4 * frm + fb);
    double diff = left + right - whole;
    if (depth <= 0 || std::fabs(diff) <= 15 * tol) return left + right + diff / 15;
    return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate(const Expr& f, double t, double a, double b) {
    if (a == b) return 0;
    auto g = [&](double xi) { return ev(f, t, xi, nullptr); };
    double fa = g(a), fb = g(b), fm = g(0.5 * (a + b));
    double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    double tol = 1e-13 * std::max(1.0, std::fabs(whole));
    return simpson(g, a, b, fa, fm, fb, whole, tol, 40);
}

// monotone inversion: safeguarded Newton inside a shrinking bracket
double invert_monotone(const Expr& F, const Expr& Fx, double t, double lo, double hi, double target) {
    auto r = [&](double y) { return ev(F, t, y, nullptr) - target; };
    double flo = r(lo), fhi = r(hi);
    if (!std::isfinite(flo) || !std::isfinite(fhi) || flo * fhi > 0) return kNaN;
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    double y = lo - flo * (hi - lo) / (fhi - flo);
    for (int it = 0; it < 100; ++it) {
        double fy = r(y);
        if (fy == 0) return y;
        if ((fy < 0) == (flo < 0)) { lo = y; flo = fy; } else { hi = y; fhi = fy; }
        double d = ev(Fx, t, y, nullptr);
        double next = (d != 0 && std::isfinite(d)) ? y - fy / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - y) <= 1e-15 * std::max(1.0, std::fabs(y))) return next;
        y = next;
        if (hi - lo <= 1e-15 * std::max(1.0, std::fabs(y))) return y;
    }
    return y;
}

double eval_impl(const Node& n, double t, double x, std::unordered_map<const Node*, double>* cache) {
    auto a = [&](std::size_t i) { return ev(n.args[i], t, x, cache); };
    switch (n.kind) {
        case Kind::constant: return n.value.value();
        case Kind::variable: return n.var == Var::t ? t : x;
        case Kind::add: return a(0) + a(1);
        case Kind::sub: return a(0) - a(1);
        case Kind::mul: return a(0) * a(1);
        case Kind::div: return a(0) / a(1);
        case Kind::neg: return -a(0);
        case Kind::pow: return real_pow(a(0), n.args[1], a(1));
        case Kind::func: {
            double v = a(0);
            switch (n.fn) {
                case Fn::abs: return std::fabs(v);
                case Fn::sign: return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
                case Fn::exp: return std::exp(v);
                case Fn::ln: return std::log(std::fabs(v));
                case Fn::sin: return std::sin(v);
                case Fn::cos: return std::cos(v);
                case Fn::tan: return std::tan(v);
                case Fn::atan: return std::atan(v);
                case Fn::sqrt: return std::sqrt(v);
            }
            break;
        }
        case Kind::quad: return integrate(n.args[0], t, a(1), a(2));
        case Kind::inverse: return invert_monotone(n.args[0], n.args[4], t, a(1), a(2), a(3));
    }
    return kNaN;
}

}  // namespace

double evaluate(const Expr& e, double t, double x) {
    std::unordered_map<const Node*, double> cache;
    return ev(e, t, x, &cache);
}

double Evaluator::operator()(const Expr& e) { return ev(e, t_, x_, &cache_); }

std::vector<Expr> exclusions(const Expr& e) {
    std::vector<Expr> out;
    std::unordered_set<const Node*> seen;
    std::function<void(const Expr&)> walk = [&](const Expr& f) {
        if (!seen.insert(f.id()).second) return;
        const Node& n = f.node();
        switch (n.kind) {
            case Kind::div:
                if (!n.args[1].is_const()) {
                    // a zero of d^k is a zero of d; the power would only shrink the margin
                    Expr d = n.args[1];
                    while (d.node().kind == Kind::pow && d.node().args[1].is_const()) d = d.node().args[0];
                    out.push_back(d);
                }
                break;
            case Kind::pow:
                if (!n.args[0].is_const()) {
                    const Number* p = n.args[1].constant();
                    if (!p || !p->is_integer() || p->negative()) out.push_back(n.args[0]);
                }
                break;
            case Kind::func:
                if (!n.args[0].is_const()) {
                    if (n.fn == Fn::ln || n.fn == Fn::sign || n.fn == Fn::abs || n.fn == Fn::sqrt)
                        out.push_back(n.args[0]);
                    if (n.fn == Fn::tan) out.push_back(cos(n.args[0]));
                }
                break;
            default: break;
        }
        if (n.kind == Kind::quad || n.kind == Kind::inverse) {
            walk(n.args[n.kind == Kind::quad ? 2 : 3]);
            return;
        }
        for (const auto& c : n.args) walk(c);
    };
    walk(e);
    return out;
}

// ---- printing ----

namespace {

// precedence: 1 sum, 2 product, 3 unary, 4 power, 5 atom
int prec(const Expr& e) {
    switch (e.kind()) {
        case Kind::add:
        case Kind::sub: return 1;
        case Kind::mul:
        case Kind::div: return 2;
        case Kind::neg: return 3;
        case Kind::pow: return 4;
        case Kind::constant: {
            const Number& v = *e.constant();
            if (v.negative() || (v.exact() && v.q().den != 1)) return 5;  // printed parenthesized
            return 5;
        }
        default: return 5;
    }
}

void emit(const Expr& e, std::string& out);

void emit_at(const Expr& e, int min_prec, std::string& out) {
    if (prec(e) < min_prec) {
        out += '(';
        emit(e, out);
        out += ')';
    } else {
        emit(e, out);
    }
}

void emit(const Expr& e, std::string& out) {
    const Node& n = e.node();
    switch (n.kind) {
        case Kind::constant: {
            const Number& v = n.value;
            if (!std::isfinite(v.value())) throw DomainError("cannot print a non-finite constant");
            std::string s = v.str();
            bool wrap = v.negative() || (v.exact() && v.q().den != 1);
            out += wrap ? "(" + s + ")" : s;
            return;
        }
        case Kind::variable: out += n.var == Var::t ? "t" : "x"; return;
        case Kind::add:
            emit_at(n.args[0], 1, out);
            out += " + ";
            emit_at(n.args[1], 2, out);
            return;
        case Kind::sub:
            emit_at(n.args[0], 1, out);
            out += " - ";
            emit_at(n.args[1], 2, out);
            return;
        case Kind::mul:
            emit_at(n.args[0], 2, out);
            out += '*';
            emit_at(n.args[1], 3, out);
            return;
        case Kind::div:
            emit_at(n.args[0], 2, out);
            out += '/';
            emit_at(n.args[1], 3, out);
            return;
        case Kind::neg:
            out += '-';
            emit_at(n.args[0], 4, out);
            return;
        case Kind::pow:
            emit_at(n.args[0], 5, out);
            out += '^';
            emit_at(n.args[1], 5, out);
            return;
        case Kind::func:
            out += fn_name(n.fn);
            out += '(';
            emit(n.args[0], out);
            out += ')';
            return;
        case Kind::quad:
        case Kind::inverse: {
            out += n.kind == Kind::quad ? "quad(" : "inv(";
            std::size_t k = n.kind == Kind::quad ? 3 : 4;
            for (std::size_t i = 0; i < k; ++i) {
                if (i) out += ", ";
                emit(n.args[i], out);
            }
            out += ')';
            return;
        }
    }
}

}  // namespace

std::string print(const Expr& e) {
    std::string s;
    emit(e, s);
    return s;
}

// ---- parsing ----

namespace {

class Parser {
public:
    Parser(std::string_view s, int line) : s_(s), line_(line) {}

    Expr parse() {
        skip();
        if (pos_ >= s_.size()) fail("empty expression");
        Expr e = expr();
        skip();
        if (pos_ < s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
        return e;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    int line_;

    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
        throw ParseError(msg, line_, static_cast<int>(at) + 1);
    }
    [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos_); }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    Expr expr() {
        Expr e = term();
        for (;;) {
            if (accept('+')) e = e + term();
            else if (accept('-')) e = e - term();
            else return e;
        }
    }

    Expr term() {
        Expr e = unary();
        for (;;) {
            if (accept('*')) {
                e = e * unary();
            } else if (accept('/')) {
                skip();
                std::size_t at = pos_;
                Expr d = unary();
                if (d.is_zero()) {
                    if (e.is_const() && e.constant()->is_integer()) fail("malformed rational: zero denominator", at);
                    fail("division by zero", at);
                }
                e = e / d;
            } else {
                return e;
            }
        }
    }

    Expr unary() {
        if (accept('-')) return -power();
        return power();
    }

    Expr power() {
        Expr b = atom();
        if (accept('^')) {
            skip();
            std::size_t at = pos_;
            Expr p = unary();
            try {
                return pow(b, p);
            } catch (const DomainError& err) {
                fail(err.what(), at);
            }
        }
        return b;
    }

    Expr number() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        bool decimal = false;
        if (pos_ < s_.size() && s_[pos_] == '.') {
            decimal = true;
            ++pos_;
            std::size_t d0 = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (pos_ == d0) fail("malformed number", start);
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            std::size_t d0 = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (pos_ == d0) {
                pos_ = save;  // not an exponent after all; let the identifier path complain
            } else {
                decimal = true;
            }
        }
        std::string text(s_.substr(start, pos_ - start));
        if (!decimal) {
            if (text.size() > 18) return num(Number::real(std::strtod(text.c_str(), nullptr)));
            return num(std::stoll(text));
        }
        double d = std::strtod(text.c_str(), nullptr);
        return num(exact_decimal(text, d));
    }

    // decimal literal as an exact rational when that is lossless
    static Number exact_decimal(const std::string& text, double d) {
        std::string mant = text;
        std::int64_t exp10 = 0;
        if (auto e = mant.find_first_of("eE"); e != std::string::npos) {
            exp10 = std::stoll(mant.substr(e + 1));
            mant = mant.substr(0, e);
        }
        std::string digits;
        for (char c : mant) {
            if (c == '.') exp10 -= static_cast<std::int64_t>(mant.size() - mant.find('.') - 1);
            else digits += c;
        }
        while (digits.size() > 1 && digits[0] == '0') digits.erase(0, 1);
        if (digits.size() > 18 || exp10 > 18 || exp10 < -18) return Number::real(d);
        std::int64_t p = std::stoll(digits), q = 1;
        for (; exp10 > 0; --exp10) p *= 10;
        for (; exp10 < 0; ++exp10) q *= 10;
        auto r = Rational::make(p, q);
        if (!r || r->value() != d) return Number::real(d);
        return Number::rational(*r);
    }

    Expr atom() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string id(s_.substr(start, pos_ - start));
            if (id == "t") return t_();
            if (id == "x") return x_();
            static const std::pair<const char*, Fn> fns[] = {
                {"abs", Fn::abs}, {"sign", Fn::sign}, {"exp", Fn::exp}, {"ln", Fn::ln},
                {"sin", Fn::sin}, {"cos", Fn::cos},   {"tan", Fn::tan}, {"atan", Fn::atan},
                {"sqrt", Fn::sqrt}};
            for (const auto& [name, f] : fns) {
                if (id == name) {
                    expect('(');
                    Expr a = expr();
                    expect(')');
                    return apply(f, a);
                }
            }
            if (id == "quad" || id == "inv") {
                expect('(');
                std::vector<Expr> a{expr()};
                std::size_t want = id == "quad" ? 3 : 4;
                while (a.size() < want) {
                    expect(',');
                    a.push_back(expr());
                }
                expect(')');
                return id == "quad" ? quad(a[0], a[1], a[2]) : inverse(a[0], a[1], a[2], a[3]);
            }
            fail("unknown identifier '" + id + "'", start);
        }
        fail(std::string("unexpected '") + c + "'");
    }
};

}  // namespace

Expr parse_expression(std::string_view text, int line) {
    Parser p(text, line);
    return p.parse();
}

}  // namespace bkdv
