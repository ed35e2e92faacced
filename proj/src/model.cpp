#include "bkdv/model.hpp"

#include <cmath>

namespace bkdv {

ReducedEquation::ReducedEquation(int r, std::vector<Expr> coeffs, Expr b, Box dom)
    : order(r), A(std::move(coeffs)), B(std::move(b)), domain(std::move(dom)) {
    if (r < 2) throw DomainError("order must be at least 2");
    A.resize(r + 1, num(0));
    A[1] = num(0);
}

TimeDependentReducedEquation::TimeDependentReducedEquation(const ReducedEquation& eq)
    : order(eq.order), A(eq.A), B(eq.B), domain(eq.domain) {}

const char* tag_name(Tag t) {
    switch (t) {
        case Tag::I1: return "I1";
        case Tag::I01: return "I01";
        case Tag::I00: return "I00";
        case Tag::II0: return "II0";
        case Tag::II1: return "II1";
        case Tag::III: return "III";
        case Tag::IV1: return "IV1";
        case Tag::IV0_high: return "IV0_high";
        case Tag::IV0_2: return "IV0_2";
        case Tag::F0: return "F0";
    }
    return "?";
}

std::optional<Tag> parse_tag(std::string_view s) {
    for (Tag t : {Tag::I1, Tag::I01, Tag::I00, Tag::II0, Tag::II1, Tag::III, Tag::IV1, Tag::IV0_high, Tag::IV0_2,
                  Tag::F0})
        if (s == tag_name(t)) return t;
    if (s == "usual") return Tag::F0;
    return std::nullopt;
}

const std::vector<Tag>& subclass_tags() {
    static const std::vector<Tag> tags{Tag::I1,  Tag::I01, Tag::I00,      Tag::II1,  Tag::II0,
                                       Tag::III, Tag::IV1, Tag::IV0_high, Tag::IV0_2};
    return tags;
}

SubclassParams complete(SubclassParams p) {
    const double al = p.alpha;
    const int r = p.order;
    switch (p.tag) {
        case Tag::I1:
            if (p.a01 != 0) {
                p.a00 = -(al + 2) * p.b1 / p.a01;
                p.b0 = -p.b1 * p.b1 * (1 + al) / (p.a01 * p.a01);
            }
            break;
        case Tag::I01:
            p.b1 = 0;
            if (al != -2) p.b0 = -(al + 1) * p.a00 * p.a00 / ((al + 2) * (al + 2));
            break;
        case Tag::I00: p.alpha = -2; break;
        case Tag::III:
            if (al != 0) {
                p.b1 = -p.a00 * p.a01 / al;
                p.b0 = -p.a00 * p.a00 / al;
            }
            break;
        case Tag::IV0_high:
            if (r > 2) p.b1 = (r - 1) * p.a00 * p.a00 / ((r - 2.0) * (r - 2.0));
            break;
        case Tag::IV0_2: p.a00 = 0; break;
        default: break;
    }
    return p;
}

GateError::GateError(GateReport r)
    : std::runtime_error([&] {
          std::string s = "gate violated:";
          for (const auto& v : r.violated) s += " [" + v + "]";
          return s;
      }()),
      report(std::move(r)) {}

namespace {

Number N(double v) { return Number::from_double(v); }

// exact when every operand is an exact rational, otherwise relative 1e-12
bool equal_num(const Number& a, const Number& b) {
    if (a.exact() && b.exact()) return a.same(b);
    double x = a.value(), y = b.value();
    return std::fabs(x - y) <= 1e-12 * std::max({1.0, std::fabs(x), std::fabs(y)});
}

}  // namespace

GateReport gate_check(const SubclassParams& p) {
    GateReport g;
    auto fail = [&](std::string s) {
        g.ok = false;
        g.violated.push_back(std::move(s));
    };
    const int r = p.order;
    if (p.tag == Tag::F0) return g;
    if (r < 2) {
        fail("order r >= 2");
        return g;
    }
    if (static_cast<int>(p.a.size()) != r + 1) {
        fail("a[j] given for j = 2..r");
        return g;
    }
    const Number al = N(p.alpha), ar = N(p.ar()), a01 = N(p.a01), a00 = N(p.a00), b1 = N(p.b1), b0 = N(p.b0);
    const Number one = Number::integer(1), two = Number::integer(2);
    switch (p.tag) {
        case Tag::I1:
            if ((al * ar * a01).is_zero()) fail("α·a_r·a01 ≠ 0");
            else {
                if (!equal_num(a00, -(al + two) * b1 / a01)) fail("a00 = -(α+2)·b1/a01");
                if (!equal_num(b0, -(b1 * b1 * (one + al)) / (a01 * a01))) fail("b0 = -b1²(1+α)/a01²");
            }
            break;
        case Tag::I01:
            if (((al + two) * ar).is_zero()) fail("(α+2)·a_r ≠ 0");
            else {
                if (al.is_zero()) fail("α ≠ 0");
                if (!b1.is_zero()) fail("b1 = 0");
                if (!equal_num(b0, -((al + one) * a00 * a00) / ((al + two) * (al + two))))
                    fail("b0 = -(α+1)·a00²/(α+2)²");
            }
            break;
        case Tag::I00:
            if (ar.is_zero()) fail("a_r ≠ 0");
            if (p.alpha != -2) fail("α = -2");
            break;
        case Tag::II0:
            if (ar.is_zero()) fail("a_r ≠ 0");
            break;
        case Tag::II1:
            if ((ar * a01).is_zero()) fail("a_r·a01 ≠ 0");
            break;
        case Tag::III:
            if ((al * ar).is_zero()) fail("α·a_r ≠ 0");
            else {
                if (!equal_num(b1, -(a00 * a01) / al)) fail("b1 = -a00·a01/α");
                if (!equal_num(b0, -(a00 * a00) / al)) fail("b0 = -a00²/α");
            }
            break;
        case Tag::IV1: {
            if (ar.is_zero()) fail("a_r ≠ 0");
            bool any = false;
            for (int j = 2; j < r; ++j) any = any || p.a[j] != 0;
            if (!any) fail(r == 2 ? "Σ_{j=2}^{r-1}|a_j| ≠ 0 (empty middle-coefficient sum)" : "Σ_{j=2}^{r-1}|a_j| ≠ 0");
            break;
        }
        case Tag::IV0_high: {
            if (ar.is_zero()) fail("a_r ≠ 0");
            if (r <= 2) {
                fail("r > 2");
                break;
            }
            for (int j = 2; j < r; ++j)
                if (p.a[j] != 0) {
                    fail("a_j = 0 for 2 <= j < r");
                    break;
                }
            const Number rm1 = Number::integer(r - 1), rm2 = Number::integer(r - 2);
            if (!equal_num(b1, rm1 * a00 * a00 / (rm2 * rm2))) fail("b1 = (r-1)·a0²/(r-2)²");
            break;
        }
        case Tag::IV0_2:
            if (ar.is_zero()) fail("a_2 ≠ 0");
            if (r != 2) fail("r = 2");
            if (!a00.is_zero()) fail("a0 = 0");
            break;
        case Tag::F0: break;
    }
    return g;
}

namespace {

Box excluding(const Box& box, double center, double margin) {
    Box out;
    out.t = box.t;
    out.x.clear();
    for (const auto& iv : box.x) {
        double a = center - margin, b = center + margin;
        if (b <= iv.lo || a >= iv.hi) {
            out.x.push_back(iv);
            continue;
        }
        if (a > iv.lo) out.x.push_back({iv.lo, a});
        if (b < iv.hi) out.x.push_back({b, iv.hi});
    }
    if (out.x.empty()) throw DomainError("domain collapses after excluding the singular point");
    return out;
}

}  // namespace

ReducedEquation instantiate_normal_form(const SubclassParams& p) { return instantiate_normal_form(p, p.order); }

ReducedEquation instantiate_normal_form(const SubclassParams& p_in, int r) {
    SubclassParams p = p_in;
    if (p.tag == Tag::F0) throw DomainError("F0 has no normal form");
    if (r != p.order) {
        p.order = r;
        p.a.resize(r + 1, 0.0);
    }
    GateReport g = gate_check(p);
    if (!g.ok) throw GateError(g);

    const Expr x = x_();
    const Expr y = x + real(p.beta);
    const Expr ay = abs(y);
    const Expr al = real(p.alpha);
    auto R = [](double v) { return real(v); };
    std::vector<Expr> A(r + 1, num(0));
    Expr B;
    bool singular = true;
    switch (p.tag) {
        case Tag::I1:
        case Tag::I01: {
            Expr pa = pow(ay, al);
            for (int j = 2; j <= r; ++j) A[j] = R(p.a[j]) * pow(y, num(j)) * pa;
            if (p.tag == Tag::I1) {
                A[0] = R(p.a00) + R(p.a01) * pa;
                B = y * (R(p.b2) * pow(ay, real(2 * p.alpha)) + R(p.b1) * pa + R(p.b0));
            } else {
                A[0] = R(p.a00);
                B = y * (R(p.b2) * pow(ay, real(2 * p.alpha)) + R(p.b0));
            }
            break;
        }
        case Tag::I00:
            for (int j = 2; j <= r; ++j) A[j] = R(p.a[j]) * pow(y, num(j - 2));
            B = R(p.b0) * y + R(p.b2) * pow(y, num(-3));
            break;
        case Tag::II0:
            for (int j = 2; j <= r; ++j) A[j] = R(p.a[j]) * pow(y, num(j));
            A[0] = R(p.a00);
            B = R(p.b0) * y;
            break;
        case Tag::II1: {
            for (int j = 2; j <= r; ++j) A[j] = R(p.a[j]) * pow(y, num(j));
            Expr L = ln(ay);
            A[0] = R(p.a01) * L + R(p.a00);
            Expr c2 = R(-p.a01 * p.a01 / 4), c1 = R(p.a01 * p.a01 / 4 - p.a00 * p.a01 / 2);
            B = y * (c2 * pow(L, num(2)) + c1 * L + R(p.b0));
            break;
        }
        case Tag::III: {
            singular = false;
            Expr E = exp(al * x);
            for (int j = 2; j <= r; ++j) A[j] = R(p.a[j]) * E;
            A[0] = R(p.a01) * E + R(p.a00);
            B = R(p.b2) * exp(real(2 * p.alpha) * x) + R(p.b1) * E + R(p.b0);
            break;
        }
        case Tag::IV1:
        case Tag::IV0_high:
        case Tag::IV0_2:
            singular = false;
            for (int j = 2; j <= r; ++j) A[j] = R(p.a[j]);
            A[0] = R(p.a00);
            B = R(p.b1) * x + R(p.b0);
            break;
        case Tag::F0: break;
    }
    Box dom = Box::standard();
    if (singular) dom = excluding(dom, -p.beta, 0.2);
    return ReducedEquation(r, std::move(A), B, dom);
}

Expr residual_expr(const TimeDependentReducedEquation& eq, const Expr& u) {
    Expr ut = differentiate(u, Var::t);
    if (eq.time_map) ut = ut / differentiate(*eq.time_map, Var::t);
    Expr rhs = eq.A[0] * u + eq.B;
    Expr uk = u;
    for (int j = 1; j <= eq.order; ++j) {
        uk = differentiate(uk, Var::x);
        if (j >= 2) rhs = rhs + eq.A[j] * uk;
    }
    return ut + u * differentiate(u, Var::x) - rhs;
}

Expr residual_expr(const ReducedEquation& eq, const Expr& u) {
    return residual_expr(TimeDependentReducedEquation(eq), u);
}

Expr residual_expr(const StationaryGeneralEquation& eq, const Expr& u) {
    Expr rhs = eq.A[0] * u + eq.B;
    Expr uk = u;
    for (int k = 1; k <= eq.order; ++k) {
        uk = differentiate(uk, Var::x);
        rhs = rhs + eq.A[k] * uk;
    }
    return differentiate(u, Var::t) + eq.C * u * differentiate(u, Var::x) - rhs;
}

std::vector<Expr> residual_terms(const TimeDependentReducedEquation& eq, const Expr& u) {
    Expr ut = differentiate(u, Var::t);
    if (eq.time_map) ut = ut / differentiate(*eq.time_map, Var::t);
    std::vector<Expr> out{ut, u * differentiate(u, Var::x), eq.A[0] * u, eq.B};
    Expr uk = u;
    for (int j = 1; j <= eq.order; ++j) {
        uk = differentiate(uk, Var::x);
        if (j >= 2) out.push_back(eq.A[j] * uk);
    }
    return out;
}

std::vector<Expr> residual_terms(const StationaryGeneralEquation& eq, const Expr& u) {
    std::vector<Expr> out{differentiate(u, Var::t), eq.C * u * differentiate(u, Var::x), eq.A[0] * u, eq.B};
    Expr uk = u;
    for (int k = 1; k <= eq.order; ++k) {
        uk = differentiate(uk, Var::x);
        out.push_back(eq.A[k] * uk);
    }
    return out;
}

std::vector<Expr> equation_exclusions(const TimeDependentReducedEquation& eq) {
    std::vector<Expr> out;
    auto add = [&](const Expr& e) {
        auto v = exclusions(e);
        out.insert(out.end(), v.begin(), v.end());
    };
    for (const auto& a : eq.A) add(a);
    add(eq.B);
    if (eq.time_map) add(*eq.time_map);
    return out;
}

double residual(const TimeDependentReducedEquation& eq, const Expr& u, double t, double x) {
    if (!eq.domain.contains(t, x)) throw DomainError("point outside the equation's domain");
    if (!clear_of_exclusions(equation_exclusions(eq), t, x)) throw DomainError("point is a singular point of a coefficient");
    return evaluate(residual_expr(eq, u), t, x);
}

double residual(const ReducedEquation& eq, const Expr& u, double t, double x) {
    return residual(TimeDependentReducedEquation(eq), u, t, x);
}

}  // namespace bkdv
