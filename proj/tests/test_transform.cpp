#include <doctest.h>

#include <random>

#include "bkdv/transform.hpp"
#include "bkdv/verify.hpp"

using namespace bkdv;

namespace {

const Expr t = t_(), x = x_();

bool equal(const Expr& a, const Expr& b, const Box& box = Box::standard(), double tol = 1e-12) {
    return sample_equiv(a, b, box, 200, tol).equal;
}

Box t_box(double lo, double hi) {
    Box b;
    b.t = {lo, hi};
    return b;
}

ReducedEquation heat() { return ReducedEquation(2, {num(0), num(0), num(1)}, num(0)); }

}  // namespace

TEST_CASE("identity leaves the equation unchanged") {
    ReducedEquation eq(3, {sin(x), num(0), x, exp(x)}, pow(x, num(2)));
    auto out = apply_reduced(eq, FiberTransformation::identity());
    for (int k : {0, 2, 3}) CHECK(equal(out.A[k], eq.A[k]));
    CHECK(equal(out.B, eq.B));
    CHECK(as_time_independent(out).has_value());
}

TEST_CASE("usual scaling: T = 2t, X1 = 3 gives 9/2 u_2") {
    FiberTransformation tr{num(2) * t, num(3), num(0)};
    auto out = apply_reduced(heat(), tr);
    CHECK(equal(out.A[2], rat(9, 2)));
    CHECK(equal(out.A[0], num(0)));
    CHECK(equal(out.B, num(0)));
}

TEST_CASE("Galilean boost maps Burgers to itself") {
    FiberTransformation tr{t, num(1), t};
    auto out = apply_reduced(heat(), tr);
    CHECK(equal(out.A[2], num(1)));
    CHECK(equal(out.A[0], num(0)));
    CHECK(equal(out.B, num(0)));
    CHECK(residual_covariance_check(heat(), tr, default_manufactured()).pass);
}

TEST_CASE("composition") {
    FiberTransformation m1{t / (t + num(1)), num(1), num(0)};
    FiberTransformation m2{t + num(1), num(1), num(0)};
    FiberTransformation c = compose(m2, m1);
    CHECK(equal(c.T, (num(2) * t + num(1)) / (t + num(1)), t_box(0.1, 0.9)));

    FiberTransformation s2{t, num(2), num(0)}, s3{t, num(3), num(0)};
    FiberTransformation s6 = compose(s2, s3);
    CHECK(equal(s6.X1, num(6)));
    CHECK(equal(s6.X0, num(0)));

    // composing applications agrees with applying the composition
    FiberTransformation a{exp(t), num(1) + t, t * t}, b{num(3) * t, num(2), num(1)};
    auto lhs = apply_reduced(apply_reduced(heat(), a), b);
    auto rhs = apply_reduced(heat(), compose(b, a));
    CHECK(equal(lhs.A[2], rhs.A[2], Box::standard(), 1e-11));
    CHECK(equal(lhs.A[0], rhs.A[0], Box::standard(), 1e-11));
    CHECK(equal(lhs.B, rhs.B, Box::standard(), 1e-11));
}

TEST_CASE("inversion") {
    auto id = invert(FiberTransformation::identity());
    CHECK(equal(id.T, t));
    CHECK(equal(id.X1, num(1)));
    CHECK(equal(id.X0, num(0)));

    auto e = invert(FiberTransformation{exp(num(2) * t), num(1), num(0)});
    CHECK(equal(e.T, ln(t) / num(2), t_box(std::exp(0.2), std::exp(1.8))));

    auto m = invert(FiberTransformation{(num(2) * t + num(1)) / (t + num(1)), num(1), num(0)});
    CHECK(equal(m.T, (num(1) - t) / (t - num(2)), t_box(1.1 / 1.1, 2.8 / 1.9)));

    FiberTransformation tr{tan(t), exp(t), sin(t)};
    FiberTransformation back = compose(invert(tr), tr);
    CHECK(equal(back.T, t, t_box(0.1, 0.9), 1e-10));
    CHECK(equal(back.X1, num(1), t_box(0.1, 0.9), 1e-10));
    CHECK(equal(back.X0, num(0), t_box(0.1, 0.9), 1e-10));
}

TEST_CASE("Bell polynomials") {
    std::vector<Expr> d{num(0), parse_expression("x"), parse_expression("t"), num(5)};
    CHECK(equal(bell(3, 2, d), num(3) * x * t));
    CHECK(equal(bell(3, 3, d), pow(x, num(3))));
    CHECK(equal(bell(3, 1, d), num(5)));
    CHECK(bell(0, 0, d).is_one());
}

TEST_CASE("gauge examples") {
    StationaryGeneralEquation id;
    id.order = 2;
    id.A = {x, num(0), num(1) + x * x};
    id.B = sin(x);
    auto [same, g0] = gauge_stationary(id);
    CHECK(equal(same.A[2], id.A[2]));
    CHECK(equal(same.A[0], id.A[0]));
    CHECK(equal(same.B, id.B));
    CHECK(equal(g0.X, x));

    StationaryGeneralEquation s;
    s.order = 2;
    s.C = num(2);
    s.A = {num(0), num(1), num(1)};
    s.B = num(0);
    auto [red, g] = gauge_stationary(s);
    CHECK(equal(g.X, x / num(2)));
    CHECK(equal(g.U0, rat(-1, 2)));
    CHECK(equal(red.A[2], rat(1, 4)));
    CHECK(equal(red.A[0], num(0)));
    CHECK(equal(red.B, num(0)));

    StationaryGeneralEquation a;
    a.order = 2;
    a.A = {num(0), num(7), num(1)};
    a.B = num(0);
    auto [red2, g2] = gauge_stationary(a);
    CHECK(equal(g2.U0, num(-7)));
    CHECK(equal(red2.A[2], num(1)));
    CHECK(equal(red2.B, num(0)));
}

TEST_CASE("gauge output has C = 1, A[1] = 0 and inverts back") {
    StationaryGeneralEquation s;
    s.order = 3;
    s.C = num(2) + x;
    s.A = {cos(x), x * x, num(1) + x, pow(x, num(3))};
    s.B = exp(x);
    auto [red, g] = gauge_stationary(s);
    StationaryGeneralEquation direct = apply_stationary(s, g);
    CHECK(equal(direct.C, num(1), direct.domain, 1e-10));
    CHECK(equal(direct.A[1], num(0), direct.domain, 1e-10));

    StationaryGeneralEquation back = apply_stationary(as_stationary(red), invert(g));
    for (int k = 0; k <= 3; ++k) CHECK(equal(back.A[k], s.A[k], s.domain, 1e-9));
    CHECK(equal(back.C, s.C, s.domain, 1e-9));
    CHECK(equal(back.B, s.B, s.domain, 1e-9));

    CHECK(gauge_covariance_check(s, g, default_manufactured()).pass);
}

TEST_CASE("gauge rejects C of changing sign and orders above the cap") {
    StationaryGeneralEquation s;
    s.order = 2;
    s.C = x - num(1);
    s.A = {num(0), num(0), num(1)};
    s.B = num(0);
    CHECK_THROWS_AS(gauge_stationary(s), DomainError);
    s.C = num(1);
    s.order = 9;
    s.A.assign(10, num(1));
    CHECK_THROWS_AS(gauge_stationary(s), DomainError);
}

TEST_CASE("classifying residuals vanish for the usual group") {
    ReducedEquation eq(3, {sin(x), num(0), x, exp(x)}, x * x);
    FiberTransformation tr{num(2) * t + num(1), num(3), num(5)};
    auto out = as_time_independent(apply_reduced(eq, tr));
    REQUIRE(out);
    auto res = classifying_residuals(tr, *out);
    Box b = out->domain;
    for (int j = 2; j <= 3; ++j) CHECK(equal(res.a[j].lhs, res.a[j].rhs, b, 1e-13));
    CHECK(equal(res.a0.lhs, res.a0.rhs, b, 1e-13));
    CHECK(equal(res.b.lhs, res.b.rhs, b, 1e-13));
}

TEST_CASE("random fiber maps satisfy the covariance identity") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> U(0.5, 1.5);
    for (int k = 0; k < 20; ++k) {
        ReducedEquation eq(2 + k % 3, {real(U(rng)) * cos(x), num(0), num(1) + x * x, real(U(rng)) * x, real(U(rng))},
                           sin(real(U(rng)) * x));
        FiberTransformation tr{real(U(rng)) * exp(real(U(rng)) * t), real(U(rng)) + t * t / num(4), real(U(rng)) * sin(t) / num(4)};
        auto rep = residual_covariance_check(eq, tr, default_manufactured(), 200, 1e-8, k);
        INFO(rep.detail);
        CHECK(rep.pass);
    }
}
