#include <doctest.h>

#include <random>

#include "bkdv/groups.hpp"
#include "bkdv/model.hpp"

using namespace bkdv;

namespace {

SubclassParams make(Tag tag, int r) {
    SubclassParams p;
    p.tag = tag;
    p.order = r;
    p.a.assign(r + 1, 0.0);
    return p;
}

bool equal(const Expr& a, const Expr& b, const Box& box = Box::standard()) {
    return sample_equiv(a, b, box, 200, 1e-13).equal;
}

ReducedEquation heat(const Expr& b = num(0)) { return ReducedEquation(2, {num(0), num(0), num(1)}, b); }

}  // namespace

TEST_CASE("II0 normal form") {
    SubclassParams p = make(Tag::II0, 2);
    p.a[2] = 1;
    p.a00 = 1;
    p.b0 = 5;
    ReducedEquation eq = instantiate_normal_form(p);
    const Expr x = x_();
    CHECK(equal(eq.A[2], pow(x, num(2))));
    CHECK(equal(eq.A0(), num(1)));
    // B carries the factor x + beta; a constant B = 5 is not invariant under the II0 group
    CHECK(equal(eq.B, num(5) * x));
}

TEST_CASE("IV0_2 normal form is Burgers with a linear source") {
    SubclassParams p = make(Tag::IV0_2, 2);
    p.beta = 3;  // irrelevant for IV
    p.a[2] = 1;
    p.b1 = 1;
    ReducedEquation eq = instantiate_normal_form(complete(p));
    CHECK(equal(eq.A[2], num(1)));
    CHECK(equal(eq.A0(), num(0)));
    CHECK(equal(eq.B, x_()));
}

TEST_CASE("gates") {
    SubclassParams i1 = make(Tag::I1, 2);
    i1.alpha = 1;
    i1.a[2] = 1;
    i1.a01 = 1;
    i1.b1 = 0.5;
    i1 = complete(i1);
    CHECK(gate_check(i1).ok);

    SubclassParams i01 = make(Tag::I01, 2);
    i01.alpha = -2;
    i01.a[2] = 1;
    i01 = complete(i01);
    GateReport g = gate_check(i01);
    CHECK_FALSE(g.ok);
    REQUIRE_FALSE(g.violated.empty());
    CHECK(g.violated.front().find("(α+2)") != std::string::npos);
    CHECK_THROWS_AS(instantiate_normal_form(i01), GateError);

    SubclassParams iv1 = make(Tag::IV1, 2);
    iv1.a[2] = 1;
    iv1.b1 = 1;
    GateReport g2 = gate_check(iv1);
    CHECK_FALSE(g2.ok);
    CHECK(g2.violated.front().find("empty") != std::string::npos);

    SubclassParams i00 = make(Tag::I00, 2);
    CHECK_FALSE(gate_check(complete(i00)).ok);  // a_r = 0
}

TEST_CASE("complete fills the equality constraints") {
    SubclassParams p = make(Tag::III, 2);
    p.alpha = 2;
    p.a[2] = 1;
    p.a00 = 0.5;
    p.a01 = 3;
    p = complete(p);
    CHECK(p.b1 == doctest::Approx(-0.75));
    CHECK(p.b0 == doctest::Approx(-0.125));
    CHECK(gate_check(p).ok);

    SubclassParams i00 = make(Tag::I00, 3);
    i00.a[3] = 1;
    CHECK(complete(i00).alpha == -2);
}

TEST_CASE("residual examples") {
    const Expr t = t_(), x = x_();
    auto sample = [](const auto& f) {
        for (double tv : {0.1, 0.5, 0.9})
            for (double xv : {0.3, 1.0, 1.7}) f(tv, xv);
    };
    sample([&](double tv, double xv) { CHECK(residual(heat(), num(0), tv, xv) == 0); });
    Expr u = x / (num(1) + t);
    sample([&](double tv, double xv) { CHECK(residual(heat(), u, tv, xv) == doctest::Approx(0).epsilon(1e-15)); });
    sample([&](double tv, double xv) { CHECK(residual(heat(num(1)), u, tv, xv) == doctest::Approx(-1)); });
}

TEST_CASE("residual is linear in B") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-2, 2);
    Expr u = exp(-t_()) * sin(num(3) * x_()) + pow(x_(), num(2)) / num(10);
    for (Tag tag : subclass_tags()) {
        SubclassParams p = random_params(tag, rng);
        ReducedEquation eq = instantiate_normal_form(p);
        Expr delta = real(U(rng)) * cos(x_()) + real(U(rng));
        ReducedEquation shifted = eq;
        shifted.B = eq.B + delta;
        auto pts = sample_points(eq.domain, 50, 9);
        for (auto [tv, xv] : pts) {
            double lhs = residual(shifted, u, tv, xv);
            double rhs = residual(eq, u, tv, xv) - evaluate(delta, tv, xv);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12).scale(1));
        }
    }
}

TEST_CASE("random normal forms pass their own gates and have nonzero leading coefficient") {
    std::mt19937_64 rng(5);
    for (Tag tag : subclass_tags()) {
        for (int k = 0; k < 50; ++k) {
            SubclassParams p = random_params(tag, rng);
            CHECK(gate_check(p).ok);
            ReducedEquation eq = instantiate_normal_form(p);
            CHECK(eq.order == p.order);
            auto rep = sample_equiv(eq.A[eq.order], num(0), eq.domain, 50, 1e-12);
            CHECK_FALSE(rep.equal);
        }
    }
}

TEST_CASE("singular normal forms keep their domain clear of x = -beta") {
    SubclassParams p = make(Tag::II0, 2);
    p.beta = -1;
    p.a[2] = 1;
    ReducedEquation eq = instantiate_normal_form(p);
    for (const auto& iv : eq.domain.x) CHECK_FALSE(iv.contains(1.0));
}

TEST_CASE("tag names round trip") {
    for (Tag t : subclass_tags()) CHECK(parse_tag(tag_name(t)) == t);
    CHECK(parse_tag("F0") == Tag::F0);
    CHECK_FALSE(parse_tag("V2").has_value());
}
