#include <doctest.h>

#include <random>

#include "bkdv/groups.hpp"
#include "bkdv/verify.hpp"

using namespace bkdv;

namespace {

const Expr t = t_(), x = x_();

bool equal_t(const Expr& a, const Expr& b, double tol = 1e-12) {
    return sample_equiv(a, b, Box::standard(), 100, tol).equal;
}

SubclassParams make(Tag tag, int r) {
    SubclassParams p;
    p.tag = tag;
    p.order = r;
    p.a.assign(r + 1, 0.0);
    return p;
}

GroupElement element(Tag tag, std::initializer_list<std::pair<int, double>> slots) {
    GroupElement g;
    g.tag = tag;
    for (auto [i, v] : slots) g[i] = v;
    return g;
}

SubclassParams ii0() {
    SubclassParams p = make(Tag::II0, 2);
    p.a[2] = 1;
    p.b0 = 0.7;
    return p;
}

}  // namespace

TEST_CASE("loglike T family members") {
    CHECK(equal_t(mk_T_loglike({0, 0, 1, 0}), t));
    CHECK(equal_t(mk_T_loglike({0, 1, 1, 0}), exp(t) - num(1)));
    Expr T = mk_T_loglike({1, 0, 1, 0});
    CHECK(equal_t(T, ln(abs(t + num(1)))));
    Expr Tt = differentiate(T, Var::t);
    Expr ode = num(0) / Tt + differentiate(num(1) / Tt, Var::t);
    CHECK(equal_t(ode, num(1)));
    CHECK(loglike_ode_check({1, 0, 1, 0}).pass);
    CHECK(loglike_ode_check({0.7, -0.4, 2, 0.3}).pass);
    CHECK_THROWS_AS(mk_T_loglike({1, 0, 0, 0}), DomainError);
    CHECK_THROWS_AS(mk_T_loglike({2, 0, 1, -0.5}), DomainError);
}

TEST_CASE("branch names follow gamma and delta") {
    CHECK(t_branch({0, 0, 1, 0}) == TBranch::both_zero);
    CHECK(t_branch({1, 0, 1, 0}) == TBranch::delta_zero);
    CHECK(t_branch({0, 1, 1, 0}) == TBranch::gamma_zero);
    CHECK(t_branch({1, 1, 1, 0}) == TBranch::general);
}

TEST_CASE("II0 identity parameters realize the identity") {
    GroupElement g = element(Tag::II0, {{1, 1}, {2, 0}, {3, 0}, {4, 1}});
    FiberTransformation tr = realize(g, ii0());
    CHECK(equal_t(tr.T, t));
    CHECK(equal_t(tr.X1, num(1)));
    CHECK(equal_t(tr.X0, num(0)));
}

TEST_CASE("linear T branches") {
    SubclassParams i1 = make(Tag::I1, 2);
    i1.alpha = 1;
    i1.a[2] = 1;
    i1.a01 = 1;
    i1.b1 = 0;
    i1 = complete(i1);
    GroupElement g = element(Tag::I1, {{1, 2}, {2, 0.5}, {4, 1.5}, {5, 0}});
    FiberTransformation tr = realize(g, i1);
    CHECK(equal_t(differentiate(tr.T, Var::t, 2), num(0)));
    CHECK(equal_t(tr.T, num(2) * t + rat(1, 2)));

    SubclassParams iii = make(Tag::III, 2);
    iii.alpha = 1;
    iii.a[2] = 1;
    iii.a01 = 0.5;
    iii = complete(iii);
    GroupElement h = element(Tag::III, {{1, 3}, {2, 0.1}, {3, 0}, {4, 1}, {5, 1}});
    CHECK(equal_t(realize(h, iii).T, num(3) * t + real(0.1)));
}

TEST_CASE("II0 action") {
    GroupElement g = element(Tag::II0, {{1, 1}, {2, 0}, {3, 1}, {4, 1}});
    SubclassParams th = ii0();
    SubclassParams out = act(g, th);
    CHECK(out.a00 == doctest::Approx(th.a00 + 2));
    CHECK(out.b0 == doctest::Approx(th.b0 - 1));
    // with a00 != 0 the target b0 also picks up -a00 c3
    th.a00 = 0.4;
    out = act(g, th);
    CHECK(out.a00 == doctest::Approx(2.4));
    CHECK(out.b0 == doctest::Approx(0.7 - 1 - 0.4));
    CHECK(coherence_check(g, th).pass);
}

TEST_CASE("III effective action") {
    SubclassParams th = make(Tag::III, 3);
    th.alpha = 1.5;
    th.a[2] = 0.5;
    th.a[3] = 2;
    th.a01 = 0.8;
    th.a00 = 0.3;
    th.b2 = 0.25;
    th = complete(th);
    GroupElement g = element(Tag::III, {{1, 1}, {2, 0}, {3, 1}, {4, 1}, {5, 1}});
    SubclassParams out = act(g, th);
    CHECK(out.alpha == doctest::Approx(th.alpha));
    CHECK(out.a[2] == doctest::Approx(th.a[2]));
    CHECK(out.a[3] == doctest::Approx(th.a[3]));
    CHECK(out.a01 == doctest::Approx(th.a01));
    CHECK(out.a00 == doctest::Approx(th.a00 + 1));
    CHECK(out.b2 == doctest::Approx(th.b2));
    CHECK(coherence_check(g, th).pass);
}

TEST_CASE("identity elements act trivially for every tag") {
    std::mt19937_64 rng(21);
    for (Tag tag : subclass_tags()) {
        SubclassParams th = random_params(tag, rng);
        GroupElement id = identity_element(tag, th);
        CHECK(params_distance(act(id, th), th) <= 1e-12);
        CHECK(transformation_distance(realize(id, th), FiberTransformation::identity(), kTimeBox) <= 1e-12);
    }
}

TEST_CASE("composition with the identity and repeated II0 boosts") {
    SubclassParams th = ii0();
    GroupElement id = element(Tag::II0, {{1, 1}, {4, 1}});
    GroupElement g = element(Tag::II0, {{1, 1}, {2, 0}, {3, 1}, {4, 1}});
    CHECK(closure_check(g, id, th).pass);

    FiberTransformation twice = compose(realize(g, act(g, th)), realize(g, th));
    auto rec = recover(Tag::II0, th, twice, act(g, act(g, th)));
    REQUIRE(rec);
    CHECK(rec->residual <= 1e-10);
    CHECK(rec->g[3] == doctest::Approx(2));
    CHECK(rec->g[1] == doctest::Approx(1));
    CHECK(rec->g[2] == doctest::Approx(0).scale(1));
    CHECK(rec->g[4] == doctest::Approx(1));
}

TEST_CASE("usual group composes by products") {
    ReducedEquation eq(2, {num(0), num(0), num(1)}, x);
    SubclassParams th = make(Tag::IV0_2, 2);
    th.a[2] = 1;
    th.b1 = 1;
    th = complete(th);
    FiberTransformation a{num(2) * t, num(3), num(0)}, b{num(5) * t, num(7), num(0)};
    FiberTransformation ab = compose(b, a);
    CHECK(equal_t(ab.T, num(10) * t));
    CHECK(equal_t(ab.X1, num(21)));
    SubclassParams two = act_usual(5, 0, 7, 0, act_usual(2, 0, 3, 0, th));
    CHECK(params_distance(two, act_usual(10, 0, 21, 0, th)) <= 1e-14);
}

TEST_CASE("random elements: coherence, classifying conditions and axioms") {
    std::mt19937_64 rng(99);
    for (Tag tag : subclass_tags()) {
        for (int k = 0; k < 8; ++k) {
            SubclassParams th = random_params(tag, rng);
            std::string branch = (tag == Tag::II1 || tag == Tag::III) && k % 2 ? "generalized" : "effective";
            GroupElement g = random_element(tag, th, rng, kTimeBox, branch);
            Interval image = image_interval(realize(g, th).T, kTimeBox);
            GroupElement h = random_element(tag, act(g, th), rng, image, branch);
            INFO(std::string(tag_name(tag)) << " " << params_string(th) << " " << element_string(g));
            CHECK(coherence_check(g, th).pass);
            CHECK(classifying_check(g, th).pass);
            CHECK(identity_check(tag, th, 1e-8, branch).pass);
            CHECK(inverse_check(g, th).pass);
            CHECK(closure_check(g, h, th).pass);
            for (const auto& rep : ode_family_check(g, th)) {
                INFO(rep.check << " " << rep.detail);
                CHECK(rep.pass);
            }
        }
    }
}

TEST_CASE("parameter files of elements survive stage names") {
    CHECK(parse_stage1("tan") == Stage1::tan);
    CHECK(parse_stage2("atan") == Stage2::atan);
    CHECK_FALSE(parse_stage2("sin").has_value());
}
