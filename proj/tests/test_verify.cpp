#include <doctest.h>

#include <cmath>

#include "bkdv/verify.hpp"

using namespace bkdv;

namespace {

const Expr t = t_(), x = x_();

ReducedEquation burgers(const Expr& b = num(0)) { return ReducedEquation(2, {num(0), num(0), num(1)}, b); }

const CheckReport* find(const AuditDocument& doc, const std::string& check) {
    for (const auto& r : doc.records)
        if (r.check == check) return &r;
    return nullptr;
}

}  // namespace

TEST_CASE("covariance of the identity is exact") {
    auto rep = residual_covariance_check(burgers(x), FiberTransformation::identity(), default_manufactured());
    CHECK(rep.pass);
    CHECK(rep.value == 0);
}

TEST_CASE("T = 2t, X1 = 3 scales the residual by 3/4") {
    FiberTransformation tr{num(2) * t, num(3), num(0)};
    Expr u = exp(-t) * sin(x);
    ReducedEquation src = burgers();
    CHECK(residual_covariance_check(src, tr, u, 200, 1e-10).pass);

    TimeDependentReducedEquation tgt = apply_reduced(src, tr);
    Expr ut = pushforward(tr, u);
    for (double tv : {0.2, 0.5, 0.8})
        for (double xv : {0.4, 1.1, 1.9}) {
            double rs = residual(src, u, tv, xv);
            double rt = residual(tgt, ut, tv, 3 * xv);
            REQUIRE(std::fabs(rs) > 1e-3);
            CHECK(rt / rs == doctest::Approx(0.75).epsilon(1e-12));
        }
}

TEST_CASE("a wrong u-action breaks covariance and the mismatch is named") {
    FiberTransformation boost{t, num(1), t};
    ReducedEquation src = burgers();
    TimeDependentReducedEquation tgt = apply_reduced(src, boost);
    Expr u = default_manufactured();
    Expr right = pushforward(boost, u);
    Expr wrong = substitute(u, Var::x, x - t);  // drops the X0_t/T_t shift
    double worst_right = 0, worst_wrong = 0;
    for (double tv : {0.2, 0.5, 0.8})
        for (double xv : {1.0, 1.1, 1.2}) {
            double rs = residual(src, u, tv, xv);
            worst_right = std::max(worst_right, std::fabs(residual(tgt, right, tv, xv + tv) - rs));
            worst_wrong = std::max(worst_wrong, std::fabs(residual(tgt, wrong, tv, xv + tv) - rs));
        }
    CHECK(worst_right < 1e-12);
    CHECK(worst_wrong > 1e-3);

    // target claimed with a spurious source term
    auto cmp = compare_equations(tgt, burgers(num(1)));
    CHECK_FALSE(cmp.pass);
    CHECK(cmp.detail.find("worst=B") != std::string::npos);
    CHECK(compare_equations(tgt, burgers()).pass);
}

TEST_CASE("Schwarzian checks") {
    CHECK(schwarzian_check((num(2) * t + num(1)) / (t + num(1)), 0, 0).pass);
    CHECK_FALSE(schwarzian_check(exp(t), 0, 0).pass);
    for (double b : {0.5, 1.0, 1.5}) {
        CHECK(schwarzian_check(tan(real(b) * t), -b * b, 0).pass);
        CHECK(schwarzian_check(exp(real(2 * b) * t), b * b, 0).pass);
    }
}

TEST_CASE("branch continuity at gamma -> 0") {
    CHECK(branch_continuity_check({0, 0.5, 1.2, 0.1}).pass);
    CHECK(branch_continuity_check({0, 0, 1, 0}).pass);
}

TEST_CASE("audit: II0 with seed 42 passes every check") {
    AuditDocument doc = audit_paper(42, 10, Tag::II0);
    CHECK_FALSE(doc.records.empty());
    for (const auto& r : doc.records) {
        INFO(r.check << " " << r.detail);
        CHECK(r.pass);
    }
    CHECK(doc.all_passed());
}

TEST_CASE("audit: I00 log stage reports c5^2/4 against the prose") {
    AuditDocument doc = audit_paper(1, 1, Tag::I00);
    const CheckReport* r = find(doc, "discrepancy_I00_log_stage_b0");
    REQUIRE(r);
    CHECK(r->pass);
    CHECK(r->value == doctest::Approx(1.3 * 1.3 / 4));
    const CheckReport* a = find(doc, "discrepancy_I00_atan_stage_b0");
    REQUIRE(a);
    CHECK(a->value == doctest::Approx(-4 * 1.3 * 1.3));
}

TEST_CASE("audit: zero trials give an empty, passing document") {
    AuditDocument doc = audit_paper(3, 0);
    CHECK(doc.records.empty());
    CHECK(doc.all_passed());
}

TEST_CASE("audit output is deterministic for a seed") {
    AuditDocument a = audit_paper(9, 2, Tag::III), b = audit_paper(9, 2, Tag::III);
    REQUIRE(a.records.size() == b.records.size());
    CHECK(a.summary_table() == b.summary_table());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].params == b.records[i].params);
        CHECK(a.records[i].value == b.records[i].value);
    }
}

TEST_CASE("term-scaled gauge covariance still rejects a slightly wrong map") {
    // steep equation: the unscaled metric is dominated by rounding of ~1e10 terms
    StationaryGeneralEquation s;
    s.order = 4;
    s.C = pow(x, num(3));
    s.A = {num(0), num(0), num(0), num(0), num(1) + x};
    s.B = cos(x);
    auto [red, g] = gauge_stationary(s);
    auto ok = gauge_covariance_check(s, g, default_manufactured(), 200, 1e-8);
    CHECK(ok.pass);
    CHECK(ok.detail.find("unscaled=") != std::string::npos);

    GaugeTransformation bad = g;
    bad.Xinv = substitute(g.Xinv, Var::x, x * real(1.000001));
    auto rep = gauge_covariance_check(s, bad, default_manufactured(), 200, 1e-8);
    CHECK_FALSE(rep.pass);
    CHECK(rep.value > 1e-7);
}
