// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bkdv/classify.hpp"
#include "bkdv/groups.hpp"
#include "bkdv/verify.hpp"
#include "fixtures.hpp"

using namespace bkdv;

namespace {

struct Tally {
    int total = 0, failed = 0;
    double worst = 0;
    std::string first_failure;

    void add(bool pass, double value, const std::string& what) {
        ++total;
        if (std::isfinite(value)) worst = std::max(worst, std::fabs(value));
        else worst = INFINITY;
        if (!pass) {
            if (failed == 0) first_failure = what;
            ++failed;
        }
    }
    void add(const CheckReport& r) { add(r.pass, r.value, r.tag + " " + r.check + " " + r.detail + " " + r.params); }
    bool ok() const { return total > 0 && failed == 0; }
};

void line(int n, bool ok, const std::string& text) {
    std::printf("criterion %d: %s  %s\n", n, ok ? "PASS" : "FAIL", text.c_str());
    std::fflush(stdout);
}

std::string summary(const Tally& t) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d checks, %d failed, worst %.3e", t.total, t.failed, t.worst);
    std::string s = buf;
    if (t.failed) s += "; first failure: " + t.first_failure;
    return s;
}

struct Draw {
    SubclassParams theta;
    GroupElement g, g2;
    std::string branch;
};

std::vector<Draw> draws_for(Tag tag, int n, std::mt19937_64& rng) {
    std::vector<Draw> out;
    for (int i = 0; i < n; ++i) {
        Draw d;
        d.branch = (tag == Tag::II1 || tag == Tag::III) && i % 2 ? "generalized" : "effective";
        d.theta = random_params(tag, rng);
        d.g = random_element(tag, d.theta, rng, kTimeBox, d.branch);
        Interval image = image_interval(realize(d.g, d.theta).T, kTimeBox);
        d.g2 = random_element(tag, act(d.g, d.theta), rng, image, d.branch);
        out.push_back(d);
    }
    return out;
}

// generic reduced equation for the usual group
ReducedEquation generic_equation(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.5, 1.5);
    const Expr x = x_();
    std::vector<Expr> pool{num(1), x, sin(x), exp(x / num(2)), pow(x, num(2))};
    auto pick = [&] {
        std::uniform_int_distribution<std::size_t> i(0, pool.size() - 1);
        return real(U(rng)) * pool[i(rng)] + real(U(rng) - 1) * pool[i(rng)];
    };
    int r = 2 + static_cast<int>(rng() % 3);
    std::vector<Expr> A(r + 1, num(0));
    for (int j = 0; j <= r; ++j)
        if (j != 1) A[j] = pick();
    A[r] = real(U(rng)) + pow(x, num(2));
    return ReducedEquation(r, A, pick());
}

// stationary-general equation with C of one sign on the standard box
StationaryGeneralEquation stationary_equation(std::mt19937_64& rng, int k) {
    std::uniform_real_distribution<double> U(0.5, 1.5);
    const Expr x = x_();
    StationaryGeneralEquation s;
    s.order = 2 + k % 3;
    double sgn = k % 2 ? -1 : 1;
    switch (k % 5) {
        case 0: s.C = real(sgn * U(rng)); break;
        case 1: s.C = real(sgn) * (real(U(rng)) + real(U(rng)) * x); break;
        case 2: {
            static const double ex[] = {-2, -1, -0.5, 0.5, 1, 2, 3};
            s.C = real(sgn * U(rng)) * pow(x, real(ex[rng() % 7]));
            break;
        }
        case 3: s.C = real(sgn * U(rng)) * exp(real(U(rng) - 1) * x); break;
        default: s.C = real(sgn) * (num(2) + sin(real(U(rng)) * x)); break;
    }
    s.A.assign(s.order + 1, num(0));
    std::vector<Expr> pool{num(1), x, cos(x), exp(-x), pow(x, num(2))};
    std::uniform_int_distribution<std::size_t> i(0, pool.size() - 1);
    for (int j = 0; j <= s.order; ++j) s.A[j] = real(U(rng) - 1) * pool[i(rng)];
    s.A[s.order] = real(U(rng)) + x;
    s.B = real(U(rng)) * pool[i(rng)];
    return s;
}

}  // namespace

int main() {
    auto start = std::chrono::steady_clock::now();
    const Expr u = default_manufactured();
    std::mt19937_64 rng(20240611);

    std::map<Tag, std::vector<Draw>> draws;
    for (Tag tag : subclass_tags()) draws[tag] = draws_for(tag, 100, rng);

    bool all = true;

    // 1. residual covariance: usual group, every family, gauge maps
    {
        Tally t;
        std::mt19937_64 r1(1);
        for (int i = 0; i < 50; ++i) {
            ReducedEquation eq = generic_equation(r1);
            GroupElement g = random_element(Tag::F0, SubclassParams{}, r1);
            CheckReport rep = residual_covariance_check(eq, realize(g, SubclassParams{}), u, 200, 1e-8);
            rep.tag = "usual";
            t.add(rep);
        }
        for (Tag tag : subclass_tags())
            for (int i = 0; i < 50; ++i) {
                const Draw& d = draws[tag][i];
                CheckReport rep =
                    residual_covariance_check(instantiate_normal_form(d.theta), realize(d.g, d.theta), u, 200, 1e-8);
                rep.tag = tag_name(tag);
                rep.params = params_string(d.theta) + " | " + element_string(d.g);
                t.add(rep);
            }
        std::mt19937_64 r6(6);
        for (int i = 0; i < 50; ++i) {
            StationaryGeneralEquation s = stationary_equation(r6, i);
            auto [red, gauge] = gauge_stationary(s);
            t.add(gauge_covariance_check(s, gauge, u, 200, 1e-8));
        }
        line(1, t.ok(), "residual covariance (usual, 9 families, gauge; 50 pairs each, 200 points, tol 1e-8): " +
                            summary(t));
        all = all && t.ok();
    }

    // 2. classifying conditions
    {
        Tally t;
        for (Tag tag : subclass_tags())
            for (const Draw& d : draws[tag]) t.add(classifying_check(d.g, d.theta, 200, 1e-9));
        line(2, t.ok(), "classifying conditions (100 elements per tag, 200 points, tol 1e-9): " + summary(t));
        all = all && t.ok();
    }

    // 3. ODE families
    {
        Tally t;
        std::set<std::string> branches;
        for (Tag tag : subclass_tags())
            for (const Draw& d : draws[tag])
                for (const CheckReport& r : ode_family_check(d.g, d.theta, 1e-10, 200)) {
                    branches.insert(std::string(tag_name(tag)) + ":" + r.check + ":" + r.branch);
                    t.add(r);
                }
        std::mt19937_64 r3(3);
        std::uniform_real_distribution<double> U(-1, 1);
        for (int i = 0; i < 100; ++i) {
            TFamilyParams p{U(r3), U(r3), 0.5 + std::fabs(U(r3)), 0.2 * U(r3)};
            if (i % 4 == 1) p.gamma = 0;
            if (i % 4 == 2) p.delta = 0;
            if (i % 4 == 3) p.gamma = p.delta = 0;
            branches.insert(std::string("loglike:") + branch_name(t_branch(p)));
            t.add(loglike_ode_check(p, 1e-10, 200));
            // Moebius maps have zero Schwarzian
            double a = U(r3), b = U(r3) + 2, c = 0.3 * U(r3), e = 1 + 0.2 * U(r3);
            if (std::fabs(a * e - b * c) < 0.1) a += 1;
            const Expr tt = t_();
            t.add(schwarzian_check((real(a) * tt + real(b)) / (real(c) * tt + real(e)), 0, 0, 1e-10, 200));
        }
        for (double b : {0.5, 1.0, 1.5, 2.0}) {
            t.add(schwarzian_check(exp(real(2 * b) * t_()), b * b, 0, 1e-10, 200));
            t.add(schwarzian_check(tan(real(b) * t_()), -b * b, 0, 1e-10, 200));
        }
        line(3, t.ok(), "ODE families (" + std::to_string(branches.size()) +
                            " tag/ODE/branch combinations, particular solutions exp(2bt) and tan(bt), Moebius "
                            "Schwarzian; tol 1e-10): " +
                            summary(t));
        all = all && t.ok();
    }

    // 4. group axioms
    {
        Tally t;
        for (Tag tag : subclass_tags())
            for (const Draw& d : draws[tag]) {
                t.add(identity_check(tag, d.theta, 1e-8, d.branch));
                t.add(inverse_check(d.g, d.theta, 1e-8));
                t.add(closure_check(d.g, d.g2, d.theta, 1e-8));
            }
        std::mt19937_64 r4(4);
        for (int i = 0; i < 100; ++i) {
            SubclassParams th = random_params(Tag::II0, r4);
            GroupElement g = random_element(Tag::F0, th, r4);
            GroupElement g2 = random_element(Tag::F0, act(g, th), r4, image_interval(realize(g, th).T, kTimeBox));
            t.add(identity_check(Tag::F0, th));
            t.add(inverse_check(g, th));
            t.add(closure_check(g, g2, th));
        }
        line(4, t.ok(), "group axioms (identity, inverse, closure; 100 pairs per tag and the usual group, tol 1e-8): " +
                            summary(t));
        all = all && t.ok();
    }

    // 5. classifier round trip
    {
        Tally t;
        std::mt19937_64 r5(5);
        for (Tag tag : subclass_tags())
            for (int i = 0; i < 100; ++i) {
                SubclassParams p = random_params(tag, r5);
                Classification c = detect_subclass(instantiate_normal_form(p));
                double d = c.params ? params_distance(*c.params, p) : INFINITY;
                t.add(c.tag == tag && d <= 1e-6, d,
                      std::string(tag_name(tag)) + " classified as " + tag_name(c.tag) + " " + params_string(p));
            }
        int f0 = 0;
        for (const auto& [A, B] : fixtures::f0_instances()) {
            Tag got = detect_subclass(fixtures::equation(A, B)).tag;
            f0 += got == Tag::F0;
            t.add(got == Tag::F0, 0, "F0 instance A[r]=" + A.back() + " B=" + B + " classified as " + tag_name(got));
        }
        line(5, t.ok(), "classifier round trip (100 per tag, recovery 1e-6) and " + std::to_string(f0) + "/" +
                            std::to_string(fixtures::f0_instances().size()) + " F0 instances: " + summary(t));
        all = all && t.ok();
    }

    // 6. gauge correctness
    {
        Tally t;
        std::mt19937_64 r6(66);
        for (int i = 0; i < 50; ++i) {
            StationaryGeneralEquation s = stationary_equation(r6, i);
            auto [red, g] = gauge_stationary(s);
            StationaryGeneralEquation direct = apply_stationary(s, g);
            auto c = sample_equiv(direct.C, num(1), direct.domain, 200, 1e-10);
            auto a1 = sample_equiv(direct.A[1], num(0), direct.domain, 200, 1e-10);
            std::string what = "C=" + print(s.C) + " r=" + std::to_string(s.order);
            t.add(c.equal, c.max_deviation, "C~ " + what);
            t.add(a1.equal, a1.max_deviation, "A~1 " + what);
            CheckReport cov = gauge_covariance_check(s, g, u, 200, 1e-8);
            cov.params = what;
            t.add(cov);
        }
        line(6, t.ok(), "gauge (50 stationary equations, r <= 4, C of one sign; C~=1 and A~1=0 at tol 1e-10, covariance): " +
                            summary(t));
        all = all && t.ok();
    }

    // 7. discrepancy audit
    {
        AuditDocument doc = audit_paper(7, 3);
        std::map<std::string, const CheckReport*> by;
        for (const auto& r : doc.records) by[r.check] = &r;
        const char* wanted[] = {"discrepancy_I00_log_stage_b0", "discrepancy_I00_atan_stage_b0",
                                "discrepancy_IV0_2_gauge_exponent_b1_pos", "discrepancy_IV0_2_gauge_exponent_b1_neg"};
        bool ok = doc.all_passed();
        std::string text;
        for (const char* w : wanted) {
            auto it = by.find(w);
            if (it == by.end()) {
                ok = false;
                text += std::string(" missing ") + w + ";";
                continue;
            }
            ok = ok && it->second->pass;
            text += " " + it->second->detail + ";";
        }
        if (by.count("discrepancy_I00_log_stage_b0")) {
            ok = ok && std::fabs(by["discrepancy_I00_log_stage_b0"]->value - 1.3 * 1.3 / 4) < 1e-12 &&
                 std::fabs(by["discrepancy_I00_atan_stage_b0"]->value + 4 * 1.3 * 1.3) < 1e-12;
        }
        int failed = 0;
        for (const auto& r : doc.records) failed += !r.pass;
        line(7, ok, "discrepancy audit (" + std::to_string(doc.records.size()) + " records, " +
                        std::to_string(failed) + " failed):" + text);
        all = all && ok;
    }

    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("acceptance: %s in %.1f s\n", all ? "PASS" : "FAIL", secs);
    return all ? 0 : 1;
}
