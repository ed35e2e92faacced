#include <cmath>
#include <functional>
#include <random>

#include "bkdv/verify.hpp"
#include "check_util.hpp"

namespace bkdv {

using namespace detail;

namespace {

const std::vector<Tag>& audit_order() {
    static const std::vector<Tag> v{Tag::F0,  Tag::I1,  Tag::I01, Tag::I00,      Tag::II0,
                                    Tag::II1, Tag::III, Tag::IV1, Tag::IV0_high, Tag::IV0_2};
    return v;
}

std::string tag_label(Tag t) { return t == Tag::F0 ? "usual" : tag_name(t); }

bool loglike_tag(Tag t) { return t == Tag::I1 || t == Tag::I01 || t == Tag::III || t == Tag::IV0_high; }

bool two_branches(Tag t) { return t == Tag::II1 || t == Tag::III; }

// Parameters for checks of the usual group alone (no subclass restriction): a generic II0 point.
SubclassParams usual_host(std::mt19937_64& rng) {
    SubclassParams p = random_params(Tag::II0, rng);
    return p;
}

// Max relative time-dependence of the coefficients of apply_reduced(src, tr): an invariant
// normal form gives 0; a non-invariant one leaves t in the transformed coefficients.
double time_dependence(const ReducedEquation& src, const FiberTransformation& tr, std::size_t n = 100) {
    TimeDependentReducedEquation eq = apply_reduced(src, tr);
    std::vector<Expr> cs;
    for (int j = 0; j <= eq.order; ++j)
        if (j != 1) cs.push_back(eq.A[j]);
    cs.push_back(eq.B);
    std::vector<Expr> ds;
    for (auto& c : cs) ds.push_back(dt(c));
    std::vector<Expr> all = cs;
    all.insert(all.end(), ds.begin(), ds.end());
    std::vector<Expr> ex;
    for (auto& e : all) {
        auto v = exclusions(e);
        ex.insert(ex.end(), v.begin(), v.end());
    }
    double worst = 0;
    sample_points(eq.domain, n, default_seed(), [&](double t, double x) {
        if (!clear_of_exclusions(ex, t, x, 1e-6)) return false;
        Evaluator ev(t, x);
        double w = 0;
        for (std::size_t i = 0; i < cs.size(); ++i) {
            double c = ev(cs[i]), d = ev(ds[i]);
            if (!std::isfinite(c) || !std::isfinite(d)) return false;
            w = std::max(w, std::fabs(d) / (1 + std::fabs(c)));
        }
        worst = std::max(worst, w);
        return true;
    });
    return worst;
}

// (X0_t/T_t)_t/T_t - bt1 X0 = bt0 - b0 X1/T_t^2, relative to the term magnitudes
double x0_relation_residual(const FiberTransformation& tr, double b0, double bt1, double bt0) {
    Expr Tt = dt(tr.T);
    Expr q = dt(tr.X0) / Tt;
    Expr lhs = dt(q) / Tt - R(bt1) * tr.X0;
    Expr rhs = R(bt0) - R(b0) * tr.X1 / pow(Tt, num(2));
    CheckReport r = compare_in_t(base("", "", 0), lhs, rhs, kTimeBox, 200, {dt(q) / Tt, R(bt1) * tr.X0});
    return r.value;
}

double schwarzian_residual(const Expr& T, double b, double bt) {
    return schwarzian_check(T, b, bt, 0).value;
}

CheckReport note(const std::string& check, const std::string& tag, double value, const std::string& detail) {
    CheckReport r = base(check, tag, 0);
    r.pass = true;  // informational: a reported discrepancy is an expected output
    r.value = value;
    r.branch = "-";
    r.detail = detail;
    return r;
}

// ---- gate fuzzing ----

CheckReport gate_fuzz(Tag tag, std::mt19937_64& rng) {
    CheckReport r = base("gate_fuzz", tag_label(tag), 0);
    r.branch = "-";
    SubclassParams p = random_params(tag, rng);
    r.params = params_string(p);
    std::vector<std::pair<std::string, SubclassParams>> bad;
    auto violate = [&](const std::string& what, const std::function<void(SubclassParams&)>& f) {
        SubclassParams q = p;
        f(q);
        bad.emplace_back(what, q);
    };
    violate("a_r = 0", [](SubclassParams& q) { q.a.back() = 0; });
    switch (tag) {
        case Tag::I1:
            violate("alpha = 0", [](SubclassParams& q) { q.alpha = 0; });
            violate("a01 = 0", [](SubclassParams& q) { q.a01 = 0; });
            break;
        case Tag::I01:
            violate("alpha = -2", [](SubclassParams& q) { q.alpha = -2; });
            violate("alpha = 0", [](SubclassParams& q) { q.alpha = 0; });
            break;
        case Tag::II1: violate("a01 = 0", [](SubclassParams& q) { q.a01 = 0; }); break;
        case Tag::III: violate("alpha = 0", [](SubclassParams& q) { q.alpha = 0; }); break;
        case Tag::IV1:
            violate("middle coefficients zero", [](SubclassParams& q) {
                for (int j = 2; j < q.order; ++j) q.a[j] = 0;
            });
            break;
        case Tag::IV0_high:
            violate("r = 2", [](SubclassParams& q) {
                q.order = 2;
                q.a.resize(3);
            });
            break;
        default: break;
    }
    std::string missed;
    GateReport ok = gate_check(p);
    if (!ok.ok) missed += " valid draw rejected;";
    int caught = 0;
    for (auto& [what, q] : bad) {
        if (!gate_check(q).ok) ++caught;
        else missed += " not caught: " + what + ";";
    }
    r.value = static_cast<double>(bad.size() - caught) + (ok.ok ? 0 : 1);
    r.pass = missed.empty();
    r.detail = missed.empty() ? "caught " + std::to_string(caught) + "/" + std::to_string(bad.size()) : missed;
    return r;
}

// usual-group element after a family element: the composite must act as act_usual after act
CheckReport usual_after_family(const GroupElement& g, const SubclassParams& theta, std::mt19937_64& rng) {
    CheckReport r = base("usual_after_family", tag_name(g.tag), 1e-9);
    r.params = params_string(theta) + " | " + element_string(g);
    try {
        r.branch = realized_branch(g, theta);
        std::uniform_real_distribution<double> u(0.5, 2), v(-0.5, 0.5);
        double c1 = u(rng), c2 = v(rng), c3 = u(rng) * (rng() % 2 ? 1 : -1), c4 = v(rng);
        FiberTransformation tr = realize(g, theta);
        FiberTransformation usual{R(c1) * t_() + R(c2), R(c3), R(c4)};
        SubclassParams out = act_usual(c1, c2, c3, c4, act(g, theta));
        CheckReport c = compare_equations(apply_reduced(instantiate_normal_form(theta), compose(usual, tr)),
                                          instantiate_normal_form(out), 100, r.tol);
        c.check = r.check;
        c.tag = r.tag;
        c.branch = r.branch;
        c.params = r.params + " | usual c1=" + fmt(c1) + " c2=" + fmt(c2) + " c3=" + fmt(c3) + " c4=" + fmt(c4);
        return c;
    } catch (const std::exception& e) {
        r.detail = e.what();
        r.value = INFINITY;
        return r;
    }
}

// a_r of the target perturbed by 1e-3 must be detected at tol 1e-6
CheckReport negative_control(const GroupElement& g, const SubclassParams& theta) {
    CheckReport r = base("negative_control", tag_name(g.tag), 1e-6);
    r.params = params_string(theta) + " | " + element_string(g);
    try {
        r.branch = realized_branch(g, theta);
        SubclassParams wrong = act(g, theta);
        wrong.a.back() += 1e-3;
        CheckReport c = compare_equations(apply_reduced(instantiate_normal_form(theta), realize(g, theta)),
                                          instantiate_normal_form(wrong), 100, r.tol);
        r.value = c.value;
        r.worst_t = c.worst_t;
        r.worst_x = c.worst_x;
        r.pass = c.value > r.tol;
        r.detail = r.pass ? "perturbation of a_r by 1e-3 detected" : "perturbation missed";
    } catch (const std::exception& e) {
        r.detail = e.what();
        r.value = INFINITY;
    }
    return r;
}

CheckReport tag_record(CheckReport r, const std::string& check) {
    r.check = check;
    return r;
}

void audit_tag(Tag tag, std::mt19937_64& rng, int trials, std::vector<CheckReport>& out) {
    const std::string label = tag_label(tag);
    if (tag == Tag::F0) {
        // the usual group on its own
        for (int i = 0; i < trials; ++i) {
            SubclassParams th = usual_host(rng);
            GroupElement g = random_element(Tag::F0, th, rng);
            SubclassParams th1 = act(g, th);
            GroupElement g2 = random_element(Tag::F0, th1, rng, image_interval(realize(g, th).T, kTimeBox));
            for (CheckReport r : {identity_check(Tag::F0, th), inverse_check(g, th), closure_check(g, g2, th)}) {
                r.tag = label;
                out.push_back(r);
            }
            CheckReport c = coherence_check(g, th);
            c.tag = label;
            out.push_back(c);
        }
        return;
    }
    for (int i = 0; i < trials; ++i) out.push_back(gate_fuzz(tag, rng));
    for (int i = 0; i < trials; ++i) {
        const std::string branch = two_branches(tag) && i % 2 == 1 ? "generalized" : "effective";
        SubclassParams th = random_params(tag, rng);
        GroupElement g = random_element(tag, th, rng, kTimeBox, branch);
        out.push_back(coherence_check(g, th));
        out.push_back(classifying_check(g, th));
        for (auto& r : ode_family_check(g, th)) out.push_back(r);
        out.push_back(identity_check(tag, th, 1e-8, branch));
        out.push_back(inverse_check(g, th));
        SubclassParams th1 = act(g, th);
        Interval d2 = image_interval(realize(g, th).T, kTimeBox);
        GroupElement g2 = random_element(tag, th1, rng, d2, branch);
        out.push_back(closure_check(g, g2, th));
        out.push_back(usual_after_family(g, th, rng));
        out.push_back(negative_control(g, th));
        if (loglike_tag(tag)) {
            std::uniform_real_distribution<double> u(-1, 1);
            TFamilyParams p{u(rng), u(rng), 0.5 + std::fabs(u(rng)), 0.2 * u(rng)};
            CheckReport b = branch_continuity_check(p);
            b.tag = label;
            out.push_back(b);
            CheckReport l = loglike_ode_check(p);
            l.tag = label;
            out.push_back(l);
        }
    }
    // particular solutions quoted for the staged families
    if (tag == Tag::I00 || tag == Tag::IV0_2) {
        for (double b : {0.5, 1.0, 1.5}) {
            CheckReport r = schwarzian_check(tan(R(b) * t_()), -b * b, 0);
            r.tag = label;
            out.push_back(tag_record(r, "ode_particular_tan"));
            CheckReport e = schwarzian_check(exp(R(2 * b) * t_()), b * b, 0);
            e.tag = label;
            out.push_back(tag_record(e, "ode_particular_exp"));
        }
    }
}

// ---- reported discrepancies between the prose or printed formulas and the computed ones ----

void discrepancies(std::optional<Tag> only, std::vector<CheckReport>& out) {
    auto want = [&](Tag t) { return !only || *only == t; };

    if (want(Tag::I00)) {
        SubclassParams th;
        th.tag = Tag::I00;
        th.order = 2;
        th.a = {0, 0, 1};
        th.b2 = 0.3;
        th = complete(th);
        const double c5 = 1.3;
        for (Stage2 s2 : {Stage2::log, Stage2::atan}) {
            GroupElement g;
            g.tag = Tag::I00;
            g[0] = 1;
            g[1] = 1;
            g[4] = 1;
            g[5] = c5;
            g.p2 = s2;
            double computed = act(g, th).b0;
            double prose = s2 == Stage2::log ? c5 * c5 : -c5 * c5;
            double formula = s2 == Stage2::log ? c5 * c5 / 4 : -4 * c5 * c5;
            Expr T = realize(g, th).T;
            double res_computed = schwarzian_residual(T, th.b0, computed);
            double res_prose = schwarzian_residual(T, th.b0, prose);
            CheckReport r = note(std::string("discrepancy_I00_") + stage2_name(s2) + "_stage_b0", "I00", computed,
                                 "c5=" + fmt(c5) + " computed b~0=" + fmt(computed) + " (displayed formula " +
                                     (s2 == Stage2::log ? "c5^2/4" : "-4 c5^2") + " = " + fmt(formula) +
                                     ") vs prose " + (s2 == Stage2::log ? "c5^2" : "-c5^2") + " = " + fmt(prose) +
                                     "; groupoid relation residual computed=" + fmt(res_computed) +
                                     " prose=" + fmt(res_prose));
            r.params = params_string(th) + " | " + element_string(g);
            r.pass = std::fabs(computed - formula) <= 1e-12 * (1 + std::fabs(formula)) && res_computed <= 1e-10;
            out.push_back(r);
        }
        // printed B term (x+beta)^-5 is not invariant
        GroupElement g;
        g.tag = Tag::I00;
        g[0] = 1.2;
        g[1] = 0.9;
        g[2] = 0.3;
        g[3] = 0.4;
        g[4] = std::fabs(g[1] * g[0] - g[2] * g[3]);
        FiberTransformation tr = realize(g, th);
        ReducedEquation src = instantiate_normal_form(th);
        double used = time_dependence(src, tr);
        src.B = R(th.b0) * x_() + R(th.b2) * pow(x_(), num(-5));
        double printed = time_dependence(src, tr);
        out.push_back(note("discrepancy_I00_B_power", "I00", printed,
                           "time dependence after a Möbius element: B with (x+beta)^-3 " + fmt(used) +
                               ", printed (x+beta)^-5 " + fmt(printed)));
    }

    if (want(Tag::IV0_2)) {
        // stage-1 gauge R1: exponent sign of the printed forms against the X0 relation
        const double b0 = 0.7;
        for (double b1 : {0.81, -0.81}) {
            const double b = std::sqrt(std::fabs(b1));
            const Expr t = t_();
            Expr P = b1 > 0 ? exp(R(2 * b) * t) : tan(R(b) * t);
            Expr used, printed;
            std::string used_s, printed_s;
            if (b1 > 0) {
                used = R(4 * b0 * std::pow(2 * b, -1.5)) * exp(R(b) * t);
                printed = R(4 * b0 * std::pow(2 * b, 1.5)) * exp(R(b) * t);
                used_s = "4 b0 (2 sqrt(b1))^(-3/2) e^(sqrt(b1) t)";
                printed_s = "4 b0 (2 sqrt(b1))^(3/2) e^(sqrt(b1) t)";
            } else {
                used = R(-b0 * std::pow(-b1, -0.75)) / cos(R(b) * t);
                printed = R(-b0 * std::pow(-b1, 0.75)) / cos(R(b) * t);
                used_s = "-b0 (-b1)^(-3/4) / cos(sqrt(-b1) t)";
                printed_s = "-b0 (-b1)^(3/4) / cos(sqrt(-b1) t)";
            }
            FiberTransformation st_used{P, sqrt(dt(P)), used}, st_printed{P, sqrt(dt(P)), printed};
            double ru = x0_relation_residual(st_used, b0, 0, 0), rp = x0_relation_residual(st_printed, b0, 0, 0);
            CheckReport r = note(std::string("discrepancy_IV0_2_gauge_exponent_b1_") + (b1 > 0 ? "pos" : "neg"),
                                 "IV0_2", ru,
                                 "b1=" + fmt(b1) + " b0=" + fmt(b0) + ": X0 relation residual of " + used_s + " = " +
                                     fmt(ru) + " (used), of " + printed_s + " = " + fmt(rp) + " (printed, rejected)");
            r.pass = ru <= 1e-10 && rp > 1e-6;
            out.push_back(r);
        }
        // stage-2 b~0 sign
        SubclassParams th;
        th.tag = Tag::IV0_2;
        th.order = 2;
        th.a = {0, 0, 1};
        th.b0 = 0.3;
        th = complete(th);
        const double c5 = 1.2, c6 = 0.5;
        for (Stage2 s2 : {Stage2::log, Stage2::atan}) {
            GroupElement g;
            g.tag = Tag::IV0_2;
            g[0] = 1;
            g[1] = 1;
            g[4] = 1;
            g[5] = c5;
            g[6] = c6;
            g.p2 = s2;
            SubclassParams tg = act(g, th);
            FiberTransformation tr = realize(g, th);
            double rc = x0_relation_residual(tr, th.b0, tg.b1, tg.b0);
            double rp = x0_relation_residual(tr, th.b0, tg.b1, c6);
            CheckReport r = note(std::string("discrepancy_IV0_2_") + stage2_name(s2) + "_stage_b0", "IV0_2", tg.b0,
                                 "c6=" + fmt(c6) + " computed b~0=" + fmt(tg.b0) + " vs prose c6=" + fmt(c6) +
                                     "; X0 relation residual computed=" + fmt(rc) + " prose=" + fmt(rp));
            r.params = params_string(th) + " | " + element_string(g);
            r.pass = std::fabs(tg.b0 + c6) <= 1e-12 && rc <= 1e-10;
            out.push_back(r);
        }
    }

    if (!only) {
        // printed A0 transformation coefficient T_t/X1 against the derived 1/T_t; needs a non-constant A0
        SubclassParams th;
        th.tag = Tag::I1;
        th.order = 2;
        th.alpha = 1.5;
        th.a = {0, 0, 1};
        th.a01 = 0.8;
        th.b1 = 0.6;
        th.b2 = 0.1;
        th = complete(th);
        GroupElement g;
        g.tag = Tag::I1;
        g[1] = 1;
        g[4] = 1.1;
        g[5] = 0.7;
        CheckReport d = classifying_check(g, th, 100, 1e-9, A0Rule::derived);
        CheckReport p = classifying_check(g, th, 100, 1e-9, A0Rule::printed);
        CheckReport r = note("discrepancy_a0_rule_printed", "all", p.value,
                             "B-condition residual with printed coefficient T_t/X1 = " + fmt(p.value) +
                                 ", with derived 1/T_t = " + fmt(d.value));
        r.params = params_string(th) + " | " + element_string(g);
        r.pass = d.pass && !p.pass;
        out.push_back(r);
    }

    if (want(Tag::IV1)) {
        SubclassParams th;
        th.tag = Tag::IV1;
        th.order = 3;
        th.a = {0, 0, 0.8, 1.1};
        th.a00 = 0.9;
        th.b1 = 0.35;
        th.b0 = 0.2;
        GroupElement g;
        g.tag = Tag::IV1;
        g[1] = 0.3;
        g[2] = -0.2;
        g[3] = 0.25;
        g[4] = 1.2;
        g[6] = 0.9;
        FiberTransformation tr = realize(g, th);
        Expr d1 = dt(tr.X0), d2 = dt(d1), d3 = dt(d2);
        auto ode = [&](double k2, double k1) {
            return compare_in_t(base("", "", 0), d3 - R(k2) * d2 - R(k1) * d1, num(0), kTimeBox, 200,
                                {d3, R(k2) * d2, R(k1) * d1})
                .value;
        };
        double used = ode(th.a00, th.b1), printed = ode(th.b1, th.a00);
        CheckReport r = note("discrepancy_IV1_x0_ode", "IV1", printed,
                             "X0_ttt - a0 X0_tt - b1 X0_t residual " + fmt(used) +
                                 "; printed X0_ttt - b1 X0_tt - a0 X0_t residual " + fmt(printed));
        r.params = params_string(th) + " | " + element_string(g);
        r.pass = used <= 1e-10 && printed > 1e-6;
        out.push_back(r);
        out.push_back(note("note_IV1_gate_alpha", "IV1", 0,
                           "catalogue gate alpha a_r sum|a_j| != 0 has no alpha in the IV normal form; "
                           "implemented a_r sum|a_j| != 0"));
    }

    if (want(Tag::I1)) {
        SubclassParams th;
        th.tag = Tag::I1;
        th.order = 2;
        th.alpha = 1.5;
        th.a = {0, 0, 1};
        th.a01 = 0.8;
        th.b1 = 0.6;
        th.b2 = 0.1;
        th = complete(th);
        GroupElement g;
        g.tag = Tag::I1;
        g[1] = 1;
        g[4] = 1.1;
        g[5] = 0.7;
        FiberTransformation tr = realize(g, th);
        ReducedEquation src = instantiate_normal_form(th);
        double used = time_dependence(src, tr);
        const double printed_a00 = (th.alpha + 2) * th.b1 / th.a01;
        src.A[0] = R(printed_a00) + R(th.a01) * pow(abs(x_()), R(th.alpha));
        double printed = time_dependence(src, tr);
        out.push_back(note("discrepancy_I1_a00_sign", "I1", printed,
                           "a00 = -(alpha+2) b1/a01 = " + fmt(th.a00) + " time dependence " + fmt(used) +
                               "; printed +(alpha+2) b1/a01 = " + fmt(printed_a00) + " time dependence " +
                               fmt(printed)));
    }

    if (want(Tag::III)) {
        SubclassParams th;
        th.tag = Tag::III;
        th.order = 2;
        th.alpha = 1.2;
        th.a = {0, 0, 1};
        th.a01 = 0.5;
        th.a00 = 0.8;
        th.b2 = 0.2;
        th = complete(th);
        GroupElement g;
        g.tag = Tag::III;
        g[1] = 1;
        g[3] = 0.6;
        g[4] = 1;
        g[5] = 1;
        FiberTransformation tr = realize(g, th);
        ReducedEquation src = instantiate_normal_form(th);
        double used = time_dependence(src, tr);
        const double printed_b0 = -(th.a00 * th.a00 + th.a00) / (2 * th.alpha);
        const Expr E = exp(R(th.alpha) * x_());
        src.B = R(th.b2) * exp(R(2 * th.alpha) * x_()) + R(th.b1) * E + R(printed_b0);
        double printed = time_dependence(src, tr);
        out.push_back(note("discrepancy_III_b0", "III", printed,
                           "b0 = -a00^2/alpha = " + fmt(th.b0) + " time dependence " + fmt(used) +
                               "; printed -(a00^2+a00)/(2 alpha) = " + fmt(printed_b0) + " time dependence " +
                               fmt(printed)));
    }

    if (want(Tag::II0)) {
        SubclassParams th;
        th.tag = Tag::II0;
        th.order = 2;
        th.a = {0, 0, 1};
        th.a00 = 0.6;
        th.b0 = 0.4;
        GroupElement g;
        g.tag = Tag::II0;
        g[1] = 1.2;
        g[3] = 0.5;
        g[4] = 1;
        FiberTransformation tr = realize(g, th);
        ReducedEquation src = instantiate_normal_form(th);
        double used = time_dependence(src, tr);
        ReducedEquation flat = src;
        flat.B = R(th.b0);
        double printed_B = time_dependence(flat, tr);
        out.push_back(note("discrepancy_II0_B", "II0", printed_B,
                           "B = b0 (x+beta) time dependence " + fmt(used) + "; printed constant B = b0 " +
                               fmt(printed_B)));
        SubclassParams tg = act(g, th), pr = tg;
        pr.b0 = (th.b0 - g[3] * g[3]) / (g[1] * g[1]);
        TimeDependentReducedEquation got = apply_reduced(src, tr);
        double dv = compare_equations(got, instantiate_normal_form(tg), 100, 1e-9).value;
        double pv = compare_equations(got, instantiate_normal_form(pr), 100, 1e-9).value;
        CheckReport r = note("discrepancy_II0_b0_rule", "II0", pv,
                             "b~0 = (b0 - c3^2 - a00 c3)/c1^2 = " + fmt(tg.b0) + " deviation " + fmt(dv) +
                                 "; printed (b0 - c3^2)/c1^2 = " + fmt(pr.b0) + " deviation " + fmt(pv));
        r.params = params_string(th) + " | " + element_string(g);
        r.pass = dv <= 1e-9;
        out.push_back(r);
    }

    if (want(Tag::IV0_high))
        out.push_back(note("note_IV0_high_minus_token", "IV0_high", 0,
                           "the token \"\\-\" before two fractions of the second (T, X0) pair is read as a minus "
                           "sign; the implemented X0 is re-derived and passes the X0 relation"));

    if (!only || loglike_tag(*only)) {
        TFamilyParams p{1, 2, 1, 0};
        Expr w = num(1) / dt(mk_T_loglike(p));
        double lhs = evaluate(R(p.delta) * w + dt(w), 0.5, 0);
        out.push_back(note("note_remark_stray_zero", "T-family", lhs,
                           "delta/T_t + (1/T_t)_t at (gamma, delta) = (1, 2) evaluates to " + fmt(lhs) +
                               " = gamma, so the trailing \"= 0\" of the displayed ODE cannot hold"));
    }
}

}  // namespace

AuditDocument audit_paper(std::uint64_t seed, int trials, std::optional<Tag> only) {
    AuditDocument doc;
    if (trials <= 0) return doc;
    for (Tag tag : audit_order()) {
        if (only && *only != tag) continue;
        // one stream per tag keeps a tag's records independent of the filter
        std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(tag) + 1);
        try {
            audit_tag(tag, rng, trials, doc.records);
        } catch (const std::exception& e) {
            CheckReport r = base("audit", tag_label(tag), 0);
            r.value = INFINITY;
            r.detail = e.what();
            doc.records.push_back(r);
        }
    }
    discrepancies(only, doc.records);
    return doc;
}

}  // namespace bkdv
