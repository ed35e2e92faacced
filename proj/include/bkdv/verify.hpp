#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bkdv/groups.hpp"
#include "bkdv/model.hpp"
#include "bkdv/transform.hpp"

namespace bkdv {

struct CheckReport {
    std::string check;   // kind of check, e.g. "coherence"
    std::string tag;     // subclass family or "usual"/"gauge"
    std::string branch;  // realized branch
    std::string params;  // parameter tuple used
    bool pass = false;
    double value = 0;  // max deviation or residual
    double tol = 0;
    double worst_t = NAN, worst_x = NAN;
    std::string detail;
};

// default manufactured function of the acceptance suite
Expr default_manufactured();

// Compares residual_tgt(u~) at (T, X1 x + X0) with (X1/T_t^2) residual_src(u) at (t, x).
CheckReport residual_covariance_check(const ReducedEquation& src, const FiberTransformation& tr, const Expr& u,
                                      std::size_t n = 200, double tol = 1e-8,
                                      std::optional<std::uint64_t> seed = std::nullopt);

// Same for the stationary class under a gauge map; factor c3/c1.
CheckReport gauge_covariance_check(const StationaryGeneralEquation& src, const GaugeTransformation& g, const Expr& u,
                                   std::size_t n = 200, double tol = 1e-8,
                                   std::optional<std::uint64_t> seed = std::nullopt);

// Coefficient-wise comparison of a time-dependent target with an expected reduced equation.
CheckReport compare_equations(const TimeDependentReducedEquation& got, const ReducedEquation& expected,
                              std::size_t n = 200, double tol = 1e-9,
                              std::optional<std::uint64_t> seed = std::nullopt);

// apply_reduced(instantiate(theta), realize(g, theta)) against instantiate(act(g, theta)).
CheckReport coherence_check(const GroupElement& g, const SubclassParams& theta, std::size_t n = 200,
                            double tol = 1e-9);

// Classifying-condition residuals of realize(g, theta) against instantiate(act(g, theta)).
CheckReport classifying_check(const GroupElement& g, const SubclassParams& theta, std::size_t n = 200,
                              double tol = 1e-9, A0Rule form = A0Rule::derived);

// Defining ODEs of the realized T / X0 / stage functions.
std::vector<CheckReport> ode_family_check(const GroupElement& g, const SubclassParams& theta, double tol = 1e-10,
                                          std::size_t n = 200);

// Loglike ODE gamma = delta/T_t + (1/T_t)_t.
CheckReport loglike_ode_check(const TFamilyParams& p, double tol = 1e-10, std::size_t n = 200,
                              const Interval& dom = kTimeBox);
// (T_tt/T_t)_t - T_tt^2/(2 T_t^2) = 2 bt T_t^2 - 2 b  (b = bt = 0 is the Möbius property)
CheckReport schwarzian_check(const Expr& T, double b, double bt, double tol = 1e-10, std::size_t n = 200,
                             const Interval& dom = kTimeBox);
// gamma -> 0 limit of the loglike family
CheckReport branch_continuity_check(const TFamilyParams& p, double tol = 1e-4);

CheckReport identity_check(Tag tag, const SubclassParams& theta, double tol = 1e-8,
                           const std::string& branch = "effective");
CheckReport inverse_check(const GroupElement& g, const SubclassParams& theta, double tol = 1e-8);
CheckReport closure_check(const GroupElement& g, const GroupElement& g2, const SubclassParams& theta,
                          double tol = 1e-8);

// max relative deviation over the parameter fields
double params_distance(const SubclassParams& a, const SubclassParams& b);
std::string params_string(const SubclassParams& p);
std::string element_string(const GroupElement& g);

struct AuditDocument {
    std::vector<CheckReport> records;
    bool all_passed() const;
    std::string summary_table() const;
};

AuditDocument audit_paper(std::uint64_t seed, int trials, std::optional<Tag> only = std::nullopt);

}  // namespace bkdv
