#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bkdv/expr.hpp"
#include "bkdv/sampling.hpp"

namespace bkdv {

// u_t + u u_x = sum_{j=2}^r A^j(x) u_j + A0(x) u + B(x)
struct ReducedEquation {
    int order = 2;
    std::vector<Expr> A;  // A[0] is A0, A[1] unused (zero), A[j] for j = 2..r
    Expr B;
    Box domain;

    ReducedEquation() = default;
    ReducedEquation(int r, std::vector<Expr> coeffs, Expr b, Box dom = Box::standard());
    const Expr& A0() const { return A[0]; }
};

// Same shape with coefficients in (t, x). When time_map is set the equation is
// written in the source time s with target time T(s), so d/dt~ = (1/T'(s)) d/ds.
struct TimeDependentReducedEquation {
    int order = 2;
    std::vector<Expr> A;
    Expr B;
    Box domain;
    std::optional<Expr> time_map;

    TimeDependentReducedEquation() = default;
    explicit TimeDependentReducedEquation(const ReducedEquation& eq);
};

// u_t + C(x) u u_x = sum_{k=0}^r A^k(x) u_k + B(x)
struct StationaryGeneralEquation {
    int order = 2;
    Expr C = num(1);
    std::vector<Expr> A;  // A[0] .. A[r], A[1] included
    Expr B;
    Box domain;
};

enum class Tag { I1, I01, I00, II0, II1, III, IV1, IV0_high, IV0_2, F0 };

const char* tag_name(Tag t);
std::optional<Tag> parse_tag(std::string_view s);
const std::vector<Tag>& subclass_tags();  // the nine normalized subclasses in classifier order

struct SubclassParams {
    Tag tag = Tag::F0;
    int order = 2;
    double beta = 0, alpha = 0;
    std::vector<double> a;  // a[j], j = 0..r; entries 0 and 1 unused
    double a01 = 0, a00 = 0, b0 = 0, b1 = 0, b2 = 0;

    double ar() const { return a.empty() ? 0.0 : a.back(); }
    double aj(int j) const { return j < static_cast<int>(a.size()) ? a[j] : 0.0; }
};

// Fills the fields fixed by the tag's equality constraints (I1: a00, b0; I01: b1, b0;
// III: b1, b0; IV0_high: b1; I00: alpha; IV0_2: a00). Leaves gates untouched.
SubclassParams complete(SubclassParams p);

struct GateReport {
    bool ok = true;
    std::vector<std::string> violated;
};

struct GateError : std::runtime_error {
    GateReport report;
    explicit GateError(GateReport r);
};

GateReport gate_check(const SubclassParams& p);

ReducedEquation instantiate_normal_form(const SubclassParams& p, int r);
ReducedEquation instantiate_normal_form(const SubclassParams& p);

// Equation residual u_t + u u_x - sum A^j u_j - A0 u - B as an expression in (t, x).
Expr residual_expr(const TimeDependentReducedEquation& eq, const Expr& u);
Expr residual_expr(const ReducedEquation& eq, const Expr& u);
Expr residual_expr(const StationaryGeneralEquation& eq, const Expr& u);
// The individual terms of the residual above; their summed magnitude measures cancellation.
std::vector<Expr> residual_terms(const TimeDependentReducedEquation& eq, const Expr& u);
std::vector<Expr> residual_terms(const StationaryGeneralEquation& eq, const Expr& u);
double residual(const ReducedEquation& eq, const Expr& u, double t, double x);
double residual(const TimeDependentReducedEquation& eq, const Expr& u, double t, double x);

// Exclusions of all coefficients of an equation.
std::vector<Expr> equation_exclusions(const TimeDependentReducedEquation& eq);

}  // namespace bkdv
