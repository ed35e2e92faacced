#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bkdv/model.hpp"

namespace bkdv {

// One catalogue ansatz tried by detect_subclass.
struct AnsatzAttempt {
    Tag tag = Tag::F0;
    bool accepted = false;
    int free_params = 0;
    double fit_residual = INFINITY;         // weighted rms on the fit sample
    double validation_residual = INFINITY;  // max relative deviation on the validation sample
    double condition = 0;                   // worst condition number of the linear designs
    std::vector<std::string> violated;      // gates / equality constraints
    std::string reason;
    std::optional<SubclassParams> params;
};

struct Classification {
    Tag tag = Tag::F0;  // F0 when no ansatz is accepted
    std::optional<SubclassParams> params;
    std::vector<AnsatzAttempt> attempts;  // in fit order
    std::string overlap;                  // other accepted tags, when the equation lies on an overlap stratum
};

// Fits the catalogue ansaetze in the fixed order I1, I01, I00, II1, II0, III, IV1, IV0_high, IV0_2 and
// picks among the accepted ones the one with the fewest free parameters (then smaller residual, then
// fit order). Throws DomainError when the domain leaves too few sample points.
Classification detect_subclass(const ReducedEquation& eq, double tol = 1e-8);

// t~ = c1 t + c2, x~ = c3 x + c4 mapping eq1 onto eq2, if any. c1 is fixed by c3 through A^r; on a
// continuum of solutions the search prefers c2 = 0, then c3 = +-1 with c4 = 0, then c3 = +-1, then c4 = 0.
std::optional<std::array<double, 4>> match_modulo_usual_group(const ReducedEquation& eq1, const ReducedEquation& eq2,
                                                              double tol = 1e-8);

}  // namespace bkdv
