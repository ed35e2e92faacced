#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bkdv/groups.hpp"
#include "bkdv/model.hpp"
#include "bkdv/transform.hpp"

namespace bkdv {

// Line-oriented "key: value" files. Blank lines and lines starting with '#' are skipped;
// unknown or repeated keys raise ParseError carrying the line number.

// Everything an equation file may hold. A[1] and C are present only for stationary-general input;
// time_map marks a time-dependent equation written in the source time.
struct EquationDoc {
    int order = 2;
    std::vector<Expr> A;  // A[0] .. A[order]
    Expr B;
    std::optional<Expr> C, A1;
    std::optional<Expr> time_map;
    Box domain;
    bool has_domain = false;
};

EquationDoc read_equation(std::istream& in);
EquationDoc read_equation_file(const std::string& path);

// Reduced view; throws DomainError when C or A[1] deviate from 1 / 0 or a coefficient depends on t.
ReducedEquation to_reduced(const EquationDoc& doc);
TimeDependentReducedEquation to_time_dependent(const EquationDoc& doc);
StationaryGeneralEquation to_stationary(const EquationDoc& doc);

void write_equation(std::ostream& out, const ReducedEquation& eq);
void write_equation(std::ostream& out, const TimeDependentReducedEquation& eq);
void write_equation(std::ostream& out, const StationaryGeneralEquation& eq);

FiberTransformation read_transform(std::istream& in);
void write_transform(std::ostream& out, const FiberTransformation& tr);
// gauge maps are written with keys c1, c3, X, U0, Xinv
void write_gauge(std::ostream& out, const GaugeTransformation& g);

// A --map file is either a transform or a group element; told apart by the "tag" key.
bool looks_like_group_element(std::istream& in);

GroupElement read_group_element(std::istream& in);
void write_group_element(std::ostream& out, const GroupElement& g);

// keys: beta, alpha, a[j], a01, a00, b0, b1, b2 (missing keys are 0)
SubclassParams read_params(std::istream& in, Tag tag, int order);
void write_params(std::ostream& out, const SubclassParams& p);

std::string format_real(double v);  // 17 significant digits

}  // namespace bkdv
