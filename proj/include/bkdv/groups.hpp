#pragma once

#include <array>
#include <optional>
#include <random>
#include <string>

#include "bkdv/model.hpp"
#include "bkdv/transform.hpp"

namespace bkdv {

// T with gamma = delta/T_t + (1/T_t)_t.
struct TFamilyParams {
    double gamma = 0, delta = 0, c1 = 1, c2 = 0;
};

enum class TBranch { general, gamma_zero, delta_zero, both_zero };

TBranch t_branch(const TFamilyParams& p);
const char* branch_name(TBranch b);

// Throws DomainError for c1 = 0 and for the degenerate gamma*c2 = -1 case of the delta = 0 branch.
Expr mk_T_loglike(const TFamilyParams& p);

enum class Stage1 { automatic, t, tan, exp };
enum class Stage2 { id, log, atan };

const char* stage1_name(Stage1 s);
const char* stage2_name(Stage2 s);
std::optional<Stage1> parse_stage1(std::string_view s);
std::optional<Stage2> parse_stage2(std::string_view s);

// Group parameters of one subclass family. Which slots of c are used depends on the tag:
//   F0 (usual group)  c1..c4: T = c1 t + c2, X1 = c3, X0 = c4
//   II0, II1          c1..c4
//   I1, I01           c1, c2 (T data), c4, c5 (= gamma), epsilon
//   III               c1, c2, c3 (gamma, or a00 + c3 when effective), c4, c5
//   IV1               c1..c3 (X0), c4, c5 (T), c6 (X1)
//   IV0_high          c1, c2 (T data), c3 (= target a0), c4, c5 (= target b0), c6, c7, epsilon
//   I00               c0..c3 (Möbius), c4, c5, epsilon, p2
//   IV0_2             c0..c3 (Möbius), c4, c5, c6, c7, c8, epsilon, p2
struct GroupElement {
    Tag tag = Tag::F0;
    std::string branch = "effective";  // or "generalized" (II1, III)
    std::array<double, 10> c{};
    int epsilon = 1;
    Stage1 p1 = Stage1::automatic;
    Stage2 p2 = Stage2::id;
    double s = 0;  // target translation (tags I*, II*): target beta

    double& operator[](int i) { return c.at(i); }
    double operator[](int i) const { return c.at(i); }
};

inline const Interval kTimeBox{0.1, 0.9};

// Stage-1 function chosen by the sign of b0 (I00) or b1 (IV0_2).
Stage1 stage1_for(const SubclassParams& theta);

FiberTransformation realize(const GroupElement& g, const SubclassParams& theta, const Interval& t_domain = kTimeBox);
SubclassParams act(const GroupElement& g, const SubclassParams& theta);

// Usual-group action G~_F on the subclass parameters (T = c1 t + c2, x~ = c3 x + c4).
SubclassParams act_usual(double c1, double c2, double c3, double c4, const SubclassParams& theta);

// Human-readable branch of the realized family (e.g. the T-family branch or the IV1 root case).
std::string realized_branch(const GroupElement& g, const SubclassParams& theta);

struct Recovery {
    GroupElement g;
    double residual = 0;  // max relative deviation of realize(g) from the given transformation
};

// Finds an element g of the tag's family with realize(g, theta) = tr on the t-domain, using the target
// parameters for the data the transformation alone leaves implicit (stage choice, c5 ...).
std::optional<Recovery> recover(Tag tag, const SubclassParams& theta, const FiberTransformation& tr,
                                const SubclassParams& target, const std::string& branch = "effective",
                                const Interval& t_domain = kTimeBox);

GroupElement identity_element(Tag tag, const SubclassParams& theta, const std::string& branch = "effective");

// Max relative deviation of (T, X1, X0) of two transformations at n points of the t-domain.
double transformation_distance(const FiberTransformation& a, const FiberTransformation& b, const Interval& t_domain,
                               int n = 41);

Interval image_interval(const Expr& T, const Interval& t_domain);

// Random gated parameters; order r chosen by the tag when r <= 0.
SubclassParams random_params(Tag tag, std::mt19937_64& rng, int r = 0);
// Random valid element for theta on the t-domain (rejection sampling).
GroupElement random_element(Tag tag, const SubclassParams& theta, std::mt19937_64& rng,
                            const Interval& t_domain = kTimeBox, const std::string& branch = "effective");

}  // namespace bkdv
