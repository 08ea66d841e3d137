// Factored auxiliary-distribution schemes for the two constrained outer-bound
// regions, the joint builders that realize them against a broadcast channel,
// and the equality-constraint residuals / rate points evaluated on the joint.
//
// Private schemes factor as p(u) p(v) p(w1,w2|u,v) p(x|u,v,w1,w2) and produce
// joints over (U,V,W1,W2,X,Y1,Y2); common schemes add an independent T and
// optionally restrict X to a deterministic function of (t,u,v,w1,w2).
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bcbound/probcore.hpp"

namespace bcbound {

struct SchemeCards {
    int u = 1, v = 1, w1 = 1, w2 = 1;
    int t = 0;  // 0 for private schemes, >= 1 for common schemes
};

struct PrivateScheme {
    SchemeCards cards;  // cards.t ignored
    int x_card = 1;
    Eigen::ArrayXd p_u;            // [u]
    Eigen::ArrayXd p_v;            // [v]
    Eigen::ArrayXd p_w_given_uv;   // [u][v][w1][w2]
    Eigen::ArrayXd p_x_given_uvw;  // [u][v][w1][w2][x]
};

struct CommonScheme {
    SchemeCards cards;  // cards.t >= 1
    int x_card = 1;
    Eigen::ArrayXd p_t;             // [t]
    Eigen::ArrayXd p_u;             // [u]
    Eigen::ArrayXd p_v;             // [v]
    Eigen::ArrayXd p_w_given_tuv;   // [t][u][v][w1][w2]
    bool deterministic_x = false;
    Eigen::ArrayXd p_x_given_tuvw;  // [t][u][v][w1][w2][x]; empty when deterministic
    std::vector<int> x_map;         // [t][u][v][w1][w2] flat; used when deterministic
};

// Throw std::invalid_argument when a simplex factor is malformed
// (negative entries beyond clamp tolerance, or a slice not summing to 1).
void validate(const PrivateScheme& scheme);
void validate(const CommonScheme& scheme);

JointDist build_private_joint(const PrivateScheme& scheme, const Channel& ch);
JointDist build_common_joint(const CommonScheme& scheme, const Channel& ch);

// One equality constraint written as I(a;b|c) = I(a;b|c), with groups kept
// verbatim (family-(3) instances may overlap; duplicated conditioning
// variables are deduplicated at evaluation time).
struct CmiSpec {
    Names a, b, c;
};

struct EqualityConstraintSpec {
    std::string id;  // canonical rendering of the equality
    CmiSpec lhs, rhs;
};

// The seven private-scheme equalities, in their stated order.
const std::vector<EqualityConstraintSpec>& private_constraints();

// The 93 common-scheme equalities: 13 pairwise instances of the chained
// family, 72 non-degenerate instances of the conditional-exchange family
// over A subset {T,U,V}, B1 subset {T,U}, B2 subset {T,V}, and 8 instances
// of the cross-output family. The 56 subset combinations with an empty B1
// or B2 are identically 0 = 0 and are skipped.
const std::vector<EqualityConstraintSpec>& common_constraints();

struct ResidualEntry {
    std::string id;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;  // lhs - rhs, in bits
};

struct ConstraintResiduals {
    std::vector<ResidualEntry> entries;
    double norm_inf = 0.0;
};

double eval_cmi(const JointDist& joint, const CmiSpec& term);
ConstraintResiduals eval_residuals(const JointDist& joint,
                                   const std::vector<EqualityConstraintSpec>& constraints);

ConstraintResiduals residuals_private(const JointDist& joint);
ConstraintResiduals residuals_common(const JointDist& joint);

// (I(U;Y1|W1), I(V;Y2|W2)) in bits.
Eigen::Vector2d rate_point_private(const JointDist& joint);

// (min{I(T;Y1|W1), I(T;Y2|W2)}, I(U;Y1|W1), I(V;Y2|W2)) in bits.
Eigen::Vector3d rate_point_common(const JointDist& joint);

}  // namespace bcbound
