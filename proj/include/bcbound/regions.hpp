// Membership and slack evaluation of rate points against the prior outer
// bounds: the private-message bound with a single auxiliary W (checked with
// W = (W1,W2)) and the common-message New-Jersey bound, plus the pointwise
// inclusion checks and Pareto/hull frontier extraction.
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bcbound/schemes.hpp"

namespace bcbound {

struct SlackEntry {
    std::string id;
    double bound = 0.0;  // right-hand side, bits
    double rate = 0.0;   // left-hand side, bits
    double slack = 0.0;  // bound - rate
};

struct SlackVector {
    std::vector<SlackEntry> entries;
    double min_slack = 0.0;
};

// Slacks of the four W-auxiliary bound inequalities at the given rate pair,
// with W taken as the pair (W1,W2).
SlackVector uvw_bound_slacks(const JointDist& joint, const Eigen::Vector2d& rate);

// Exchange identity behind the equivalence of the two sum-rate forms: returns
//   lhs_minus_rhs = [I(U;Y1|W) + I(V;Y2|U,W)] - [I(U;Y1|V,W) + I(V;Y2|W)]
//   discrepancy   = I(U;V|W,Y2) - I(U;V|W,Y1)
// with W = (W1,W2). The two values agree for every joint (chain-rule
// identity); both vanish exactly when the Y1/Y2 exchange constraint holds.
std::pair<double, double> sum_rate_exchange_identity(const JointDist& joint);

// Typo policy for the two New-Jersey lines whose printed form is suspect:
// corrected mode (default) reads "R2 <= I(V;Y2|W2)" and
// "R0+R2 <= I(T,V;Y2|W2)", restoring the bound's 1<->2 symmetry; literal
// mode evaluates the lines exactly as printed, with W := (W1,W2).
enum class NjMode { kCorrected, kLiteral };

// Slacks of the eleven New-Jersey inequalities at the given rate triple.
SlackVector nj_bound_slacks(const JointDist& joint, const Eigen::Vector3d& rate, NjMode mode);

struct ClaimTolerances {
    double constraint_tol = 1e-6;  // bits
    double membership_tol = 1e-5;  // bits
};

struct InclusionReport {
    ConstraintResiduals residuals;
    double residual_inf = 0.0;
    Eigen::VectorXd rate;
    SlackVector slacks;
    bool pass = false;
};

// claim1: the private constrained region's rate point lies in the W-bound.
InclusionReport claim_check(const PrivateScheme& scheme, const Channel& ch,
                            const ClaimTolerances& tols = {});

// claim2: the common constrained region's rate triple lies in the NJ bound.
InclusionReport claim_check(const CommonScheme& scheme, const Channel& ch,
                            NjMode mode = NjMode::kCorrected, const ClaimTolerances& tols = {});

// Values along the sum-rate inclusion chain, in printed order. Steps 0->1,
// 2->3 and 3->4 are chain-rule identities; steps 1->2 and 4->5 move by one
// constraint each; the last value dominates rate1 + rate2 by nonnegativity.
struct InclusionChain {
    std::array<double, 6> values{};
    double rate_sum = 0.0;
};
InclusionChain claim1_chain(const JointDist& joint);

// Pareto-maximal points under coordinatewise <=, in increasing lexicographic
// order. Duplicates collapse to one representative.
std::vector<Eigen::VectorXd> frontier_raw(const std::vector<Eigen::VectorXd>& points);

// Upper-right boundary of the convex hull of the sample together with its
// axis projections, ordered by increasing first coordinate. 2-D only.
std::vector<Eigen::Vector2d> frontier_hull(const std::vector<Eigen::Vector2d>& points);

// True when `p` is dominated by the hull polyline (on or below it).
bool hull_dominates(const std::vector<Eigen::Vector2d>& hull, const Eigen::Vector2d& p,
                    double tol = 1e-12);

}  // namespace bcbound
