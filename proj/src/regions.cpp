#include "bcbound/regions.hpp"

#include <algorithm>
#include <cmath>

namespace bcbound {

namespace {

SlackVector finish(std::vector<SlackEntry> entries) {
    SlackVector out;
    out.entries = std::move(entries);
    out.min_slack = out.entries.empty() ? 0.0 : out.entries.front().slack;
    for (const auto& e : out.entries) out.min_slack = std::min(out.min_slack, e.slack);
    return out;
}

}  // namespace

SlackVector uvw_bound_slacks(const JointDist& joint, const Eigen::Vector2d& rate) {
    const Names w = {"W1", "W2"};
    double r1 = rate[0], r2 = rate[1];

    double i_uw_y1 = mutual_info_groups(joint, {"U", "W1", "W2"}, {"Y1"});
    double i_vw_y2 = mutual_info_groups(joint, {"V", "W1", "W2"}, {"Y2"});
    double i_w_y1 = mutual_info_groups(joint, w, {"Y1"});
    double i_w_y2 = mutual_info_groups(joint, w, {"Y2"});
    double min_w = std::min(i_w_y1, i_w_y2);
    double sum_a = min_w + cond_mutual_info(joint, {"U"}, {"Y1"}, w) +
                   cond_mutual_info(joint, {"V"}, {"Y2"}, {"U", "W1", "W2"});
    double sum_b = min_w + cond_mutual_info(joint, {"U"}, {"Y1"}, {"V", "W1", "W2"}) +
                   cond_mutual_info(joint, {"V"}, {"Y2"}, w);

    std::vector<SlackEntry> e;
    e.push_back({"R1 <= I(U,W;Y1)", i_uw_y1, r1, i_uw_y1 - r1});
    e.push_back({"R2 <= I(V,W;Y2)", i_vw_y2, r2, i_vw_y2 - r2});
    e.push_back({"R1+R2 <= min{I(W;Y1),I(W;Y2)} + I(U;Y1|W) + I(V;Y2|U,W)", sum_a, r1 + r2,
                 sum_a - r1 - r2});
    e.push_back({"R1+R2 <= min{I(W;Y1),I(W;Y2)} + I(U;Y1|V,W) + I(V;Y2|W)", sum_b, r1 + r2,
                 sum_b - r1 - r2});
    return finish(std::move(e));
}

std::pair<double, double> sum_rate_exchange_identity(const JointDist& joint) {
    const Names w = {"W1", "W2"};
    double lhs = cond_mutual_info(joint, {"U"}, {"Y1"}, w) +
                 cond_mutual_info(joint, {"V"}, {"Y2"}, {"U", "W1", "W2"});
    double rhs = cond_mutual_info(joint, {"U"}, {"Y1"}, {"V", "W1", "W2"}) +
                 cond_mutual_info(joint, {"V"}, {"Y2"}, w);
    double discrepancy = cond_mutual_info(joint, {"U"}, {"V"}, {"W1", "W2", "Y2"}) -
                         cond_mutual_info(joint, {"U"}, {"V"}, {"W1", "W2", "Y1"});
    return {lhs - rhs, discrepancy};
}

SlackVector nj_bound_slacks(const JointDist& joint, const Eigen::Vector3d& rate, NjMode mode) {
    double r0 = rate[0], r1 = rate[1], r2 = rate[2];
    auto cmi = [&](const Names& a, const Names& b, const Names& c) {
        return cond_mutual_info(joint, a, b, c);
    };

    double r0_bound = std::min(cmi({"T"}, {"Y1"}, {"W1"}), cmi({"T"}, {"Y2"}, {"W2"}));
    double line3 = mode == NjMode::kCorrected ? cmi({"V"}, {"Y2"}, {"W2"})
                                              : cmi({"V"}, {"Y2"}, {"W1", "W2"});
    double line6 = mode == NjMode::kCorrected ? cmi({"T", "V"}, {"Y2"}, {"W2"})
                                              : cmi({"T", "U"}, {"Y2"}, {"W2"});

    std::vector<SlackEntry> e;
    e.push_back({"nj01: R0 <= min{I(T;Y1|W1),I(T;Y2|W2)}", r0_bound, r0, r0_bound - r0});
    double b2 = cmi({"U"}, {"Y1"}, {"W1"});
    e.push_back({"nj02: R1 <= I(U;Y1|W1)", b2, r1, b2 - r1});
    e.push_back({mode == NjMode::kCorrected ? "nj03: R2 <= I(V;Y2|W2)"
                                            : "nj03: R2 <= I(V;Y2|W)  [literal W=(W1,W2)]",
                 line3, r2, line3 - r2});
    double b4 = cmi({"T", "U"}, {"Y1"}, {"W1"});
    e.push_back({"nj04: R0+R1 <= I(T,U;Y1|W1)", b4, r0 + r1, b4 - r0 - r1});
    double b5 = cmi({"U"}, {"Y1"}, {"T", "W1", "W2"}) + cmi({"T", "W1"}, {"Y2"}, {"W2"});
    e.push_back({"nj05: R0+R1 <= I(U;Y1|T,W1,W2) + I(T,W1;Y2|W2)", b5, r0 + r1,
                 b5 - r0 - r1});
    e.push_back({mode == NjMode::kCorrected ? "nj06: R0+R2 <= I(T,V;Y2|W2)"
                                            : "nj06: R0+R2 <= I(T,U;Y2|W2)  [literal]",
                 line6, r0 + r2, line6 - r0 - r2});
    double b7 = cmi({"V"}, {"Y2"}, {"T", "W1", "W2"}) + cmi({"T", "W2"}, {"Y1"}, {"W1"});
    e.push_back({"nj07: R0+R2 <= I(V;Y2|T,W1,W2) + I(T,W2;Y1|W1)", b7, r0 + r2,
                 b7 - r0 - r2});
    double b8 = cmi({"U"}, {"Y1"}, {"T", "V", "W1", "W2"}) +
                cmi({"T", "V", "W1"}, {"Y2"}, {"W2"});
    e.push_back({"nj08: R0+R1+R2 <= I(U;Y1|T,V,W1,W2) + I(T,V,W1;Y2|W2)", b8, r0 + r1 + r2,
                 b8 - r0 - r1 - r2});
    double b9 = cmi({"V"}, {"Y2"}, {"T", "U", "W1", "W2"}) +
                cmi({"T", "U", "W2"}, {"Y1"}, {"W1"});
    e.push_back({"nj09: R0+R1+R2 <= I(V;Y2|T,U,W1,W2) + I(T,U,W2;Y1|W1)", b9, r0 + r1 + r2,
                 b9 - r0 - r1 - r2});
    double b10 = cmi({"U"}, {"Y1"}, {"T", "V", "W1", "W2"}) +
                 mutual_info_groups(joint, {"T", "W1", "W2"}, {"Y1"}) +
                 cmi({"V"}, {"Y2"}, {"T", "W1", "W2"});
    e.push_back({"nj10: R0+R1+R2 <= I(U;Y1|T,V,W1,W2) + I(T,W1,W2;Y1) + I(V;Y2|T,W1,W2)",
                 b10, r0 + r1 + r2, b10 - r0 - r1 - r2});
    double b11 = cmi({"V"}, {"Y2"}, {"T", "U", "W1", "W2"}) +
                 mutual_info_groups(joint, {"T", "W1", "W2"}, {"Y2"}) +
                 cmi({"U"}, {"Y1"}, {"T", "W1", "W2"});
    e.push_back({"nj11: R0+R1+R2 <= I(V;Y2|T,U,W1,W2) + I(T,W1,W2;Y2) + I(U;Y1|T,W1,W2)",
                 b11, r0 + r1 + r2, b11 - r0 - r1 - r2});
    return finish(std::move(e));
}

InclusionReport claim_check(const PrivateScheme& scheme, const Channel& ch,
                            const ClaimTolerances& tols) {
    InclusionReport report;
    JointDist joint = build_private_joint(scheme, ch);
    report.residuals = residuals_private(joint);
    report.residual_inf = report.residuals.norm_inf;
    Eigen::Vector2d rate = rate_point_private(joint);
    report.rate = rate;
    report.slacks = uvw_bound_slacks(joint, rate);
    report.pass = report.residual_inf <= tols.constraint_tol &&
                  report.slacks.min_slack >= -tols.membership_tol;
    return report;
}

InclusionReport claim_check(const CommonScheme& scheme, const Channel& ch, NjMode mode,
                            const ClaimTolerances& tols) {
    InclusionReport report;
    JointDist joint = build_common_joint(scheme, ch);
    report.residuals = residuals_common(joint);
    report.residual_inf = report.residuals.norm_inf;
    Eigen::Vector3d rate = rate_point_common(joint);
    report.rate = rate;
    report.slacks = nj_bound_slacks(joint, rate, mode);
    report.pass = report.residual_inf <= tols.constraint_tol &&
                  report.slacks.min_slack >= -tols.membership_tol;
    return report;
}

InclusionChain claim1_chain(const JointDist& joint) {
    auto cmi = [&](const Names& a, const Names& b, const Names& c = {}) {
        return mutual_info_groups(joint, a, b, c);
    };
    InclusionChain chain;
    chain.values[0] = cmi({"U", "W1", "W2"}, {"Y1"}) +
                      cmi({"V"}, {"Y2"}, {"U", "W1", "W2"});
    double head = cmi({"W1"}, {"Y1"}) + cmi({"U"}, {"Y1"}, {"W1"});
    chain.values[1] = head + cmi({"W2"}, {"Y1"}, {"U", "W1"}) +
                      cmi({"V"}, {"Y2"}, {"U", "W1", "W2"});
    chain.values[2] = head + cmi({"W1"}, {"Y2"}, {"U", "W2"}) +
                      cmi({"V"}, {"Y2"}, {"U", "W1", "W2"});
    chain.values[3] = head + cmi({"V", "W1"}, {"Y2"}, {"U", "W2"});
    chain.values[4] = head + cmi({"W1"}, {"Y2"}, {"U", "V", "W2"}) +
                      cmi({"V"}, {"Y2"}, {"U", "W2"});
    chain.values[5] = head + cmi({"W1"}, {"Y2"}, {"U", "V", "W2"}) +
                      cmi({"V"}, {"Y2"}, {"W2"});
    chain.rate_sum = cmi({"U"}, {"Y1"}, {"W1"}) + cmi({"V"}, {"Y2"}, {"W2"});
    return chain;
}

std::vector<Eigen::VectorXd> frontier_raw(const std::vector<Eigen::VectorXd>& points) {
    if (points.empty()) throw std::invalid_argument("frontier: empty sample");
    auto dominates = [](const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
        // p dominates q: p >= q componentwise and p != q
        bool strict = false;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            if (p[i] < q[i]) return false;
            if (p[i] > q[i]) strict = true;
        }
        return strict;
    };
    auto lex_less = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            if (a[i] != b[i]) return a[i] < b[i];
        }
        return false;
    };
    std::vector<Eigen::VectorXd> kept;
    for (const auto& p : points) {
        bool dominated = false;
        for (const auto& q : points)
            if (dominates(q, p)) {
                dominated = true;
                break;
            }
        if (!dominated) kept.push_back(p);
    }
    std::sort(kept.begin(), kept.end(), lex_less);
    kept.erase(std::unique(kept.begin(), kept.end(),
                           [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
                               return a == b;
                           }),
               kept.end());
    return kept;
}

std::vector<Eigen::Vector2d> frontier_hull(const std::vector<Eigen::Vector2d>& points) {
    if (points.empty()) throw std::invalid_argument("frontier: empty sample");
    std::vector<Eigen::Vector2d> pts = points;
    for (const auto& p : points) {
        pts.emplace_back(p[0], 0.0);
        pts.emplace_back(0.0, p[1]);
    }
    pts.emplace_back(0.0, 0.0);

    // Monotone chain convex hull.
    std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                              return a == b;
                          }),
              pts.end());
    auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a,
                    const Eigen::Vector2d& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<Eigen::Vector2d> hull;
    if (pts.size() < 3) {
        hull = pts;
    } else {
        std::vector<Eigen::Vector2d> lower, upper;
        for (const auto& p : pts) {
            while (lower.size() >= 2 &&
                   cross(lower[lower.size() - 2], lower.back(), p) <= 0.0)
                lower.pop_back();
            lower.push_back(p);
        }
        for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
            while (upper.size() >= 2 &&
                   cross(upper[upper.size() - 2], upper.back(), *it) <= 0.0)
                upper.pop_back();
            upper.push_back(*it);
        }
        hull = lower;
        hull.insert(hull.end(), upper.begin() + 1, upper.end() - 1);
    }

    // Keep the Pareto-maximal hull vertices, ordered by increasing R1.
    std::vector<Eigen::Vector2d> frontier;
    for (const auto& p : hull) {
        bool dominated = false;
        for (const auto& q : hull)
            if ((q[0] >= p[0] && q[1] > p[1]) || (q[0] > p[0] && q[1] >= p[1])) {
                dominated = true;
                break;
            }
        if (!dominated) frontier.push_back(p);
    }
    std::sort(frontier.begin(), frontier.end(),
              [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a[0] < b[0]; });
    return frontier;
}

bool hull_dominates(const std::vector<Eigen::Vector2d>& hull, const Eigen::Vector2d& p,
                    double tol) {
    if (hull.empty()) return false;
    if (p[0] <= hull.front()[0] + tol && p[1] <= hull.front()[1] + tol) return true;
    for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
        const auto& a = hull[i];
        const auto& b = hull[i + 1];
        if (p[0] < a[0] - tol || p[0] > b[0] + tol) continue;
        double span = b[0] - a[0];
        double y = span > tol ? a[1] + (b[1] - a[1]) * (p[0] - a[0]) / span
                              : std::max(a[1], b[1]);
        if (p[1] <= y + tol) return true;
    }
    return p[0] <= hull.back()[0] + tol && p[1] <= hull.back()[1] + tol;
}

}  // namespace bcbound
