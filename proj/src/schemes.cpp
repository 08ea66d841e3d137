#include "bcbound/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bcbound {

namespace {

void check_simplex(const Eigen::ArrayXd& table, Eigen::Index slices, Eigen::Index symbols,
                   const char* what) {
    if (table.size() != slices * symbols)
        throw std::invalid_argument(std::string(what) + ": wrong table size");
    for (Eigen::Index s = 0; s < slices; ++s) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < symbols; ++i) {
            double p = table[s * symbols + i];
            if (p < -kClampTol)
                throw std::invalid_argument(std::string(what) + ": negative entry");
            sum += std::max(p, 0.0);
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument(std::string(what) + ": slice " + std::to_string(s) +
                                        " sums to " + std::to_string(sum));
    }
}

void check_positive_cards(const SchemeCards& cards, bool common) {
    if (cards.u < 1 || cards.v < 1 || cards.w1 < 1 || cards.w2 < 1)
        throw std::invalid_argument("scheme cardinalities must be >= 1");
    if (common && cards.t < 1)
        throw std::invalid_argument("common scheme needs |T| >= 1");
}

// Canonical group rendering, e.g. "T,U" — callers pass names already in
// canonical T,U,V,W1,W2,Y1,Y2 order.
std::string render_group(const Names& g) {
    std::string out;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (i) out += ",";
        out += g[i];
    }
    return out;
}

std::string render_cmi(const CmiSpec& t) {
    std::string out = "I(" + render_group(t.a) + ";" + render_group(t.b);
    if (!t.c.empty()) out += "|" + render_group(t.c);
    return out + ")";
}

EqualityConstraintSpec make_eq(CmiSpec lhs, CmiSpec rhs) {
    EqualityConstraintSpec spec;
    spec.id = render_cmi(lhs) + " = " + render_cmi(rhs);
    spec.lhs = std::move(lhs);
    spec.rhs = std::move(rhs);
    return spec;
}

Names with(Names base, const Names& extra) {
    for (const auto& n : extra) base.push_back(n);
    return base;
}

}  // namespace

void validate(const PrivateScheme& s) {
    check_positive_cards(s.cards, false);
    if (s.x_card < 1) throw std::invalid_argument("scheme needs |X| >= 1");
    Eigen::Index uv = static_cast<Eigen::Index>(s.cards.u) * s.cards.v;
    Eigen::Index w = static_cast<Eigen::Index>(s.cards.w1) * s.cards.w2;
    check_simplex(s.p_u, 1, s.cards.u, "p_u");
    check_simplex(s.p_v, 1, s.cards.v, "p_v");
    check_simplex(s.p_w_given_uv, uv, w, "p_w_given_uv");
    check_simplex(s.p_x_given_uvw, uv * w, s.x_card, "p_x_given_uvw");
}

void validate(const CommonScheme& s) {
    check_positive_cards(s.cards, true);
    if (s.x_card < 1) throw std::invalid_argument("scheme needs |X| >= 1");
    Eigen::Index tuv = static_cast<Eigen::Index>(s.cards.t) * s.cards.u * s.cards.v;
    Eigen::Index w = static_cast<Eigen::Index>(s.cards.w1) * s.cards.w2;
    check_simplex(s.p_t, 1, s.cards.t, "p_t");
    check_simplex(s.p_u, 1, s.cards.u, "p_u");
    check_simplex(s.p_v, 1, s.cards.v, "p_v");
    check_simplex(s.p_w_given_tuv, tuv, w, "p_w_given_tuv");
    if (s.deterministic_x) {
        if (static_cast<Eigen::Index>(s.x_map.size()) != tuv * w)
            throw std::invalid_argument("x_map: wrong size");
        for (int x : s.x_map)
            if (x < 0 || x >= s.x_card) throw std::invalid_argument("x_map: symbol out of range");
    } else {
        check_simplex(s.p_x_given_tuvw, tuv * w, s.x_card, "p_x_given_tuvw");
    }
}

JointDist build_private_joint(const PrivateScheme& s, const Channel& ch) {
    validate(s);
    if (s.x_card != ch.x_card())
        throw std::invalid_argument("scheme |X| does not match channel input alphabet");
    const auto& c = s.cards;
    std::vector<VariableSpec> vars = {{"U", c.u},   {"V", c.v},   {"W1", c.w1}, {"W2", c.w2},
                                      {"X", s.x_card}, {"Y1", ch.y1_card()}, {"Y2", ch.y2_card()}};
    Eigen::Index n = static_cast<Eigen::Index>(c.u) * c.v * c.w1 * c.w2 * s.x_card *
                     ch.y1_card() * ch.y2_card();
    Eigen::ArrayXd mass = Eigen::ArrayXd::Zero(n);
    Eigen::Index z = 0;
    for (int u = 0; u < c.u; ++u)
        for (int v = 0; v < c.v; ++v)
            for (int w1 = 0; w1 < c.w1; ++w1)
                for (int w2 = 0; w2 < c.w2; ++w2) {
                    Eigen::Index uv = static_cast<Eigen::Index>(u) * c.v + v;
                    Eigen::Index w = static_cast<Eigen::Index>(w1) * c.w2 + w2;
                    double base = s.p_u[u] * s.p_v[v] *
                                  s.p_w_given_uv[uv * c.w1 * c.w2 + w];
                    for (int x = 0; x < s.x_card; ++x) {
                        double px = base * s.p_x_given_uvw[(uv * c.w1 * c.w2 + w) * s.x_card + x];
                        for (int y1 = 0; y1 < ch.y1_card(); ++y1)
                            for (int y2 = 0; y2 < ch.y2_card(); ++y2)
                                mass[z++] = px * ch(x, y1, y2);
                    }
                }
    return make_normalized_joint(std::move(vars), std::move(mass));
}

JointDist build_common_joint(const CommonScheme& s, const Channel& ch) {
    validate(s);
    if (s.x_card != ch.x_card())
        throw std::invalid_argument("scheme |X| does not match channel input alphabet");
    const auto& c = s.cards;
    std::vector<VariableSpec> vars = {{"T", c.t},   {"U", c.u},   {"V", c.v},
                                      {"W1", c.w1}, {"W2", c.w2}, {"X", s.x_card},
                                      {"Y1", ch.y1_card()}, {"Y2", ch.y2_card()}};
    Eigen::Index n = static_cast<Eigen::Index>(c.t) * c.u * c.v * c.w1 * c.w2 * s.x_card *
                     ch.y1_card() * ch.y2_card();
    Eigen::ArrayXd mass = Eigen::ArrayXd::Zero(n);
    Eigen::Index z = 0;
    for (int t = 0; t < c.t; ++t)
        for (int u = 0; u < c.u; ++u)
            for (int v = 0; v < c.v; ++v)
                for (int w1 = 0; w1 < c.w1; ++w1)
                    for (int w2 = 0; w2 < c.w2; ++w2) {
                        Eigen::Index tuv =
                            (static_cast<Eigen::Index>(t) * c.u + u) * c.v + v;
                        Eigen::Index w = static_cast<Eigen::Index>(w1) * c.w2 + w2;
                        Eigen::Index slice = tuv * c.w1 * c.w2 + w;
                        double base = s.p_t[t] * s.p_u[u] * s.p_v[v] * s.p_w_given_tuv[slice];
                        for (int x = 0; x < s.x_card; ++x) {
                            double px;
                            if (s.deterministic_x)
                                px = (s.x_map[static_cast<std::size_t>(slice)] == x) ? base : 0.0;
                            else
                                px = base * s.p_x_given_tuvw[slice * s.x_card + x];
                            for (int y1 = 0; y1 < ch.y1_card(); ++y1)
                                for (int y2 = 0; y2 < ch.y2_card(); ++y2)
                                    mass[z++] = px * ch(x, y1, y2);
                        }
                    }
    return make_normalized_joint(std::move(vars), std::move(mass));
}

const std::vector<EqualityConstraintSpec>& private_constraints() {
    static const std::vector<EqualityConstraintSpec> table = [] {
        std::vector<EqualityConstraintSpec> v;
        v.push_back(make_eq({{"U"}, {"Y1"}, {"W1"}}, {{"U"}, {"Y1"}, {"V", "W1"}}));
        v.push_back(make_eq({{"V"}, {"Y2"}, {"W2"}}, {{"V"}, {"Y2"}, {"U", "W2"}}));
        v.push_back(make_eq({{"U"}, {"V"}, {"W1", "W2", "Y1"}},
                            {{"U"}, {"V"}, {"W1", "W2", "Y2"}}));
        v.push_back(make_eq({{"W2"}, {"Y1"}, {"W1"}}, {{"W1"}, {"Y2"}, {"W2"}}));
        v.push_back(make_eq({{"W2"}, {"Y1"}, {"U", "W1"}}, {{"W1"}, {"Y2"}, {"U", "W2"}}));
        v.push_back(make_eq({{"W2"}, {"Y1"}, {"V", "W1"}}, {{"W1"}, {"Y2"}, {"V", "W2"}}));
        v.push_back(make_eq({{"W2"}, {"Y1"}, {"U", "V", "W1"}},
                            {{"W1"}, {"Y2"}, {"U", "V", "W2"}}));
        return v;
    }();
    return table;
}

const std::vector<EqualityConstraintSpec>& common_constraints() {
    static const std::vector<EqualityConstraintSpec> table = [] {
        std::vector<EqualityConstraintSpec> v;

        // Chained family, each member compared to the leftmost expression.
        v.push_back(make_eq({{"T"}, {"Y1"}, {"W1"}}, {{"T"}, {"Y2"}, {"W2"}}));
        v.push_back(make_eq({{"T"}, {"Y1"}, {"W1"}}, {{"T"}, {"Y1"}, {"V", "W1"}}));
        v.push_back(make_eq({{"T"}, {"Y1"}, {"W1"}}, {{"T"}, {"Y1"}, {"U", "W1"}}));
        v.push_back(make_eq({{"T"}, {"Y1"}, {"W1"}}, {{"T"}, {"Y1"}, {"U", "V", "W1"}}));
        v.push_back(make_eq({{"T"}, {"Y2"}, {"W2"}}, {{"T"}, {"Y2"}, {"V", "W2"}}));
        v.push_back(make_eq({{"T"}, {"Y2"}, {"W2"}}, {{"T"}, {"Y2"}, {"U", "W2"}}));
        v.push_back(make_eq({{"T"}, {"Y2"}, {"W2"}}, {{"T"}, {"Y2"}, {"U", "V", "W2"}}));
        v.push_back(make_eq({{"U"}, {"Y1"}, {"W1"}}, {{"U"}, {"Y1"}, {"V", "W1"}}));
        v.push_back(make_eq({{"U"}, {"Y1"}, {"W1"}}, {{"U"}, {"Y1"}, {"T", "W1"}}));
        v.push_back(make_eq({{"U"}, {"Y1"}, {"W1"}}, {{"U"}, {"Y1"}, {"T", "V", "W1"}}));
        v.push_back(make_eq({{"V"}, {"Y2"}, {"W2"}}, {{"V"}, {"Y2"}, {"U", "W2"}}));
        v.push_back(make_eq({{"V"}, {"Y2"}, {"W2"}}, {{"V"}, {"Y2"}, {"T", "W2"}}));
        v.push_back(make_eq({{"V"}, {"Y2"}, {"W2"}}, {{"V"}, {"Y2"}, {"T", "U", "W2"}}));

        // Conditional-exchange family over subsets; taken literally, with
        // empty B1 or B2 skipped (identically 0 = 0).
        const std::vector<Names> a_subsets = {{},    {"T"},      {"U"},      {"V"},
                                              {"T", "U"}, {"T", "V"}, {"U", "V"},
                                              {"T", "U", "V"}};
        const std::vector<Names> b1_subsets = {{"T"}, {"U"}, {"T", "U"}};
        const std::vector<Names> b2_subsets = {{"T"}, {"V"}, {"T", "V"}};
        for (const auto& a : a_subsets)
            for (const auto& b1 : b1_subsets)
                for (const auto& b2 : b2_subsets)
                    v.push_back(make_eq({b1, b2, with(a, {"W1", "W2", "Y1"})},
                                        {b1, b2, with(a, {"W1", "W2", "Y2"})}));

        // Cross-output family for every A subset {T,U,V}.
        for (const auto& a : a_subsets)
            v.push_back(make_eq({{"W2"}, {"Y1"}, with(a, {"W1"})},
                                {{"W1"}, {"Y2"}, with(a, {"W2"})}));
        return v;
    }();
    return table;
}

double eval_cmi(const JointDist& joint, const CmiSpec& term) {
    return mutual_info_groups(joint, term.a, term.b, term.c);
}

ConstraintResiduals eval_residuals(const JointDist& joint,
                                   const std::vector<EqualityConstraintSpec>& constraints) {
    ConstraintResiduals out;
    out.entries.reserve(constraints.size());
    for (const auto& c : constraints) {
        ResidualEntry e;
        e.id = c.id;
        e.lhs = eval_cmi(joint, c.lhs);
        e.rhs = eval_cmi(joint, c.rhs);
        e.residual = e.lhs - e.rhs;
        out.norm_inf = std::max(out.norm_inf, std::abs(e.residual));
        out.entries.push_back(std::move(e));
    }
    return out;
}

ConstraintResiduals residuals_private(const JointDist& joint) {
    return eval_residuals(joint, private_constraints());
}

ConstraintResiduals residuals_common(const JointDist& joint) {
    return eval_residuals(joint, common_constraints());
}

Eigen::Vector2d rate_point_private(const JointDist& joint) {
    return {cond_mutual_info(joint, {"U"}, {"Y1"}, {"W1"}),
            cond_mutual_info(joint, {"V"}, {"Y2"}, {"W2"})};
}

Eigen::Vector3d rate_point_common(const JointDist& joint) {
    double t1 = cond_mutual_info(joint, {"T"}, {"Y1"}, {"W1"});
    double t2 = cond_mutual_info(joint, {"T"}, {"Y2"}, {"W2"});
    return {std::min(t1, t2), cond_mutual_info(joint, {"U"}, {"Y1"}, {"W1"}),
            cond_mutual_info(joint, {"V"}, {"Y2"}, {"W2"})};
}

}  // namespace bcbound
