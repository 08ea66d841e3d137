#include "bcbound/prover.hpp"

#include <algorithm>
#include <cmath>

#include "bcbound/simplex.hpp"

namespace bcbound {

namespace {
constexpr double kAuditTol = 1e-8;
constexpr double kCoeffZero = 1e-13;
}  // namespace

EntropySpace::EntropySpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty() || static_cast<int>(labels_.size()) > kMaxVariables)
        throw std::invalid_argument("entropy space supports 1 to 10 variables");
    for (std::size_t i = 0; i < labels_.size(); ++i)
        for (std::size_t j = i + 1; j < labels_.size(); ++j)
            if (labels_[i] == labels_[j])
                throw std::invalid_argument("duplicate label '" + labels_[i] + "'");
}

std::uint32_t EntropySpace::mask_of(const Names& names) const {
    std::uint32_t mask = 0;
    for (const auto& n : names) {
        auto it = std::find(labels_.begin(), labels_.end(), n);
        if (it == labels_.end())
            throw std::invalid_argument("unknown variable '" + n + "' in entropy space");
        mask |= 1u << (it - labels_.begin());
    }
    return mask;
}

std::string EntropySpace::render_mask(std::uint32_t mask) const {
    std::string out;
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (mask & (1u << i)) {
            if (!out.empty()) out += ",";
            out += labels_[i];
        }
    return out;
}

void InfoExpr::add(std::uint32_t mask, double coeff) {
    if (mask == 0 || coeff == 0.0) return;  // H(empty) = 0
    auto [it, inserted] = terms.emplace(mask, coeff);
    if (!inserted) {
        it->second += coeff;
        if (std::abs(it->second) <= kCoeffZero) terms.erase(it);
    }
}

InfoExpr& InfoExpr::operator+=(const InfoExpr& other) {
    for (const auto& [mask, coeff] : other.terms) add(mask, coeff);
    return *this;
}

InfoExpr& InfoExpr::operator-=(const InfoExpr& other) {
    for (const auto& [mask, coeff] : other.terms) add(mask, -coeff);
    return *this;
}

InfoExpr& InfoExpr::operator*=(double scale) {
    if (scale == 0.0) {
        terms.clear();
        return *this;
    }
    for (auto& [mask, coeff] : terms) coeff *= scale;
    return *this;
}

Eigen::VectorXd InfoExpr::to_vector(Eigen::Index coords) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(coords);
    for (const auto& [mask, coeff] : terms) v[static_cast<Eigen::Index>(mask) - 1] = coeff;
    return v;
}

std::string InfoExpr::render(const EntropySpace& space) const {
    if (terms.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [mask, coeff] : terms) {
        double c = coeff;
        if (first) {
            if (c < 0) out += "-";
        } else {
            out += c < 0 ? " - " : " + ";
        }
        double mag = std::abs(c);
        if (std::abs(mag - 1.0) > kCoeffZero) out += std::to_string(mag) + " ";
        out += "H(" + space.render_mask(mask) + ")";
        first = false;
    }
    return out;
}

InfoExpr entropy_expr(const EntropySpace& space, const Names& s) {
    InfoExpr e;
    e.add(space.mask_of(s), 1.0);
    return e;
}

InfoExpr cmi_expr(const EntropySpace& space, const Names& a, const Names& b, const Names& c) {
    std::uint32_t ma = space.mask_of(a), mb = space.mask_of(b), mc = space.mask_of(c);
    InfoExpr e;
    e.add(ma | mc, 1.0);
    e.add(mb | mc, 1.0);
    e.add(ma | mb | mc, -1.0);
    e.add(mc, -1.0);
    return e;
}

void ConstraintSet::add(InfoExpr expr, std::string label) {
    equalities.push_back(std::move(expr));
    labels.push_back(std::move(label));
}

std::vector<InfoExpr> elemental_inequalities(int k) {
    if (k < 1 || k > EntropySpace::kMaxVariables)
        throw std::invalid_argument("elemental inequalities need 1 <= k <= 10");
    std::vector<InfoExpr> out;
    const std::uint32_t all = (1u << k) - 1;
    for (int i = 0; i < k; ++i) {
        InfoExpr e;
        e.add(all, 1.0);
        e.add(all ^ (1u << i), -1.0);
        out.push_back(std::move(e));
    }
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            std::uint32_t rest = all ^ (1u << i) ^ (1u << j);
            // All subsets of the remaining k-2 variables.
            std::uint32_t s = 0;
            while (true) {
                InfoExpr e;
                e.add(s | (1u << i), 1.0);
                e.add(s | (1u << j), 1.0);
                e.add(s | (1u << i) | (1u << j), -1.0);
                e.add(s, -1.0);
                out.push_back(std::move(e));
                if (s == rest) break;
                s = (s - rest) & rest;  // next subset of rest
            }
        }
    return out;
}

namespace {

Eigen::MatrixXd build_columns(const EntropySpace& space,
                              const std::vector<InfoExpr>& elementals,
                              const ConstraintSet& constraints) {
    const Eigen::Index coords = space.coord_count();
    const Eigen::Index n_e = static_cast<Eigen::Index>(elementals.size());
    const Eigen::Index n_a = static_cast<Eigen::Index>(constraints.equalities.size());
    Eigen::MatrixXd m(coords, n_e + 2 * n_a);
    for (Eigen::Index j = 0; j < n_e; ++j)
        m.col(j) = elementals[static_cast<std::size_t>(j)].to_vector(coords);
    for (Eigen::Index j = 0; j < n_a; ++j) {
        Eigen::VectorXd a = constraints.equalities[static_cast<std::size_t>(j)].to_vector(coords);
        m.col(n_e + j) = a;
        m.col(n_e + n_a + j) = -a;
    }
    return m;
}

}  // namespace

Verdict prove_nonneg(const EntropySpace& space, const InfoExpr& target,
                     const ConstraintSet& constraints) {
    const Eigen::Index coords = space.coord_count();
    auto elementals = elemental_inequalities(space.variable_count());
    const Eigen::Index n_e = static_cast<Eigen::Index>(elementals.size());
    const Eigen::Index n_a = static_cast<Eigen::Index>(constraints.equalities.size());

    Verdict verdict;
    if (target.empty()) {
        verdict.status = ProofStatus::kShannonProvable;
        verdict.elemental_multipliers = Eigen::VectorXd::Zero(n_e);
        verdict.constraint_multipliers = Eigen::VectorXd::Zero(n_a);
        return verdict;
    }

    Eigen::MatrixXd m = build_columns(space, elementals, constraints);
    Eigen::VectorXd c = target.to_vector(coords);
    FeasibilityResult lp = solve_nonneg_feasibility(m, c);

    if (lp.feasible) {
        verdict.status = ProofStatus::kShannonProvable;
        verdict.optimal_value = 0.0;
        verdict.elemental_multipliers = lp.solution.head(n_e);
        verdict.constraint_multipliers =
            lp.solution.segment(n_e, n_a) - lp.solution.tail(n_a);
        double err = certificate_error(space, target, constraints, verdict);
        if (err > kAuditTol)
            throw LpFailure("certificate reconstruction off by " + std::to_string(err));
        return verdict;
    }

    // Farkas direction y has yT M <= 0 and yT c > 0; x = -y is an entropy
    // vector in the constrained cone on which the target is negative.
    Eigen::VectorXd x = -lp.farkas;
    double scale = x.cwiseAbs().maxCoeff();
    if (scale > 0.0) x /= scale;
    verdict.status = ProofStatus::kNotProvable;
    verdict.witness = x;
    verdict.optimal_value = c.dot(x);
    if (verdict.optimal_value > -kAuditTol)
        throw LpFailure("witness violation too small to trust: " +
                        std::to_string(verdict.optimal_value));
    double viol = witness_violation(space, constraints, verdict);
    if (viol > kAuditTol)
        throw LpFailure("witness violates the cone by " + std::to_string(viol));
    return verdict;
}

std::pair<Verdict, Verdict> prove_equality(const EntropySpace& space, const InfoExpr& target,
                                           const ConstraintSet& constraints) {
    InfoExpr negated = target;
    negated *= -1.0;
    return {prove_nonneg(space, target, constraints),
            prove_nonneg(space, negated, constraints)};
}

double certificate_error(const EntropySpace& space, const InfoExpr& target,
                         const ConstraintSet& constraints, const Verdict& verdict) {
    const Eigen::Index coords = space.coord_count();
    auto elementals = elemental_inequalities(space.variable_count());
    Eigen::VectorXd recon = Eigen::VectorXd::Zero(coords);
    for (Eigen::Index j = 0; j < verdict.elemental_multipliers.size(); ++j)
        recon += verdict.elemental_multipliers[j] *
                 elementals[static_cast<std::size_t>(j)].to_vector(coords);
    for (Eigen::Index j = 0; j < verdict.constraint_multipliers.size(); ++j)
        recon += verdict.constraint_multipliers[j] *
                 constraints.equalities[static_cast<std::size_t>(j)].to_vector(coords);
    return (recon - target.to_vector(coords)).cwiseAbs().maxCoeff();
}

double witness_violation(const EntropySpace& space, const ConstraintSet& constraints,
                         const Verdict& verdict) {
    const Eigen::Index coords = space.coord_count();
    double worst = 0.0;
    for (const auto& e : elemental_inequalities(space.variable_count()))
        worst = std::max(worst, -e.to_vector(coords).dot(verdict.witness));
    for (const auto& a : constraints.equalities)
        worst = std::max(worst, std::abs(a.to_vector(coords).dot(verdict.witness)));
    return worst;
}

double eval_on_joint(const EntropySpace& space, const InfoExpr& expr, const JointDist& joint) {
    double value = 0.0;
    for (const auto& [mask, coeff] : expr.terms) {
        Names subset;
        for (int i = 0; i < space.variable_count(); ++i)
            if (mask & (1u << i)) subset.push_back(space.labels()[static_cast<std::size_t>(i)]);
        value += coeff * entropy(joint, subset);
    }
    return value;
}

namespace {

// The seven equality constraints plus Markov and independence conditions of
// the private-message setting, over labels {U,V,W1,W2,X,Y1,Y2}. Constraints
// whose 1-based position appears in `dropped` are omitted.
ConstraintSet private_constraint_set(const EntropySpace& sp,
                                     const std::vector<int>& dropped = {}) {
    ConstraintSet cs;
    int position = 0;
    auto keep = [&] {
        ++position;
        return std::find(dropped.begin(), dropped.end(), position) == dropped.end();
    };
    auto eq = [&](const Names& a, const Names& b, const Names& c1, const Names& c2,
                  const std::string& label, const Names& a2 = {}, const Names& b2 = {}) {
        if (!keep()) return;
        InfoExpr e = cmi_expr(sp, a, b, c1);
        e -= cmi_expr(sp, a2.empty() ? a : a2, b2.empty() ? b : b2, c2);
        cs.add(std::move(e), label);
    };
    eq({"U"}, {"Y1"}, {"W1"}, {"V", "W1"}, "I(U;Y1|W1) = I(U;Y1|V,W1)");
    eq({"V"}, {"Y2"}, {"W2"}, {"U", "W2"}, "I(V;Y2|W2) = I(V;Y2|U,W2)");
    eq({"U"}, {"V"}, {"W1", "W2", "Y1"}, {"W1", "W2", "Y2"},
       "I(U;V|W1,W2,Y1) = I(U;V|W1,W2,Y2)");
    eq({"W2"}, {"Y1"}, {"W1"}, {"W2"}, "I(W2;Y1|W1) = I(W1;Y2|W2)", {"W1"}, {"Y2"});
    eq({"W2"}, {"Y1"}, {"U", "W1"}, {"U", "W2"},
       "I(W2;Y1|U,W1) = I(W1;Y2|U,W2)", {"W1"}, {"Y2"});
    eq({"W2"}, {"Y1"}, {"V", "W1"}, {"V", "W2"},
       "I(W2;Y1|V,W1) = I(W1;Y2|V,W2)", {"W1"}, {"Y2"});
    eq({"W2"}, {"Y1"}, {"U", "V", "W1"}, {"U", "V", "W2"},
       "I(W2;Y1|U,V,W1) = I(W1;Y2|U,V,W2)", {"W1"}, {"Y2"});
    cs.add(cmi_expr(sp, {"U", "V", "W1", "W2"}, {"Y1", "Y2"}, {"X"}),
           "I(U,V,W1,W2;Y1,Y2|X) = 0");
    cs.add(cmi_expr(sp, {"U"}, {"V"}), "I(U;V) = 0");
    return cs;
}

InfoExpr rates_expr(const EntropySpace& sp) {
    InfoExpr rates = cmi_expr(sp, {"U"}, {"Y1"}, {"W1"});
    rates += cmi_expr(sp, {"V"}, {"Y2"}, {"W2"});
    return rates;
}

InfoExpr sum_rate_target(const EntropySpace& sp, const Names& w_output) {
    InfoExpr t = cmi_expr(sp, {"W1", "W2"}, w_output);
    t += cmi_expr(sp, {"U"}, {"Y1"}, {"W1", "W2"});
    t += cmi_expr(sp, {"V"}, {"Y2"}, {"U", "W1", "W2"});
    t -= rates_expr(sp);
    return t;
}

// Values of the printed chain, as expressions.
std::vector<std::pair<std::string, InfoExpr>> chain_expressions(const EntropySpace& sp) {
    std::vector<std::pair<std::string, InfoExpr>> chain;
    InfoExpr e0 = cmi_expr(sp, {"U", "W1", "W2"}, {"Y1"});
    e0 += cmi_expr(sp, {"V"}, {"Y2"}, {"U", "W1", "W2"});
    chain.emplace_back("I(U,W1,W2;Y1) + I(V;Y2|U,W1,W2)", std::move(e0));

    InfoExpr head = cmi_expr(sp, {"W1"}, {"Y1"});
    head += cmi_expr(sp, {"U"}, {"Y1"}, {"W1"});

    InfoExpr e1 = head;
    e1 += cmi_expr(sp, {"W2"}, {"Y1"}, {"U", "W1"});
    e1 += cmi_expr(sp, {"V"}, {"Y2"}, {"U", "W1", "W2"});
    chain.emplace_back("... = I(W1;Y1) + I(U;Y1|W1) + I(W2;Y1|U,W1) + I(V;Y2|U,W1,W2)",
                       std::move(e1));

    InfoExpr e2 = head;
    e2 += cmi_expr(sp, {"W1"}, {"Y2"}, {"U", "W2"});
    e2 += cmi_expr(sp, {"V"}, {"Y2"}, {"U", "W1", "W2"});
    chain.emplace_back("... = I(W1;Y1) + I(U;Y1|W1) + I(W1;Y2|U,W2) + I(V;Y2|U,W1,W2)",
                       std::move(e2));

    InfoExpr e3 = head;
    e3 += cmi_expr(sp, {"V", "W1"}, {"Y2"}, {"U", "W2"});
    chain.emplace_back("... = I(W1;Y1) + I(U;Y1|W1) + I(V,W1;Y2|U,W2)", std::move(e3));

    InfoExpr e4 = head;
    e4 += cmi_expr(sp, {"W1"}, {"Y2"}, {"U", "V", "W2"});
    e4 += cmi_expr(sp, {"V"}, {"Y2"}, {"U", "W2"});
    chain.emplace_back("... = I(W1;Y1) + I(U;Y1|W1) + I(W1;Y2|U,V,W2) + I(V;Y2|U,W2)",
                       std::move(e4));

    InfoExpr e5 = head;
    e5 += cmi_expr(sp, {"W1"}, {"Y2"}, {"U", "V", "W2"});
    e5 += cmi_expr(sp, {"V"}, {"Y2"}, {"W2"});
    chain.emplace_back("... = I(W1;Y1) + I(U;Y1|W1) + I(W1;Y2|U,V,W2) + I(V;Y2|W2)  (step a)",
                       std::move(e5));
    return chain;
}

Certification make_cert(const std::vector<int>& dropped) {
    EntropySpace sp({"U", "V", "W1", "W2", "X", "Y1", "Y2"});
    ConstraintSet cs = private_constraint_set(sp, dropped);
    return Certification{sp, std::move(cs), {}, true};
}

void add_nonneg(Certification& cert, const std::string& label, InfoExpr target) {
    CertificationItem item{label, target, prove_nonneg(cert.space, target, cert.constraints)};
    cert.all_provable = cert.all_provable && item.verdict.provable();
    cert.items.push_back(std::move(item));
}

void add_equality(Certification& cert, const std::string& label, InfoExpr target) {
    auto [fwd, bwd] = prove_equality(cert.space, target, cert.constraints);
    cert.all_provable = cert.all_provable && fwd.provable() && bwd.provable();
    cert.items.push_back({label + " (>=)", target, fwd});
    InfoExpr neg = target;
    neg *= -1.0;
    cert.items.push_back({label + " (<=)", neg, std::move(bwd)});
}

}  // namespace

Certification certify_claim1() {
    Certification cert = make_cert({});
    const EntropySpace& sp = cert.space;

    add_nonneg(cert, "sum-rate domination, Y1 form", sum_rate_target(sp, {"Y1"}));
    add_nonneg(cert, "sum-rate domination, Y2 form", sum_rate_target(sp, {"Y2"}));
    InfoExpr r1 = cmi_expr(sp, {"U", "W1", "W2"}, {"Y1"});
    r1 -= cmi_expr(sp, {"U"}, {"Y1"}, {"W1"});
    add_nonneg(cert, "individual-rate domination R1", std::move(r1));
    InfoExpr r2 = cmi_expr(sp, {"V", "W1", "W2"}, {"Y2"});
    r2 -= cmi_expr(sp, {"V"}, {"Y2"}, {"W2"});
    add_nonneg(cert, "individual-rate domination R2", std::move(r2));

    auto chain = chain_expressions(sp);
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        InfoExpr step = chain[i].second;
        step -= chain[i + 1].second;
        add_equality(cert, "chain step " + std::to_string(i) + " -> " + std::to_string(i + 1),
                     std::move(step));
    }
    InfoExpr final_step = chain.back().second;
    final_step -= rates_expr(sp);
    add_nonneg(cert, "final domination of R1 + R2", std::move(final_step));
    return cert;
}

Certification certify_claim1_ablation() {
    Certification cert = make_cert({5});
    add_nonneg(cert, "sum-rate domination, Y1 form, without I(W2;Y1|U,W1)=I(W1;Y2|U,W2)",
               sum_rate_target(cert.space, {"Y1"}));
    return cert;
}

Certification certify_claim1_exchange_ablation() {
    Certification cert = make_cert({5, 6});
    add_nonneg(cert,
               "sum-rate domination, Y1 form, without the U- and V-conditioned exchanges",
               sum_rate_target(cert.space, {"Y1"}));
    return cert;
}

}  // namespace bcbound
