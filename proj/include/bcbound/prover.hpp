// LP-based Shannon-type inequality prover. Expressions are linear
// combinations of joint-entropy coordinates over a small ground set; a target
// is certified nonnegative when it decomposes as a nonnegative combination of
// elemental inequalities plus a signed combination of the given equality
// constraints (decided by an exact-feasibility LP). "Not provable" means not
// derivable this way; it never asserts the inequality is false.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bcbound/probcore.hpp"

namespace bcbound {

// Ground set of jointly distributed variables; entropy space has one
// coordinate per nonempty subset (coordinate index = subset mask - 1).
class EntropySpace {
  public:
    static constexpr int kMaxVariables = 10;

    explicit EntropySpace(std::vector<std::string> labels);

    int variable_count() const { return static_cast<int>(labels_.size()); }
    Eigen::Index coord_count() const { return (Eigen::Index{1} << labels_.size()) - 1; }
    const std::vector<std::string>& labels() const { return labels_; }

    std::uint32_t mask_of(const Names& names) const;  // throws on unknown labels
    std::string render_mask(std::uint32_t mask) const;

  private:
    std::vector<std::string> labels_;
};

// Canonical linear combination of entropy coordinates: sorted subsets,
// merged terms, zero coefficients dropped.
struct InfoExpr {
    std::map<std::uint32_t, double> terms;

    void add(std::uint32_t mask, double coeff);
    InfoExpr& operator+=(const InfoExpr& other);
    InfoExpr& operator-=(const InfoExpr& other);
    InfoExpr& operator*=(double scale);
    bool empty() const { return terms.empty(); }

    Eigen::VectorXd to_vector(Eigen::Index coords) const;
    std::string render(const EntropySpace& space) const;
};

InfoExpr entropy_expr(const EntropySpace& space, const Names& s);
InfoExpr cmi_expr(const EntropySpace& space, const Names& a, const Names& b,
                  const Names& c = {});

struct ConstraintSet {
    std::vector<InfoExpr> equalities;
    std::vector<std::string> labels;  // optional, same length when present

    void add(InfoExpr expr, std::string label);
};

// Elemental inequalities for k variables: H(Xi | rest) >= 0 for each i and
// I(Xi;Xj|S) >= 0 for each pair and each S; count = k + C(k,2) 2^(k-2).
std::vector<InfoExpr> elemental_inequalities(int k);

enum class ProofStatus { kShannonProvable, kNotProvable };

struct Verdict {
    ProofStatus status = ProofStatus::kNotProvable;
    // Cone minimum of the target: exactly 0 when provable, otherwise the
    // (negative) target value at the normalized witness ray.
    double optimal_value = 0.0;
    Eigen::VectorXd elemental_multipliers;   // >= 0, provable case
    Eigen::VectorXd constraint_multipliers;  // signed, provable case
    Eigen::VectorXd witness;                 // entropy vector, not-provable case

    bool provable() const { return status == ProofStatus::kShannonProvable; }
};

// Decides target >= 0 over the elemental cone intersected with the
// constraint subspace. Certificates and witnesses are audited before being
// returned; an unauditable LP outcome raises LpFailure.
Verdict prove_nonneg(const EntropySpace& space, const InfoExpr& target,
                     const ConstraintSet& constraints);

// Proves target >= 0 and -target >= 0; equality holds iff both are provable.
std::pair<Verdict, Verdict> prove_equality(const EntropySpace& space, const InfoExpr& target,
                                           const ConstraintSet& constraints);

// Infinity-norm gap of the certificate reconstruction (provable verdicts).
double certificate_error(const EntropySpace& space, const InfoExpr& target,
                         const ConstraintSet& constraints, const Verdict& verdict);

// Worst violation of the elemental inequalities and constraints at the
// witness (not-provable verdicts); small values mean a valid witness.
double witness_violation(const EntropySpace& space, const ConstraintSet& constraints,
                         const Verdict& verdict);

// Numeric evaluation of an expression on a joint whose variable names match
// the space labels.
double eval_on_joint(const EntropySpace& space, const InfoExpr& expr, const JointDist& joint);

struct CertificationItem {
    std::string label;
    InfoExpr target;
    Verdict verdict;
};

struct Certification {
    EntropySpace space;
    ConstraintSet constraints;
    std::vector<CertificationItem> items;
    bool all_provable = false;
};

// Fixture: the private-message inclusion argument. Certifies both sum-rate
// dominations, the individual-rate dominations, and every step of the
// printed chain under the seven equality constraints plus the Markov and
// independence conditions.
Certification certify_claim1();

// Ablation fixture dropping only the U-conditioned exchange constraint
// I(W2;Y1|U,W1) = I(W1;Y2|U,W2). The main target stays provable: the
// equality system is 1-redundant, and a mirror chain through the
// V-conditioned exchange recovers the bound.
Certification certify_claim1_ablation();

// Minimal exchange-family ablation that genuinely breaks the proof: with
// both single-message-conditioned exchange constraints removed, the main
// target is not Shannon-provable and the verdict carries the witness.
Certification certify_claim1_exchange_ablation();

}  // namespace bcbound
