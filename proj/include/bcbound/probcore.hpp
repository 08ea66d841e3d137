// Exact finite-alphabet probability engine: joint distributions over named
// variables stored as dense tensors, plus the information measures (entropy,
// conditional mutual information) everything else is built on.
//
// Conventions: log base 2 everywhere (all rates in bits), 0*log 0 := 0,
// lexicographic row-major indexing with the first variable most significant.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bcbound {

using Names = std::vector<std::string>;

// Clamp tolerance for negative rounding of probabilities and information
// measures (double-precision accumulation error bound at desk scale).
inline constexpr double kClampTol = 1e-12;

// Dense tensors are capped at this many entries unless a caller overrides.
inline constexpr std::size_t kDefaultSupportCap = 10'000'000;

struct SupportCapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VariableSpec {
    std::string name;
    int cardinality = 1;
};

// Joint pmf over an ordered list of named finite-alphabet variables.
// mass[i0,...,ik] is stored flat with the first variable most significant.
// Entries are >= 0 and sum to 1 within kClampTol; immutable after
// construction, so values are safe to share across threads.
class JointDist {
  public:
    JointDist(std::vector<VariableSpec> variables, Eigen::ArrayXd mass,
              std::size_t support_cap = kDefaultSupportCap);

    const std::vector<VariableSpec>& variables() const { return vars_; }
    const Eigen::ArrayXd& mass() const { return mass_; }
    int variable_count() const { return static_cast<int>(vars_.size()); }
    Eigen::Index size() const { return mass_.size(); }

    int cardinality(int var) const { return vars_[static_cast<std::size_t>(var)].cardinality; }
    Eigen::Index stride(int var) const { return strides_[static_cast<std::size_t>(var)]; }

    // Index of a named variable; throws std::invalid_argument on unknown names.
    int index_of(std::string_view name) const;

    // Resolves a set of names to sorted, deduplicated variable indices.
    std::vector<int> indices_of(const Names& names) const;

  private:
    std::vector<VariableSpec> vars_;
    std::vector<Eigen::Index> strides_;
    Eigen::ArrayXd mass_;
};

// Like the JointDist constructor but renormalizes the mass by its exact sum
// first (used by joint builders, whose products accumulate harmless float
// error). Rejects masses whose sum is off by more than 1e-9.
JointDist make_normalized_joint(std::vector<VariableSpec> variables, Eigen::ArrayXd mass,
                                std::size_t support_cap = kDefaultSupportCap);

// Broadcast channel law p(y1,y2|x), stored flat as [x][y1][y2].
// Each input row sums to 1 within kClampTol.
class Channel {
  public:
    Channel(int x_card, int y1_card, int y2_card, Eigen::ArrayXd law);

    int x_card() const { return x_card_; }
    int y1_card() const { return y1_card_; }
    int y2_card() const { return y2_card_; }
    const Eigen::ArrayXd& law() const { return law_; }

    double operator()(int x, int y1, int y2) const {
        return law_[(static_cast<Eigen::Index>(x) * y1_card_ + y1) * y2_card_ + y2];
    }

  private:
    int x_card_, y1_card_, y2_card_;
    Eigen::ArrayXd law_;
};

// Compensated (Neumaier) summation; used wherever a pmf is validated.
double stable_sum(const Eigen::ArrayXd& values);

// Marginal mass over the given sorted unique variable indices.
Eigen::ArrayXd marginal_mass(const JointDist& dist, const std::vector<int>& kept);

// Exact marginal of `dist` over the named subset (order follows `dist`).
JointDist marginalize(const JointDist& dist, const Names& subset);

// H(S) in bits; S must be a nonempty subset of the variables.
double entropy(const JointDist& dist, const Names& subset);

// Group mutual information I(A;B|C) = H(AC)+H(BC)-H(ABC)-H(C) with all
// unions deduplicated. Groups may overlap (e.g. I(T,U;T,V|...)); tiny
// negative rounding is clamped to 0.
double mutual_info_groups(const JointDist& dist, const Names& a, const Names& b,
                          const Names& c = {});

// I(A;B|C) with A, B nonempty and disjoint after dedup (throws otherwise).
double cond_mutual_info(const JointDist& dist, const Names& a, const Names& b,
                        const Names& c = {});

}  // namespace bcbound
