// Constraint-manifold search: every simplex factor of a scheme is
// reparameterized by exponential normalization of free logits, residuals are
// driven to zero by staged quadratic-penalty gradient descent with
// backtracking line search, and weighted rates are then maximized subject to
// staying on the manifold. All randomness is seeded and restart results are
// merged in deterministic order, so identical configs reproduce identical
// samples byte for byte.
#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "bcbound/regions.hpp"
#include "bcbound/schemes.hpp"

namespace bcbound {

using SchemeVariant = std::variant<PrivateScheme, CommonScheme>;

struct SearchConfig {
    SchemeCards cards;            // cards.t >= 1 selects common schemes
    bool deterministic_x = true;  // only used for common schemes
    int restarts = 16;
    int max_iters = 300;  // per penalty stage
    double constraint_tol = 1e-6;
    std::vector<double> penalty_schedule = {1e3, 1e4, 1e5, 1e6};
    Eigen::VectorXd rate_weights;  // default lambda when no sweep is given
    std::uint64_t seed = 1;
    int jobs = 1;
};

// Throws std::invalid_argument on restarts < 1, nonpositive tolerances,
// empty or nonpositive penalty schedule, or negative rate weights.
void validate(const SearchConfig& cfg);

// Deterministic seeded scheme draw; every simplex entry is at least 1e-6
// before normalization, so all factors are strictly positive.
SchemeVariant sample_scheme(const SchemeCards& cards, int x_card, std::uint64_t seed,
                            bool deterministic_x = true);

// ----------------------------------------------------------------------------
// Logit parameter space. Exposed so gradients can be checked against finite
// differences from the outside.

struct FactorBlock {
    Eigen::Index offset = 0;
    Eigen::Index slices = 1;
    Eigen::Index symbols = 1;
    std::uint32_t slice_mask = 0;   // joint variables indexing the slice
    std::uint32_t symbol_mask = 0;  // joint variables indexing the symbol
};

struct ParamSpace {
    SchemeCards cards;
    int x_card = 1;
    bool common = false;
    bool deterministic_x = false;
    std::vector<int> x_map;  // fixed map for deterministic-X common schemes
    std::vector<FactorBlock> blocks;
    Eigen::Index dim = 0;
    std::vector<int> joint_cards;  // cardinality per joint variable
};

ParamSpace make_param_space(const SchemeCards& cards, int x_card, bool deterministic_x = true,
                            std::vector<int> x_map = {});
ParamSpace param_space_for(const SchemeVariant& scheme);

Eigen::VectorXd logits_of(const ParamSpace& space, const SchemeVariant& scheme);
SchemeVariant scheme_of(const ParamSpace& space, const Eigen::VectorXd& logits);

// Value-and-gradient oracle for the two objective families. `lambda` may be
// empty for a pure penalty objective. The value is
//   penalty_weight * sum_c residual_c^2  -  lambda . rates
// and the gradient is analytic through the softmax reparameterization.
class SchemeObjective {
  public:
    SchemeObjective(ParamSpace space, Channel channel);

    const ParamSpace& space() const { return space_; }
    int constraint_count() const { return static_cast<int>(constraint_terms_.size()); }
    int rate_dim() const { return common_ ? 3 : 2; }

    Eigen::VectorXd residual_vector(const Eigen::VectorXd& logits) const;
    double residual_inf(const Eigen::VectorXd& logits) const;
    Eigen::VectorXd rate_point(const Eigen::VectorXd& logits) const;

    double value(const Eigen::VectorXd& logits, const Eigen::VectorXd& lambda,
                 double penalty_weight, Eigen::VectorXd* grad = nullptr) const;

    // Residuals and their Jacobian with respect to the logits; the refine
    // phase runs damped Gauss-Newton on this system.
    Eigen::MatrixXd residual_jacobian(const Eigen::VectorXd& logits,
                                      Eigen::VectorXd& residuals) const;

  private:
    struct Term {
        int mask_index;
        double coeff;
    };
    void add_expr(std::vector<Term>& terms, const CmiSpec& cmi, double sign);
    int mask_index(std::uint32_t mask);

    ParamSpace space_;
    Channel channel_;
    bool common_;
    std::vector<std::uint32_t> masks_;
    std::vector<std::vector<Term>> constraint_terms_;
    std::vector<std::vector<Term>> rate_terms_;  // private: R1,R2; common: T1,T2,R1,R2
};

// ----------------------------------------------------------------------------

struct RefineResult {
    SchemeVariant scheme;
    std::vector<double> trace;  // residual infinity norm per accepted step
    double residual_inf = 0.0;
    bool success = false;
};

// Drives the equality residuals to zero; success iff the final infinity norm
// is at most cfg.constraint_tol. Failure still returns the best iterate.
RefineResult refine_to_constraints(const SchemeVariant& scheme, const Channel& ch,
                                   const SearchConfig& cfg);

struct MaximizeResult {
    SchemeVariant scheme;
    Eigen::VectorXd rate;
    double residual_inf = 0.0;
    bool feasible = false;
    bool fell_back = false;  // feasibility lost; returned the last feasible iterate
};

// Maximizes lambda . rates over the constraint manifold, starting from a
// feasible scheme. Keeps the best feasible iterate seen, so a failed ascent
// degrades to the starting point rather than losing feasibility.
MaximizeResult maximize_weighted_rate(const SchemeVariant& scheme0, const Channel& ch,
                                      const Eigen::VectorXd& lambda, const SearchConfig& cfg);

struct RegionPoint {
    Eigen::VectorXd rate;
    double residual_inf = 0.0;
    Eigen::VectorXd lambda;
    std::uint64_t seed = 0;   // per-restart derived seed
    int scheme_index = -1;    // into RegionSample::schemes
};

struct RegionSample {
    std::vector<RegionPoint> points;  // deterministic (sweep, restart) order
    std::vector<SchemeVariant> schemes;
    int total_restarts = 0;
    int failed_restarts = 0;
};

// restarts x (sample -> refine -> maximize) for every lambda in the sweep;
// retains only points with residual within tolerance.
RegionSample scan_region(const Channel& ch, const SearchConfig& cfg,
                         const std::vector<Eigen::VectorXd>& lambda_sweep);

enum class FrontierMode { kRaw, kHull };

// Frontier of the sampled rate points (raw Pareto set, or the convex-hull
// upper boundary for two-dimensional samples).
std::vector<Eigen::VectorXd> frontier(const RegionSample& sample, FrontierMode mode);

// Deterministic seed derivation for restart tasks (exposed for tests).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t sweep_index,
                          std::uint64_t restart_index);

}  // namespace bcbound
