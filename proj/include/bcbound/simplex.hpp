// Self-contained dense phase-1 simplex for nonnegative equality-feasibility
// problems: find z >= 0 with M z = b. Bland's rule throughout, so the solve
// is deterministic and cannot cycle. On infeasibility the Farkas certificate
// y (with yT M <= 0 and yT b > 0) is recovered from the artificial columns.
#pragma once

#include <stdexcept>

#include <Eigen/Dense>

namespace bcbound {

struct LpFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FeasibilityResult {
    bool feasible = false;
    Eigen::VectorXd solution;  // z >= 0 with M z ~ b (feasible case)
    Eigen::VectorXd farkas;    // y with yT M <= 0, yT b > 0 (infeasible case)
    double phase1_objective = 0.0;
    int iterations = 0;
};

// feas_tol: phase-1 objective at or below this value counts as feasible.
// Objectives between feas_tol and ambiguity_tol raise LpFailure rather than
// risking a wrong verdict.
FeasibilityResult solve_nonneg_feasibility(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                                           double feas_tol = 1e-9,
                                           double ambiguity_tol = 1e-7,
                                           int max_iterations = 500000);

}  // namespace bcbound
