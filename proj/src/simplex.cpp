#include "bcbound/simplex.hpp"

#include <cmath>
#include <vector>

namespace bcbound {

namespace {
constexpr double kPivotTol = 1e-10;
}

FeasibilityResult solve_nonneg_feasibility(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                                           double feas_tol, double ambiguity_tol,
                                           int max_iterations) {
    const Eigen::Index rows = m.rows();
    const Eigen::Index cols = m.cols();
    if (b.size() != rows) throw LpFailure("rhs dimension mismatch");

    // Flip rows to make the rhs nonnegative; remember the signs to restore
    // the Farkas vector afterwards.
    Eigen::VectorXd sign = Eigen::VectorXd::Ones(rows);
    Eigen::MatrixXd tab(rows, cols + rows + 1);
    for (Eigen::Index i = 0; i < rows; ++i) {
        double s = b[i] < 0.0 ? -1.0 : 1.0;
        sign[i] = s;
        tab.row(i).head(cols) = s * m.row(i);
        tab.row(i).segment(cols, rows).setZero();
        tab(i, cols + i) = 1.0;
        tab(i, cols + rows) = s * b[i];
    }

    // Artificial variables form the initial basis; minimize their sum.
    // Reduced costs: d_j = c_j - sum_i tab(i,j), with c = 0 on real columns
    // and 1 on artificials, so initially d = -colsum on real columns.
    Eigen::VectorXd d = Eigen::VectorXd::Zero(cols + rows);
    for (Eigen::Index j = 0; j < cols; ++j) d[j] = -tab.col(j).head(rows).sum();
    double objective = tab.col(cols + rows).head(rows).sum();

    std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
    for (Eigen::Index i = 0; i < rows; ++i) basis[static_cast<std::size_t>(i)] = cols + i;

    FeasibilityResult result;
    for (result.iterations = 0; result.iterations < max_iterations; ++result.iterations) {
        // Bland: entering column is the smallest index with negative reduced cost.
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < cols + rows; ++j)
            if (d[j] < -kPivotTol) {
                enter = j;
                break;
            }
        if (enter < 0) break;

        // Ratio test; ties resolved toward the smallest leaving basis index.
        Eigen::Index leave = -1;
        double best_ratio = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i) {
            double a = tab(i, enter);
            if (a <= kPivotTol) continue;
            double ratio = tab(i, cols + rows) / a;
            if (leave < 0 || ratio < best_ratio - kPivotTol ||
                (std::abs(ratio - best_ratio) <= kPivotTol &&
                 basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                leave = i;
                best_ratio = ratio;
            }
        }
        if (leave < 0)
            throw LpFailure("phase-1 objective unbounded; inconsistent tableau");

        // Pivot.
        double piv = tab(leave, enter);
        tab.row(leave) /= piv;
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (i == leave) continue;
            double f = tab(i, enter);
            if (f != 0.0) tab.row(i) -= f * tab.row(leave);
        }
        double fd = d[enter];
        if (fd != 0.0) d -= fd * tab.row(leave).head(cols + rows);
        // Objective decreases by fd * ratio; recompute from basic artificials
        // to keep drift out of the feasibility decision.
        basis[static_cast<std::size_t>(leave)] = enter;
        objective = 0.0;
        for (Eigen::Index i = 0; i < rows; ++i)
            if (basis[static_cast<std::size_t>(i)] >= cols) objective += tab(i, cols + rows);
    }
    if (result.iterations >= max_iterations)
        throw LpFailure("simplex iteration limit reached");

    result.phase1_objective = objective;
    if (objective <= feas_tol) {
        result.feasible = true;
        result.solution = Eigen::VectorXd::Zero(cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            if (basis[static_cast<std::size_t>(i)] < cols)
                result.solution[basis[static_cast<std::size_t>(i)]] = tab(i, cols + rows);
        return result;
    }
    if (objective < ambiguity_tol)
        throw LpFailure("phase-1 objective in the ambiguous zone: " +
                        std::to_string(objective));

    // Farkas certificate from the artificial reduced costs: d_art = 1 - y.
    result.feasible = false;
    result.farkas = Eigen::VectorXd(rows);
    for (Eigen::Index i = 0; i < rows; ++i)
        result.farkas[i] = sign[i] * (1.0 - d[cols + i]);
    return result;
}

}  // namespace bcbound
