#pragma once

#include <Eigen/Core>

namespace gestat {

enum class LpStatus { optimal, unbounded, iteration_limit };

struct LpResult {
  LpStatus status = LpStatus::iteration_limit;
  Eigen::VectorXd x;     // structural variables
  Eigen::VectorXd duals; // one per row of A, nonnegative at optimum
  double objective = 0.0;
  int pivots = 0;
};

/// Dense bounded-variable primal simplex for
///   maximize c'x  subject to  A x <= b,  0 <= x <= upper,
/// with b >= 0 so that the slack basis is feasible. Entries of `upper` may be
/// +infinity. Dantzig pricing, switching to Bland's rule while degenerate
/// pivots repeat.
LpResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                  const Eigen::VectorXd& upper, double tol = 1e-9, int max_pivots = 50000);

}  // namespace gestat
