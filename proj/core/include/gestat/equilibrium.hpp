#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "gestat/ensemble.hpp"

namespace gestat {

enum class EquilibriumStatus {
  optimal,
  infeasible,  // some final good stays at zero on the whole feasible set
  failed
};

std::string status_name(EquilibriumStatus s);

struct KktReport {
  double stationarity = 0.0;     // max over active i of |p.q_i| / |p|
  double dual_feasibility = 0.0; // max over i of max(0, p.q_i) / |p|
  double complementarity = 0.0;  // max of s_i |p.q_i| and p_c x_c, scaled
  double primal = 0.0;           // max violation of s >= 0, x >= 0 and x = x0 + q's
  double walras = 0.0;           // |p.x - p.x0| / |p.x0|
  double excess_price = 0.0;     // max p_c / |p| over non-final goods with x_c > 1e-6
  double max_residual() const;
};

struct EquilibriumSolution {
  EquilibriumStatus status = EquilibriumStatus::failed;
  Eigen::VectorXd s_star;
  Eigen::VectorXd x_star;
  Eigen::VectorXd duals;  // prices: k_c / x_c on final goods, shadow prices elsewhere
  std::vector<int> active_set;
  double objective = 0.0;
  double kkt_residual = 0.0;
  KktReport kkt;
  bool polished = false;  // active-set Newton refinement accepted
  int newton_steps = 0;
  std::string message;

  bool ok() const { return status == EquilibriumStatus::optimal; }
};

/// Maximizes sum_c k_c log(x0_c + sum_i q(i, c) s_i) over s >= 0 with every
/// x_c >= 0, by a log barrier followed by an active-set Newton polish.
EquilibriumSolution solve_equilibrium(const EconomyInstance& econ, double tol = 1e-9);

/// Fills the KKT report for given s and prices.
KktReport certify(const EconomyInstance& econ, const Eigen::VectorXd& s, const Eigen::VectorXd& p,
                  const std::vector<int>& active);

}  // namespace gestat
