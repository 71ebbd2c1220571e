#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

#include "gestat/ensemble.hpp"
#include "gestat/equilibrium.hpp"

namespace gestat {

struct SampleStat {
  double mean = 0.0;
  double sem = 0.0;  // standard error of the mean
  int count = 0;
};

SampleStat sample_stat(std::span<const double> values);

/// Per-instance averages of one solved economy.
struct InstanceObservables {
  std::uint64_t seed = 0;
  bool ok = false;
  EquilibriumStatus status = EquilibriumStatus::failed;
  double s_mean = 0.0;
  double phi = 0.0;
  double x_mean = 0.0;
  double XC = 0.0;
  double XW = 0.0;
  double u_mean = 0.0;  // mean log consumption of final goods
  double identity_error = 0.0;  // |<x> - (pi_hat - (N/C) eps <s>)|
};

InstanceObservables instance_observables(const EconomyInstance& econ, const EquilibriumSolution& sol);

struct MonteCarloResult {
  EnsembleParams params;
  int N = 0, C = 0;
  int instances = 0;
  int solved = 0;
  int failed = 0;      // solver failures and infeasible instances, excluded from the means
  int infeasible = 0;  // of which: some final good cannot be produced
  SampleStat s_mean, phi, x_mean, XC, XW, u;
  double max_identity_error = 0.0;
  std::vector<InstanceObservables> per_instance;  // in seed order
};

/// Solves `instances` economies with seeds base_seed + index.
MonteCarloResult monte_carlo_observables(const EnsembleParams& params, int C, int instances,
                                         std::uint64_t base_seed, int workers = 0);
MonteCarloResult monte_carlo_observables(const EnsembleParams& params, int C,
                                         std::span<const std::uint64_t> seeds, int workers = 0);

struct FeasibilityRecord {
  double n = 0.0, pi = 0.0, eps = 0.0;
  int N = 0, C = 0;
  int trials = 0;
  int feasible_count = 0;
  int solver_failures = 0;
  double fraction = 0.0;
};

inline constexpr double kFeasibilityThreshold = 1e-6;

/// Optimum of max sum s subject to q_c's >= 0 on non-primary goods, 0 <= s <= 1.
double homogeneous_lp_optimum(const EconomyInstance& econ);

FeasibilityRecord lp_feasibility_fraction(const EnsembleParams& params, int C, int trials,
                                          std::uint64_t base_seed, int workers = 0);

struct GeometryRecord {
  double n = 0.0, pi = 0.0, eps = 0.0;
  int N = 0, C = 0;
  int samples = 0;          // total LP vertices sampled
  int collapsed_draws = 0;  // technology draws whose vertices were all zero
  bool collapsed = false;
  double lambda_max = 0.0;
  double lambda_max_over_N = 0.0;
};

/// Pearson correlation of the columns of `samples` (rows are observations).
/// Constant columns get a unit diagonal and zero off-diagonal entries.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& samples);

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
double power_iteration_max(const Eigen::MatrixXd& m, double tol = 1e-12, int max_iter = 100000);

/// Vertex of the feasible set maximizing w's, with sum s <= |primary|/eps.
Eigen::VectorXd sample_vertex(const Eigen::MatrixXd& q, const Eigen::VectorXd& x0, double eps,
                              const Eigen::VectorXd& w);

GeometryRecord pca_probe(const EnsembleParams& params, int C, int n_tech_draws, int n_objective_draws,
                         std::uint64_t base_seed, int workers = 0);

}  // namespace gestat
