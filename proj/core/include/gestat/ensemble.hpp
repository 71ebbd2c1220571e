#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>

namespace gestat {

enum class Utility { log };

struct EnsembleParams {
  double n = 1.0;    // technologies per good, N / C
  double pi = 0.5;   // fraction of primary goods
  double f = 0.5;    // fraction of final goods
  double eps = 0.1;  // inefficiency of every technology
  Utility utility = Utility::log;

  double intermediate_fraction() const { return (1.0 - f) * (1.0 - pi); }
  void validate() const;
};

/// One sampled economy. Row i of q is technology i; q(i, c) is its net output of good c.
struct EconomyInstance {
  int N = 0;
  int C = 0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd q;
  Eigen::VectorXd x0;
  Eigen::VectorXd k;

  int primary_count() const;
  int final_count() const;
};

/// Gaussian technologies with variance 1/C, shifted so every technology
/// satisfies sum_c q(i, c) = -eps. x0 and k are independent Bernoulli draws.
EconomyInstance sample_economy(const EnsembleParams& params, int C, std::uint64_t seed);

/// Only the technology matrix, for callers that draw endowments themselves.
Eigen::MatrixXd sample_technologies(int N, int C, double eps, std::uint64_t seed);

/// (n, pi, f) at fixed f/n and pi/n with (1 - f)(1 - pi) = i.
EnsembleParams intermediate_sweep_map(double f_over_n, double pi_over_n, double i,
                                      double eps = 0.1);

void write_economy(std::ostream& os, const EconomyInstance& econ);
EconomyInstance read_economy(std::istream& is);
void save_economy(const std::string& path, const EconomyInstance& econ);
EconomyInstance load_economy(const std::string& path);

}  // namespace gestat
