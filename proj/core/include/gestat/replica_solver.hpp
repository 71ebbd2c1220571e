#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gestat/ensemble.hpp"
#include "gestat/special_math.hpp"

namespace gestat {

struct OrderParams {
  double Omega = 0.0;
  double kappa = 0.0;
  double p = 0.0;
  double sigma = 1.0;
  double chi = 0.0;
  double chi_hat = 1.0;
};

/// ell = p chi, gamma = sigma chi, delta = chi_hat chi. Finite as chi -> 0.
struct RescaledParams {
  double Omega = 0.0;
  double kappa = 0.0;
  double ell = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
};

enum class Branch { industrial, collapsed, failed };

const char* branch_name(Branch b);

struct SaddleSolution {
  EnsembleParams params;
  Branch branch = Branch::failed;
  OrderParams op;          // p, sigma, chi_hat are infinite when chi = 0
  RescaledParams rescaled; // always populated; zero scale on the collapsed branch
  double residual_norm = 0.0;
  int iterations = 0;
  std::string message;

  bool ok() const { return branch != Branch::failed; }
};

RescaledParams rescale(const OrderParams& op);
OrderParams unscale(const RescaledParams& r, double chi);

/// Consumption of a good with shock t. Log utility closed form for k = 1, chi > 0;
/// a Theta(a) otherwise, with a = x0 - kappa - sqrt(n Omega) t.
double x_star(double t, int x0, int k, const OrderParams& op, double n);

/// Root of chi u'(x) = x - a for a generic decreasing marginal utility.
double x_star_generic(double a, double chi, double (*uprime)(double));

struct MValues {
  double M1 = 0.0;
  double Mt = 0.0;
  double M2 = 0.0;
};

/// Averages of chi u'(x*), chi u'(x*) t, (chi u'(x*))^2 over final goods plus the
/// closed-form non-final contributions, each mixed over the x0 two-point law.
MValues moments_M(const OrderParams& op, const EnsembleParams& params, const QuadratureRule& rule);

/// Same averages in terms of (Omega, kappa, chi) only; valid at chi = 0.
MValues moments_M(double Omega, double kappa, double chi, const EnsembleParams& params,
                  const QuadratureRule& rule);

/// The six saddle-point residuals in the original variables.
std::array<double, 6> saddle_residual(const OrderParams& op, const EnsembleParams& params,
                                      const QuadratureRule& rule);

/// Residuals of the rescaled system at given chi. The sixth entry
/// (delta - n phi) is the chi equation divided by chi; it is not part of the
/// chi = 0 system.
std::array<double, 6> rescaled_residual(const RescaledParams& r, double chi,
                                        const EnsembleParams& params, const QuadratureRule& rule);

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 200;
};

/// chi below which the industrial branch is considered lost.
inline constexpr double kIndustrialChiFloor = 1e-8;

SaddleSolution solve_saddle(const EnsembleParams& params, const std::optional<SaddleSolution>& init,
                            const QuadratureRule& rule, const SolverOptions& opts = {});

/// Sequential warm-started solves along a continuation path.
std::vector<SaddleSolution> sweep(const std::vector<EnsembleParams>& grid, const QuadratureRule& rule,
                                  const SolverOptions& opts = {});

enum class SweepVar { n, pi };

/// Last industrial point when moving `var` from `start` towards the collapsed
/// side: the solution with chi = kIndustrialChiFloor, whose params hold the
/// boundary value of `var`.
SaddleSolution industrial_endpoint(const SaddleSolution& start, SweepVar var,
                                   const QuadratureRule& rule, const SolverOptions& opts = {});

/// s* moments on the industrial branch from the rescaled parameters.
TruncatedMoments scale_moments(const RescaledParams& r, double eps);

}  // namespace gestat
