#pragma once

// Gaussian-measure integrals used by the saddle-point and critical-line
// systems. Every average <g(t)>_t is over a standard normal t.

#include <functional>
#include <span>
#include <vector>

namespace gestat {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
inline constexpr double kSqrt2 = 1.41421356237309504880168872421;

double std_normal_pdf(double x);

/// erfc(x) / 2. Equals P(t > x sqrt(2)) for standard normal t.
double erfc_half(double x);

/// Scaled complementary error function exp(x^2) erfc(x), accurate for large x.
double erfcx(double x);

/// log(erfc(x) / 2) without underflow for large positive x.
double log_erfc_half(double x);

/// I_n(x) = <Theta(t + x) (t + x)^n>_t for n in {0, 1, 2}.
double gauss_moment_I(int order, double x);

/// Derivative of I_n with respect to x: n I_{n-1}(x), and pdf(x) for n = 0.
double gauss_moment_I_prime(int order, double x);

class QuadratureRule {
 public:
  enum class Kind { gauss_hermite_standardized, adaptive_fallback };

  /// Gauss-Hermite rule normalized for the standard normal weight.
  static QuadratureRule gauss_hermite(int nodes = 120);

  /// Gauss-Hermite with adaptive interval splitting whenever the caller flags
  /// a kink within six standard deviations.
  static QuadratureRule with_fallback(int nodes = 120, double tol = 1e-13);

  Kind kind() const noexcept { return kind_; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  double fallback_tol() const noexcept { return tol_; }

 private:
  QuadratureRule(Kind kind, std::vector<double> nodes, std::vector<double> weights, double tol)
      : kind_(kind), nodes_(std::move(nodes)), weights_(std::move(weights)), tol_(tol) {}

  Kind kind_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  double tol_;
};

using GaussIntegrand = std::function<double(double)>;

/// Sum of weights * f(nodes). Throws NonFinite if f is non-finite at a node.
double gaussian_average(const GaussIntegrand& f, const QuadratureRule& rule);

/// As above, but if the rule has an adaptive fallback and any of `kinks` lies
/// within six standard deviations, integrates piecewise between the kinks
/// with adaptive Gauss-Kronrod instead.
double gaussian_average(const GaussIntegrand& f, const QuadratureRule& rule,
                        std::span<const double> kinks);

/// Adaptive Gauss-Kronrod (7/15) of f(t) pdf(t) over the real line, split at
/// the given breakpoints. Stops when the error estimate is below
/// tol * max(1, |value|).
double gaussian_average_adaptive(const GaussIntegrand& f, std::span<const double> breakpoints,
                                 double tol = 1e-13);

/// Moments of s(t) = ((sigma t - p eps) / chi_hat) Theta(sigma t - p eps).
struct TruncatedMoments {
  double m0;  ///< <Theta(sigma t - p eps)>, the active fraction
  double m1;  ///< <s>
  double mt;  ///< <s t>
  double m2;  ///< <s^2>
};

TruncatedMoments truncated_scale_moments(double p, double sigma, double chi_hat, double eps);

}  // namespace gestat
