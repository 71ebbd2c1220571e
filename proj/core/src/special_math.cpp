#include "gestat/special_math.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>

#include "gestat/errors.hpp"

namespace gestat {

namespace {

constexpr double kSqrtPi = 1.77245385090551602729816748334;
constexpr double kLn2 = 0.693147180559945309417232121458;

// Backward evaluation of the Mills-ratio continued fraction
//   m(z) = 1/(D0), D_k = z + (k+1)/D_{k+1}.
// Returns D0, D1, D2 for z >= 3.
std::array<double, 3> mills_denominators(double z) {
  const int depth = z > 8.0 ? 60 : 160;
  double d = z;
  for (int k = depth; k >= 3; --k) d = z + static_cast<double>(k) / d;
  const double d2 = d;
  const double d1 = z + 2.0 / d2;
  const double d0 = z + 1.0 / d1;
  return {d0, d1, d2};
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

double checked(double v, double t) {
  if (!std::isfinite(v)) {
    throw NonFinite("integrand is not finite at t = " + std::to_string(t));
  }
  return v;
}

struct GkResult {
  double value;
  double error;
};

GkResult gk15(const GaussIntegrand& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = checked(f(c), c) * std_normal_pdf(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = checked(f(c - dx), c - dx) * std_normal_pdf(c - dx);
    const double f2 = checked(f(c + dx), c + dx) * std_normal_pdf(c + dx);
    kron += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  return {kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double erfc_half(double x) { return 0.5 * std::erfc(x); }

double erfcx(double x) {
  if (x < 4.0) return std::exp(x * x) * std::erfc(x);
  // erfcx(x) = m(x sqrt2) * sqrt(2/pi) with m the Mills ratio.
  const auto d = mills_denominators(x * kSqrt2);
  return kSqrt2 / (kSqrtPi * d[0]);
}

double log_erfc_half(double x) {
  if (x < 4.0) return std::log(erfc_half(x));
  return -x * x + std::log(erfcx(x)) - kLn2;
}

double gauss_moment_I(int order, double x) {
  if (order < 0 || order > 2) throw DomainError("gauss_moment_I: order must be 0, 1 or 2");
  const double pdf = std_normal_pdf(x);
  if (x < -3.0) {
    const auto d = mills_denominators(-x);
    switch (order) {
      case 0: return pdf / d[0];
      case 1: return pdf / (d[0] * d[1]);
      default: return 2.0 * pdf / (d[0] * d[1] * d[2]);
    }
  }
  const double i0 = erfc_half(-x / kSqrt2);
  switch (order) {
    case 0: return i0;
    case 1: return x * i0 + pdf;
    default: return (1.0 + x * x) * i0 + x * pdf;
  }
}

double gauss_moment_I_prime(int order, double x) {
  if (order == 0) return std_normal_pdf(x);
  return static_cast<double>(order) * gauss_moment_I(order - 1, x);
}

QuadratureRule QuadratureRule::gauss_hermite(int n) {
  if (n < 2) throw DomainError("gauss_hermite: need at least two nodes");
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite family.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  std::vector<double> nodes(eig.eigenvalues().data(), eig.eigenvalues().data() + n);
  std::sort(nodes.begin(), nodes.end());

  // Orthonormal recurrence: returns {p_n(x), p_{n-1}(x), sum_{k<n} p_k(x)^2}.
  auto recur = [n](double x) {
    double pm1 = 0.0, p = 1.0, sum = 0.0;
    for (int k = 0; k < n; ++k) {
      sum += p * p;
      const double next = (x * p - std::sqrt(static_cast<double>(k)) * pm1) /
                          std::sqrt(static_cast<double>(k + 1));
      pm1 = p;
      p = next;
    }
    return std::array<double, 3>{p, pm1, sum};
  };

  std::vector<double> weights(n);
  for (int i = 0; i < n; ++i) {
    double x = nodes[i];
    for (int it = 0; it < 3; ++it) {
      const auto r = recur(x);
      const double deriv = std::sqrt(static_cast<double>(n)) * r[1];
      if (deriv == 0.0) break;
      x -= r[0] / deriv;
    }
    nodes[i] = x;
    weights[i] = 1.0 / recur(x)[2];
  }
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (nodes[n - 1 - i] - nodes[i]);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 0.5 * (weights[i] + weights[n - 1 - i]);
    weights[i] = weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  return QuadratureRule(Kind::gauss_hermite_standardized, std::move(nodes), std::move(weights), 0.0);
}

QuadratureRule QuadratureRule::with_fallback(int n, double tol) {
  QuadratureRule r = gauss_hermite(n);
  r.kind_ = Kind::adaptive_fallback;
  r.tol_ = tol;
  return r;
}

double gaussian_average(const GaussIntegrand& f, const QuadratureRule& rule) {
  const auto nodes = rule.nodes();
  const auto weights = rule.weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * checked(f(nodes[i]), nodes[i]);
  return acc;
}

double gaussian_average(const GaussIntegrand& f, const QuadratureRule& rule,
                        std::span<const double> kinks) {
  if (rule.kind() == QuadratureRule::Kind::adaptive_fallback) {
    for (double k : kinks) {
      if (std::abs(k) < 6.0) return gaussian_average_adaptive(f, kinks, rule.fallback_tol());
    }
  }
  return gaussian_average(f, rule);
}

double gaussian_average_adaptive(const GaussIntegrand& f, std::span<const double> breakpoints,
                                 double tol) {
  // Beyond |t| = 13 the Gaussian weight is below 1e-37.
  constexpr double kSpan = 13.0;
  constexpr std::size_t kMaxPieces = 4000;
  std::vector<double> cuts{-kSpan};
  for (double b : breakpoints) {
    if (std::isfinite(b) && b > -kSpan && b < kSpan) cuts.push_back(b);
  }
  cuts.push_back(kSpan);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Global adaptive bisection: always split the piece with the largest error.
  struct Piece {
    double a, b;
    GkResult r;
    bool operator<(const Piece& o) const { return r.error < o.r.error; }
  };
  std::priority_queue<Piece> heap;
  double value = 0.0, error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const int parts = std::max(1, static_cast<int>(std::ceil((b - a) / 2.0)));
    const double h = (b - a) / parts;
    for (int j = 0; j < parts; ++j) {
      Piece p{a + j * h, a + (j + 1) * h, gk15(f, a + j * h, a + (j + 1) * h)};
      value += p.r.value;
      error += p.r.error;
      heap.push(p);
    }
  }
  while (error > tol * std::max(1.0, std::abs(value)) && heap.size() < kMaxPieces) {
    const Piece worst = heap.top();
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    Piece left{worst.a, m, gk15(f, worst.a, m)};
    Piece right{m, worst.b, gk15(f, m, worst.b)};
    value += left.r.value + right.r.value - worst.r.value;
    error += left.r.error + right.r.error - worst.r.error;
    heap.push(left);
    heap.push(right);
  }
  return value;
}

TruncatedMoments truncated_scale_moments(double p, double sigma, double chi_hat, double eps) {
  if (!(sigma > 0.0)) throw DomainError("truncated_scale_moments: sigma must be positive");
  if (!(chi_hat > 0.0)) throw DomainError("truncated_scale_moments: chi_hat must be positive");
  const double z = p * eps / sigma;
  const double r = sigma / chi_hat;
  const double i0 = gauss_moment_I(0, -z);
  // <s t> = r <(t - z) Theta(t - z) t> = r I_0(-z) by Gaussian integration by parts.
  return {i0, r * gauss_moment_I(1, -z), r * i0, r * r * gauss_moment_I(2, -z)};
}

}  // namespace gestat
