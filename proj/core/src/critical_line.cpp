#include "gestat/critical_line.hpp"

#include <cmath>
#include <limits>

#include "gestat/detail/volume_terms.hpp"
#include "gestat/errors.hpp"
#include "gestat/special_math.hpp"

namespace gestat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_inputs(double n, double eps) {
  if (!(n > 0.0) || !(eps > 0.0)) throw DomainError("critical line: n and eps must be positive");
}

double I(int k, double x) { return gauss_moment_I(k, x); }

// Scan in u = xi / eps: uniform on [-10, 10], then geometric up to xi = 10.
constexpr double kScanLo = -10.0;
constexpr double kScanHi = 10.0;
constexpr double kScanStep = 0.005;
constexpr double kScanGrowth = 1.002;
constexpr double kXiMax = 10.0;

double next_u(double u) { return u < kScanHi ? u + kScanStep : u * kScanGrowth; }

bool industrial_at(double pi, double n, double eps) {
  const auto m = minimize_B(pi, n, eps);
  return m.found && m.value > 0.0;
}

}  // namespace

double critical_t0(double xi, double n, double eps) {
  const double i2 = I(2, -xi);
  if (!(i2 > 1e-300)) throw NonFinite("bracket_B: I2(-xi) underflows");
  return std::sqrt(n / i2) * (xi * I(0, -xi) / eps + eps * I(1, -xi));
}

double bracket_B(double xi, double pi, double n, double eps) {
  check_inputs(n, eps);
  const double i0 = I(0, -xi);
  const double i2 = I(2, -xi);
  const double t0 = critical_t0(xi, n, eps);
  return 1.0 + xi * xi / (eps * eps) - (1.0 - pi) / n * i2 / (i0 * i0) * I(2, t0);
}

double bracket_B_dxi(double xi, double pi, double n, double eps) {
  check_inputs(n, eps);
  const double i0 = I(0, -xi), i1 = I(1, -xi), i2 = I(2, -xi);
  const double pdf = std_normal_pdf(xi);
  const double k = (1.0 - pi) / n;
  // d/dxi I_m(-xi) = -m I_{m-1}(-xi), and -pdf(xi) for m = 0.
  const double A = k * i2 / (i0 * i0);
  const double dA = k * (-2.0 * i1 / (i0 * i0) + 2.0 * i2 * pdf / (i0 * i0 * i0));
  const double G = xi * i0 / eps + eps * i1;
  const double dG = i0 / eps - xi * pdf / eps - eps * i0;
  const double t0 = std::sqrt(n / i2) * G;
  const double dt0 = std::sqrt(n) * (i1 * std::pow(i2, -1.5) * G + dG / std::sqrt(i2));
  return 2.0 * xi / (eps * eps) - dA * I(2, t0) - 2.0 * A * I(1, t0) * dt0;
}

LocalMinimum minimize_B(double pi, double n, double eps) {
  check_inputs(n, eps);
  auto B = [&](double u) { return bracket_B(eps * u, pi, n, eps); };
  double u_prev = kScanLo, u_cur = next_u(u_prev);
  double b_prev = B(u_prev), b_cur = B(u_cur);
  while (eps * u_cur < kXiMax) {
    const double u_next = next_u(u_cur);
    double b_next;
    try {
      b_next = B(u_next);
    } catch (const NonFinite&) {
      break;
    }
    if (b_cur <= b_prev && b_cur <= b_next) {
      // Bisection on the sign of dB/dxi inside the bracket.
      double lo = u_prev, hi = u_next;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (bracket_B_dxi(eps * mid, pi, n, eps) > 0.0) hi = mid;
        else lo = mid;
      }
      const double um = 0.5 * (lo + hi);
      return {true, eps * um, B(um)};
    }
    u_prev = u_cur;
    b_prev = b_cur;
    u_cur = u_next;
    b_cur = b_next;
  }
  return {};
}

CriticalPoint solve_critical_pi(double n, double eps, double tol) {
  check_inputs(n, eps);
  if (!(tol > 0.0)) throw DomainError("solve_critical_pi: tol must be positive");
  if (industrial_at(0.0, n, eps)) throw NoRoot("solve_critical_pi: industrial already at pi = 0");
  if (!industrial_at(1.0, n, eps)) throw NoRoot("solve_critical_pi: collapsed even at pi = 1");
  double lo = 0.0, hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (industrial_at(mid, n, eps)) hi = mid;
    else lo = mid;
  }
  CriticalPoint cp;
  cp.n = n;
  cp.eps = eps;
  cp.pi_c = hi;
  const auto m = minimize_B(hi, n, eps);
  cp.xi = m.xi;
  cp.c = kNaN;
  cp.residual = std::max(std::abs(m.value), std::abs(eps * bracket_B_dxi(m.xi, hi, n, eps)));
  return cp;
}

std::vector<CriticalPoint> critical_line_sweep(const std::vector<double>& n_grid, double eps,
                                               double tol) {
  std::vector<CriticalPoint> out;
  out.reserve(n_grid.size());
  for (double n : n_grid) {
    try {
      out.push_back(solve_critical_pi(n, eps, tol));
    } catch (const std::exception& e) {
      CriticalPoint cp;
      cp.n = n;
      cp.eps = eps;
      cp.pi_c = cp.xi = cp.c = cp.residual = kNaN;
      cp.ok = false;
      cp.message = e.what();
      out.push_back(cp);
    }
  }
  return out;
}

namespace detail {

double g1(const VolumeOrderParams& o) {
  return 0.5 * o.chi * (o.nu - o.sigma * o.sigma - o.rho * o.rho) + 0.5 * o.nu * o.omega +
         o.rho * o.lambda;
}

double g2(const VolumeOrderParams& o, double eps, const QuadratureRule& rule) {
  // log int_0^inf exp(-nu s^2 / 2 + b s) ds = log sqrt(2 pi / nu) + b^2 / (2 nu) + log I0(b / sqrt nu).
  const double sq = std::sqrt(o.nu);
  auto f = [&](double t) {
    const double b = o.sigma * t - o.rho * eps;
    return 0.5 * std::log(2.0 * M_PI / o.nu) + b * b / (2.0 * o.nu) + log_erfc_half(-b / (sq * kSqrt2));
  };
  const double kink = o.rho * eps / o.sigma;
  return gaussian_average_adaptive(f, std::span<const double>(&kink, 1), rule.fallback_tol() > 0 ? rule.fallback_tol() : 1e-13);
}

double g3(const VolumeOrderParams& o, double pi, double n, const QuadratureRule& rule) {
  const double a = std::sqrt(n * o.omega), b = n * o.lambda, den = std::sqrt(2.0 * n * o.chi);
  auto f = [&](double t) { return log_erfc_half((a * t + b) / den); };
  const double kink = -b / a;
  return (1.0 - pi) / n *
         gaussian_average_adaptive(f, std::span<const double>(&kink, 1), rule.fallback_tol() > 0 ? rule.fallback_tol() : 1e-13);
}

RescaledVolumeParams volume_saddle(double xi, double c, double n, double eps) {
  const double v = I(0, -xi);
  const double omega = c * c * I(2, -xi) / (v * v);
  const double t0 = critical_t0(xi, n, eps);
  return {v, c, xi * c / eps, omega, t0 * std::sqrt(omega / n)};
}

double h1(const RescaledVolumeParams& o) {
  return 0.5 * (o.v * o.omega - o.c * o.c - o.r * o.r) + o.r * o.lambda;
}

double h2(const RescaledVolumeParams& o, double eps, const QuadratureRule& rule) {
  auto f = [&](double t) {
    const double b = o.c * t - o.r * eps;
    return b > 0.0 ? b * b / (2.0 * o.v) : 0.0;
  };
  const double kink = o.r * eps / o.c;
  return gaussian_average(f, rule, std::span<const double>(&kink, 1));
}

double h3(const RescaledVolumeParams& o, double pi, double n, const QuadratureRule& rule) {
  const double t0 = std::sqrt(n / o.omega) * o.lambda;
  auto f = [&](double t) { return t + t0 > 0.0 ? (t + t0) * (t + t0) : 0.0; };
  const double kink = -t0;
  return -(1.0 - pi) * o.omega / (2.0 * n) * gaussian_average(f, rule, std::span<const double>(&kink, 1));
}

}  // namespace detail

}  // namespace gestat
