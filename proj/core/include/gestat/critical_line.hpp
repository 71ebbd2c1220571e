#pragma once

#include <string>
#include <vector>

namespace gestat {

struct CriticalPoint {
  double n = 0.0;
  double eps = 0.0;
  double pi_c = 0.0;
  double xi = 0.0;
  double c = 0.0;  // undetermined at B = 0; reported as NaN
  double residual = 0.0;
  bool ok = true;
  std::string message;
};

/// Bracket B(xi) with h~ = (c^2 / 2) B.
double bracket_B(double xi, double pi, double n, double eps);

/// Analytic derivative of bracket_B with respect to xi.
double bracket_B_dxi(double xi, double pi, double n, double eps);

/// t0(xi) entering the third term of B.
double critical_t0(double xi, double n, double eps);

struct LocalMinimum {
  bool found = false;
  double xi = 0.0;
  double value = 0.0;
};

/// First local minimum of B scanning upward from xi = -10 eps to xi = 10. B falls to
/// -infinity for large xi, so the relevant extremum is local.
LocalMinimum minimize_B(double pi, double n, double eps);

/// pi_c(n, eps) where the local minimum of B touches zero.
CriticalPoint solve_critical_pi(double n, double eps, double tol = 1e-12);

/// One point per grid entry; failures are recorded, not thrown.
std::vector<CriticalPoint> critical_line_sweep(const std::vector<double>& n_grid, double eps,
                                               double tol = 1e-12);

}  // namespace gestat
