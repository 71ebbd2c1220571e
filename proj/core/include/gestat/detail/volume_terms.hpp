#pragma once

// Terms of the log-volume of the homogeneous feasible cone, before and after
// the chi -> 0 rescaling. Used to check the reduction to bracket_B.

#include "gestat/special_math.hpp"

namespace gestat::detail {

struct VolumeOrderParams {
  double chi, nu, sigma, rho, omega, lambda;
};

double g1(const VolumeOrderParams& o);
double g2(const VolumeOrderParams& o, double eps, const QuadratureRule& rule);
double g3(const VolumeOrderParams& o, double pi, double n, const QuadratureRule& rule);

struct RescaledVolumeParams {
  double v, c, r, omega, lambda;
};

/// (v, c, r, omega, lambda) at the saddle point for given (xi, c).
RescaledVolumeParams volume_saddle(double xi, double c, double n, double eps);

double h1(const RescaledVolumeParams& o);
double h2(const RescaledVolumeParams& o, double eps, const QuadratureRule& rule);
double h3(const RescaledVolumeParams& o, double pi, double n, const QuadratureRule& rule);

}  // namespace gestat::detail
