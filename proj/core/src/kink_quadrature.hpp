#pragma once

#include <array>
#include <cmath>

#include "gestat/special_math.hpp"

namespace gestat::detail {

// Smoothing width sqrt(chi)/w of the final-good integrand below which the
// Hermite rule loses accuracy and piecewise adaptive integration takes over.
inline constexpr double kSmoothWidth = 0.6;

inline bool use_adaptive(double t0, double width, const QuadratureRule& rule) {
  return rule.kind() == QuadratureRule::Kind::adaptive_fallback && width < kSmoothWidth &&
         std::abs(t0) < 6.0 + 5.0 * width;
}

inline std::array<double, 3> kink_cuts(double t0, double width) {
  return {t0 - 4.0 * width, t0, t0 + 4.0 * width};
}

/// <g(t)> for an integrand with a kink at t0 rounded off over `width`.
inline double kinked_average(const GaussIntegrand& g, double t0, double width,
                             const QuadratureRule& rule) {
  if (use_adaptive(t0, width, rule)) {
    const auto cuts = kink_cuts(t0, width);
    return gaussian_average_adaptive(g, cuts, rule.fallback_tol());
  }
  return gaussian_average(g, rule);
}

}  // namespace gestat::detail
