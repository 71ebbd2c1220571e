#include "gestat/observables.hpp"

#include <cmath>
#include <limits>

#include "gestat/errors.hpp"
#include "kink_quadrature.hpp"

namespace gestat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double spread(const SaddleSolution& sol) { return std::sqrt(sol.params.n * sol.rescaled.Omega); }

bool industrial(const SaddleSolution& sol) { return sol.branch == Branch::industrial; }

// <g(x*)> over the final-good law at endowment x0.
double final_good_average(const SaddleSolution& sol, int x0, double (*g)(double),
                          const QuadratureRule& rule) {
  const double w = spread(sol);
  const double chi = sol.op.chi;
  auto integrand = [&](double t) { return g(x_star(t, x0, 1, sol.op, sol.params.n)); };
  return detail::kinked_average(integrand, (x0 - sol.rescaled.kappa) / w, std::sqrt(chi) / w, rule);
}

double identity(double x) { return x; }
double log_of(double x) { return std::log(x); }

}  // namespace

double active_fraction(const OrderParams& op, double eps) {
  return erfc_half(eps * op.p / (kSqrt2 * op.sigma));
}

double active_fraction(const SaddleSolution& sol) {
  if (!industrial(sol)) return sol.branch == Branch::collapsed ? 0.0 : kNaN;
  return scale_moments(sol.rescaled, sol.params.eps).m0;
}

PointMass scale_density(const SaddleSolution& sol, double s) {
  if (s < 0.0) throw DomainError("scale_density: s must be nonnegative");
  if (!industrial(sol)) return {1.0, 0.0};
  const auto& r = sol.rescaled;
  const double phi = active_fraction(sol);
  const double dens = s > 0.0 ? (r.delta / r.gamma) *
                                    std_normal_pdf((r.delta * s + r.ell * sol.params.eps) / r.gamma)
                              : 0.0;
  return {1.0 - phi, dens};
}

double psi(const SaddleSolution& sol, int x0) {
  if (!industrial(sol)) return x0 == 0 ? 1.0 : 0.0;
  return erfc_half((x0 - sol.rescaled.kappa) / (kSqrt2 * spread(sol)));
}

PointMass goods_density(const SaddleSolution& sol, double x, int x0, int k) {
  if (x < 0.0) throw DomainError("goods_density: x must be nonnegative");
  if (!industrial(sol)) return {x0 == 0 ? 1.0 : 0.0, 0.0};
  const double w = spread(sol);
  const double kappa = sol.rescaled.kappa;
  const double chi = sol.op.chi;
  if (k == 1 && chi > 0.0) {
    if (x == 0.0) return {0.0, 0.0};
    const double a = x - chi / x;
    const double t = (x0 - kappa - a) / w;
    return {0.0, std_normal_pdf(t) * (1.0 + chi / (x * x)) / w};
  }
  const double dens = x > 0.0 ? std_normal_pdf((x0 - kappa - x) / w) / w : 0.0;
  return {psi(sol, x0), dens};
}

ConditionalConsumption conditional_consumption(const SaddleSolution& sol, const QuadratureRule& rule) {
  if (sol.branch == Branch::collapsed) return {1.0, 0.0, 1.0, 0.0};
  if (!industrial(sol)) return {kNaN, kNaN, kNaN, kNaN};
  const double w = spread(sol);
  const double kappa = sol.rescaled.kappa;
  // Non-final goods: x* = w (-t - d) Theta(-t - d) with d = (kappa - x0)/w.
  auto nonfinal = [&](int x0) { return w * gauss_moment_I(1, (x0 - kappa) / w); };
  ConditionalConsumption c;
  c.x11 = final_good_average(sol, 1, identity, rule);
  c.x01 = final_good_average(sol, 0, identity, rule);
  c.x10 = nonfinal(1);
  c.x00 = nonfinal(0);
  return c;
}

double utility_per_final_good(const SaddleSolution& sol, const QuadratureRule& rule) {
  if (sol.branch == Branch::collapsed) {
    return sol.params.pi >= 1.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  if (!industrial(sol)) return kNaN;
  const double pi = sol.params.pi;
  double u = 0.0;
  if (pi > 0.0) u += pi * final_good_average(sol, 1, log_of, rule);
  if (pi < 1.0) u += (1.0 - pi) * final_good_average(sol, 0, log_of, rule);
  return u;
}

Jump jump_decomposition(const SaddleSolution& at_transition, const QuadratureRule& rule) {
  if (!industrial(at_transition)) {
    throw DomainError("jump_decomposition: needs an industrial solution at the transition");
  }
  const auto& P = at_transition.params;
  const auto c = conditional_consumption(at_transition, rule);
  Jump j;
  j.dX = P.n * P.eps * scale_moments(at_transition.rescaled, P.eps).m1;
  j.dXC = P.f * (P.pi * (1.0 - c.x11) - (1.0 - P.pi) * c.x01);
  j.dXW = (1.0 - P.f) * (P.pi * (1.0 - c.x10) - (1.0 - P.pi) * c.x00);
  return j;
}

ObservableSet compute_observables(const SaddleSolution& sol, const QuadratureRule& rule) {
  const auto& P = sol.params;
  ObservableSet o;
  if (sol.branch == Branch::failed) {
    o.s_mean = o.phi = o.x_mean = o.XC = o.XW = o.psi0 = o.psi1 = o.u_mean = kNaN;
    o.x11 = o.x01 = o.x10 = o.x00 = kNaN;
    return o;
  }
  if (industrial(sol)) {
    const auto m = scale_moments(sol.rescaled, P.eps);
    o.s_mean = m.m1;
    o.phi = m.m0;
  }
  const auto c = conditional_consumption(sol, rule);
  o.x11 = c.x11;
  o.x01 = c.x01;
  o.x10 = c.x10;
  o.x00 = c.x00;
  o.XC = P.f * (P.pi * c.x11 + (1.0 - P.pi) * c.x01);
  o.XW = (1.0 - P.f) * (P.pi * c.x10 + (1.0 - P.pi) * c.x00);
  o.x_mean = o.XC + o.XW;
  o.psi0 = psi(sol, 0);
  o.psi1 = psi(sol, 1);
  o.u_mean = utility_per_final_good(sol, rule);
  return o;
}

PhasePointRecord make_record(const SaddleSolution& sol, const QuadratureRule& rule) {
  return {sol.params, sol.branch, compute_observables(sol, rule)};
}

}  // namespace gestat
