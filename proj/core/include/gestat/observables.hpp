#pragma once

#include <string>

#include "gestat/replica_solver.hpp"

namespace gestat {

struct ObservableSet {
  double s_mean = 0.0;
  double phi = 0.0;
  double x_mean = 0.0;
  double x11 = 0.0, x01 = 0.0, x10 = 0.0, x00 = 0.0;  // x_{x0 k}
  double XC = 0.0;
  double XW = 0.0;
  double psi0 = 0.0, psi1 = 0.0;
  double u_mean = 0.0;
};

struct PointMass {
  double atom_at_zero = 0.0;
  double density = 0.0;
};

struct ConditionalConsumption {
  double x11 = 0.0, x01 = 0.0, x10 = 0.0, x00 = 0.0;
};

struct Jump {
  double dX = 0.0;
  double dXC = 0.0;
  double dXW = 0.0;
};

/// phi = erfc_half(eps p / (sqrt2 sigma)).
double active_fraction(const OrderParams& op, double eps);
double active_fraction(const SaddleSolution& sol);

/// Law of s*: atom 1 - phi at zero and a truncated Gaussian density for s > 0.
PointMass scale_density(const SaddleSolution& sol, double s);

/// Law of x* given (x0, k). No atom for final goods under log utility.
PointMass goods_density(const SaddleSolution& sol, double x, int x0, int k);

/// psi(x0) = erfc_half((x0 - kappa) / sqrt(2 n Omega)), the atom at zero of a non-final good.
double psi(const SaddleSolution& sol, int x0);

ConditionalConsumption conditional_consumption(const SaddleSolution& sol, const QuadratureRule& rule);

/// <log x*> over final goods, -inf when some final goods sit at zero.
double utility_per_final_good(const SaddleSolution& sol, const QuadratureRule& rule);

/// Jumps of <x*>, X_C and X_W between the collapsed phase and `at_transition`.
Jump jump_decomposition(const SaddleSolution& at_transition, const QuadratureRule& rule);

ObservableSet compute_observables(const SaddleSolution& sol, const QuadratureRule& rule);

struct PhasePointRecord {
  EnsembleParams params;
  Branch branch = Branch::failed;
  ObservableSet obs;
};

PhasePointRecord make_record(const SaddleSolution& sol, const QuadratureRule& rule);

}  // namespace gestat
