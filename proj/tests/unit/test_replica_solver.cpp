#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gestat/errors.hpp"
#include "gestat/observables.hpp"
#include "gestat/replica_solver.hpp"
#include "oracles.hpp"

using namespace gestat;

namespace {

const QuadratureRule& rule() {
  static const QuadratureRule r = QuadratureRule::with_fallback();
  return r;
}

SaddleSolution solve(const EnsembleParams& p) { return solve_saddle(p, std::nullopt, rule()); }

double inv(double x) { return 1.0 / x; }

}  // namespace

TEST(XStar, NonFinalClamp) {
  OrderParams op{0.2, 1.5, 1.0, 1.0, 0.2, 1.0};
  // a = x0 - kappa - sqrt(n Omega) t < 0 at t = 0.
  EXPECT_EQ(x_star(0.0, 0, 0, op, 1.0), 0.0);
  EXPECT_EQ(x_star(0.0, 1, 0, op, 1.0), 0.0);
  EXPECT_NEAR(x_star(-5.0, 1, 0, op, 1.0), 1.0 - 1.5 + std::sqrt(0.2) * 5.0, 1e-14);
}

TEST(XStar, FinalAtZeroShiftIsSqrtChi) {
  OrderParams op{0.2, 1.0, 1.0, 1.0, 0.2, 1.0};
  EXPECT_NEAR(x_star(0.0, 1, 1, op, 1.0), std::sqrt(0.2), 1e-15);
}

TEST(XStar, FinalSolvesFixedPoint) {
  std::mt19937_64 eng(2);
  std::uniform_real_distribution<double> u(-6, 6), uc(1e-6, 2.0);
  for (int k = 0; k < 500; ++k) {
    OrderParams op{0.3, 0.4, 1.0, 1.0, uc(eng), 1.0};
    const double t = u(eng);
    const double a = 1 - op.kappa - std::sqrt(2.0 * op.Omega) * t;
    const double x = x_star(t, 1, 1, op, 2.0);
    EXPECT_GT(x, 0.0);
    EXPECT_NEAR(op.chi / x, x - a, 1e-12 * std::max(1.0, std::abs(a)));
    EXPECT_NEAR(x_star_generic(a, op.chi, inv), x, 1e-10 * std::max(1.0, x));
  }
}

TEST(XStar, CollapsedLimitIsRamp) {
  OrderParams op{0.3, 0.4, 1.0, 1.0, 0.0, 1.0};
  EXPECT_NEAR(x_star(0.0, 1, 1, op, 1.0), 0.6, 1e-15);
  EXPECT_EQ(x_star(0.0, 0, 1, op, 1.0), 0.0);
}

TEST(MomentsM, NoFinalGoodsReducesToClosedForm) {
  const EnsembleParams P{1.0, 0.4, 0.0, 0.1};
  const OrderParams op{0.25, 0.3, 1.0, 1.0, 0.5, 1.0};
  const auto M = moments_M(op, P, rule());
  const double w = std::sqrt(P.n * op.Omega);
  double m1 = 0, mt = 0, m2 = 0;
  for (int x0 = 0; x0 < 2; ++x0) {
    const double mass = x0 ? P.pi : 1 - P.pi;
    const double d = (op.kappa - x0) / w;
    m1 += mass * w * gauss_moment_I(1, d);
    mt += mass * w * gauss_moment_I(0, d);
    m2 += mass * w * w * gauss_moment_I(2, d);
  }
  EXPECT_NEAR(M.M1, m1, 1e-15);
  EXPECT_NEAR(M.Mt, mt, 1e-15);
  EXPECT_NEAR(M.M2, m2, 1e-15);
}

TEST(MomentsM, PsiIsHalfWhenKappaEqualsEndowment) {
  const EnsembleParams P{1.0, 1.0, 0.0, 0.1};
  const OrderParams op{0.3, 1.0, 1.0, 1.0, 0.5, 1.0};
  const double w = std::sqrt(op.Omega);
  // Mt / w is the mass of goods fully used, 1 - psi.
  EXPECT_NEAR(moments_M(op, P, rule()).Mt / w, 0.5, 1e-15);
}

TEST(MomentsM, MatchesBruteForceQuadrature) {
  std::mt19937_64 eng(9);
  std::uniform_real_distribution<double> u01(0.05, 0.95), uo(0.05, 1.0), uk(-0.5, 1.5), uc(1e-4, 0.5);
  for (int k = 0; k < 25; ++k) {
    const EnsembleParams P{0.3 + 3 * u01(eng), u01(eng), u01(eng), 0.1};
    const OrderParams op{uo(eng), uk(eng), 1.0, 1.0, uc(eng), 1.0};
    const auto M = moments_M(op, P, rule());
    const auto B = oracle::moments_M(op, P);
    EXPECT_NEAR(M.M1, B.M1, 1e-7);
    EXPECT_NEAR(M.Mt, B.Mt, 1e-7);
    EXPECT_NEAR(M.M2, B.M2, 1e-7);
  }
}

TEST(MomentsM, RequiresPositiveOmega) {
  const EnsembleParams P{1.0, 0.5, 0.5, 0.1};
  EXPECT_THROW(moments_M(0.0, 0.2, 0.1, P, rule()), NonFinite);
}

TEST(SolveSaddle, ConvergedPointHasSmallResidual) {
  const EnsembleParams P{3.0, 0.65, 0.5, 0.1};
  const auto s = solve(P);
  ASSERT_EQ(s.branch, Branch::industrial);
  const auto r = saddle_residual(s.op, P, rule());
  double norm = 0.0;
  for (double v : r) norm += v * v;
  EXPECT_LT(std::sqrt(norm), 1e-9);
}

TEST(SolveSaddle, IndustrialPoint) {
  const auto s = solve({3.0, 0.9, 0.5, 0.1});
  ASSERT_EQ(s.branch, Branch::industrial);
  const double phi = active_fraction(s);
  EXPECT_GT(phi, 0.0);
  EXPECT_LT(phi, 1.0);
  EXPECT_LE(s.residual_norm, 1e-10);
}

TEST(SolveSaddle, CollapsedPoint) {
  const auto s = solve({0.2, 0.05, 0.5, 0.1});
  EXPECT_EQ(s.branch, Branch::collapsed);
  EXPECT_EQ(s.op.chi, 0.0);
}

TEST(SolveSaddle, WarmStartConverges) {
  const auto a = solve({3.0, 0.65, 0.5, 0.1});
  const auto b = solve_saddle({2.9, 0.65, 0.5, 0.1}, a, rule());
  const auto cold = solve({2.9, 0.65, 0.5, 0.1});
  ASSERT_EQ(b.branch, Branch::industrial);
  EXPECT_LE(b.iterations, cold.iterations);
  EXPECT_NEAR(b.op.Omega, cold.op.Omega, 1e-9);
}

TEST(SolveSaddle, RejectsBadTolerance) {
  SolverOptions o;
  o.tol = 0.0;
  EXPECT_THROW(solve_saddle({1.0, 0.5, 0.5, 0.1}, std::nullopt, rule(), o), DomainError);
}

TEST(SolveSaddle, SaddleIdentitiesHold) {
  for (double n : {0.5, 1.0, 2.0, 4.0}) {
    const EnsembleParams P{n, 0.65, 0.5, 0.1};
    const auto s = solve(P);
    ASSERT_EQ(s.branch, Branch::industrial);
    const auto m = truncated_scale_moments(s.op.p, s.op.sigma, s.op.chi_hat, P.eps);
    EXPECT_NEAR(s.op.kappa, s.op.p * s.op.chi + n * P.eps * m.m1, 1e-9);
    EXPECT_NEAR(s.op.chi * s.op.sigma, n * m.mt, 1e-9 * std::max(1.0, s.op.sigma));
    EXPECT_GE(s.op.Omega, m.m1 * m.m1);
  }
}

TEST(SolveSaddle, CollapsedBranchIndependentOfF) {
  const auto a = solve({1.0, 0.2, 0.2, 0.1});
  const auto b = solve({1.0, 0.2, 0.8, 0.1});
  ASSERT_EQ(a.branch, Branch::collapsed);
  ASSERT_EQ(b.branch, Branch::collapsed);
  EXPECT_NEAR(a.rescaled.Omega, b.rescaled.Omega, 1e-10);
  EXPECT_NEAR(a.rescaled.kappa, b.rescaled.kappa, 1e-10);
  EXPECT_NEAR(a.rescaled.ell, b.rescaled.ell, 1e-10);
  EXPECT_NEAR(a.rescaled.gamma, b.rescaled.gamma, 1e-10);
  EXPECT_NEAR(a.rescaled.delta, b.rescaled.delta, 1e-10);
}

TEST(SolveSaddle, NodeDoublingIsStable) {
  const auto r240 = QuadratureRule::with_fallback(240);
  for (double n : {1.0, 3.0}) {
    const EnsembleParams P{n, 0.65, 0.5, 0.1};
    const auto a = solve(P);
    const auto b = solve_saddle(P, std::nullopt, r240);
    EXPECT_NEAR(a.op.Omega, b.op.Omega, 1e-7);
    EXPECT_NEAR(a.op.kappa, b.op.kappa, 1e-7);
    EXPECT_NEAR(a.op.p, b.op.p, 1e-7);
    EXPECT_NEAR(a.op.sigma, b.op.sigma, 1e-7);
    EXPECT_NEAR(a.op.chi, b.op.chi, 1e-7);
    EXPECT_NEAR(a.op.chi_hat, b.op.chi_hat, 1e-7);
  }
}

TEST(RescaledSystem, AgreesWithOriginalVariables) {
  const EnsembleParams P{2.0, 0.65, 0.5, 0.1};
  const auto s = solve(P);
  const auto r = rescale(s.op);
  const auto back = unscale(r, s.op.chi);
  EXPECT_NEAR(back.p, s.op.p, 1e-12);
  EXPECT_NEAR(back.sigma, s.op.sigma, 1e-12);
  EXPECT_NEAR(back.chi_hat, s.op.chi_hat, 1e-12);
  for (double v : rescaled_residual(r, s.op.chi, P, rule())) EXPECT_LT(std::abs(v), 1e-9);
}

TEST(Sweep, EmptyGrid) { EXPECT_TRUE(sweep({}, rule()).empty()); }

TEST(Sweep, SingleInteriorMaximumNearTwo) {
  std::vector<EnsembleParams> grid;
  for (int k = 0; k <= 30; ++k) grid.push_back({0.5 + 0.25 * k, 0.65, 0.5, 0.1});
  const auto sols = sweep(grid, rule());
  ASSERT_EQ(sols.size(), grid.size());
  std::vector<double> s;
  for (const auto& x : sols) {
    ASSERT_EQ(x.branch, Branch::industrial);
    s.push_back(scale_moments(x.rescaled, 0.1).m1);
  }
  const auto peak = std::max_element(s.begin(), s.end()) - s.begin();
  EXPECT_GT(peak, 0);
  EXPECT_LT(peak, static_cast<long>(s.size()) - 1);
  EXPECT_NEAR(grid[peak].n, 2.0, 0.5);
  for (long k = 1; k <= peak; ++k) EXPECT_GT(s[k], s[k - 1]);
  for (long k = peak + 1; k < static_cast<long>(s.size()); ++k) EXPECT_LT(s[k], s[k - 1]);
}

TEST(Sweep, BranchSwitchesOnceAcrossTransition) {
  std::vector<EnsembleParams> grid;
  for (double pi = 0.6; pi > 0.05; pi -= 0.05) grid.push_back({1.0, pi, 0.5, 0.1});
  const auto sols = sweep(grid, rule());
  int switches = 0;
  for (std::size_t k = 1; k < sols.size(); ++k) {
    ASSERT_NE(sols[k].branch, Branch::failed);
    switches += sols[k].branch != sols[k - 1].branch;
  }
  EXPECT_EQ(switches, 1);
  EXPECT_EQ(sols.front().branch, Branch::industrial);
  EXPECT_EQ(sols.back().branch, Branch::collapsed);
}

TEST(IndustrialEndpoint, ChiReachesFloor) {
  const auto start = solve({1.0, 0.5, 0.5, 0.1});
  const auto end = industrial_endpoint(start, SweepVar::pi, rule());
  EXPECT_EQ(end.branch, Branch::industrial);
  EXPECT_NEAR(end.op.chi, kIndustrialChiFloor, 1e-12);
  EXPECT_GT(end.params.pi, 0.3);
  EXPECT_LT(end.params.pi, 0.36);
}

TEST(SolveSaddle, AllGoodsEndowedAndFinalIsIdle) {
  const auto s = solve({2.5, 1.0, 1.0, 0.1});
  EXPECT_EQ(s.branch, Branch::collapsed);
  const auto o = compute_observables(s, rule());
  EXPECT_EQ(o.s_mean, 0.0);
  EXPECT_EQ(o.XC, 1.0);
  EXPECT_EQ(o.u_mean, 0.0);
  // An economy next to the corner still produces.
  EXPECT_EQ(solve({2.5, 1.0, 0.99, 0.1}).branch, Branch::industrial);
}
