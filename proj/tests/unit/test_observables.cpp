#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gestat/errors.hpp"
#include "gestat/observables.hpp"
#include "oracles.hpp"

using namespace gestat;

namespace {

const QuadratureRule& rule() {
  static const QuadratureRule r = QuadratureRule::with_fallback();
  return r;
}

SaddleSolution solve(const EnsembleParams& p) { return solve_saddle(p, std::nullopt, rule()); }

const SaddleSolution& left_endpoint() {
  // Industrial branch at (pi=0.65, f=0.75, eps=0.1) followed down in n.
  static const SaddleSolution s =
      industrial_endpoint(solve({1.0, 0.65, 0.75, 0.1}), SweepVar::n, rule());
  return s;
}

SaddleSolution synthetic(double kappa, double Omega, double chi) {
  SaddleSolution s;
  s.params = {1.0, 0.5, 0.5, 0.1};
  s.branch = Branch::industrial;
  s.op = {Omega, kappa, 0.8, 0.6, chi, 1.2};
  s.rescaled = rescale(s.op);
  return s;
}

}  // namespace

TEST(ActiveFraction, Limits) {
  OrderParams op{0.1, 0.2, 0.0, 1.0, 0.5, 1.0};
  EXPECT_DOUBLE_EQ(active_fraction(op, 0.1), 0.5);
  op.p = 1e4;
  EXPECT_LT(active_fraction(op, 0.1), 1e-100);
  op.p = 1.0;
  const double phi = active_fraction(op, 0.1);
  EXPECT_GT(phi, 0.0);
  EXPECT_LT(phi, 0.5);
}

TEST(ScaleDensity, NormalizationMeanAndOrigin) {
  const auto s = solve({1.0, 0.65, 0.5, 0.1});
  ASSERT_EQ(s.branch, Branch::industrial);
  const double atom = scale_density(s, 0.0).atom_at_zero;
  const double mass = oracle::integrate([&](double x) { return scale_density(s, x).density; }, 0.0, 60.0);
  EXPECT_NEAR(atom + mass, 1.0, 1e-9);
  const double mean = oracle::integrate([&](double x) { return x * scale_density(s, x).density; }, 0.0, 60.0);
  const auto m = truncated_scale_moments(s.op.p, s.op.sigma, s.op.chi_hat, 0.1);
  EXPECT_NEAR(mean, m.m1, 1e-9);
  const double d0 = s.op.chi_hat / (std::sqrt(2 * M_PI) * s.op.sigma) *
                    std::exp(-0.01 * s.op.p * s.op.p / (2 * s.op.sigma * s.op.sigma));
  EXPECT_NEAR(scale_density(s, 1e-300).density, d0, 1e-10 * d0);
  EXPECT_THROW(scale_density(s, -1.0), DomainError);
}

TEST(GoodsDensity, NonFinalAtomAtCoincidence) {
  const auto s = synthetic(1.0, 0.3, 0.2);
  EXPECT_NEAR(goods_density(s, 0.0, 1, 0).atom_at_zero, 0.5, 1e-15);
  EXPECT_NEAR(psi(s, 1), 0.5, 1e-15);
}

TEST(GoodsDensity, NonFinalMeanMatchesClosedForm) {
  const auto s = solve({1.5, 0.65, 0.5, 0.1});
  const auto c = conditional_consumption(s, rule());
  for (int x0 = 0; x0 < 2; ++x0) {
    const double mass = goods_density(s, 0.0, x0, 0).atom_at_zero +
                        oracle::integrate([&](double x) { return goods_density(s, x, x0, 0).density; }, 0, 30);
    EXPECT_NEAR(mass, 1.0, 1e-9);
    const double mean = oracle::integrate([&](double x) { return x * goods_density(s, x, x0, 0).density; }, 0, 30);
    EXPECT_NEAR(mean, x0 ? c.x10 : c.x00, 1e-9);
  }
}

TEST(GoodsDensity, FinalNormalizesWithoutAtom) {
  const auto s = solve({1.5, 0.65, 0.5, 0.1});
  for (int x0 = 0; x0 < 2; ++x0) {
    EXPECT_EQ(goods_density(s, 0.0, x0, 1).atom_at_zero, 0.0);
    const auto dens = [&](double x) { return goods_density(s, x, x0, 1).density; };
    const double mass = oracle::integrate(dens, 0.0, 1.0) + oracle::integrate(dens, 1.0, 40.0);
    EXPECT_NEAR(mass, 1.0, 1e-7);
  }
  EXPECT_THROW(goods_density(s, -0.1, 1, 1), DomainError);
}

TEST(ConditionalConsumption, CollapsedBranch) {
  const auto s = solve({0.5, 0.2, 0.3, 0.1});
  ASSERT_EQ(s.branch, Branch::collapsed);
  const auto c = conditional_consumption(s, rule());
  EXPECT_EQ(c.x11, 1.0);
  EXPECT_EQ(c.x01, 0.0);
  EXPECT_EQ(c.x10, 1.0);
  EXPECT_EQ(c.x00, 0.0);
  const auto o = compute_observables(s, rule());
  EXPECT_NEAR(o.XC, 0.3 * 0.2, 1e-15);
  EXPECT_NEAR(o.XW, 0.7 * 0.2, 1e-15);
  EXPECT_EQ(o.s_mean, 0.0);
  EXPECT_EQ(o.phi, 0.0);
}

TEST(ConditionalConsumption, EndpointTradesPrimaryForNonPrimary) {
  const auto& s = left_endpoint();
  const auto c = conditional_consumption(s, rule());
  EXPECT_LT(c.x11, 1.0);
  EXPECT_GT(c.x01, 0.0);
}

TEST(ConditionalConsumption, FinalMeanMatchesQuadrature) {
  const auto s = solve({1.0, 0.65, 0.5, 0.1});
  const auto c = conditional_consumption(s, rule());
  EXPECT_NEAR(c.x11, oracle::expect([&](double t) { return x_star(t, 1, 1, s.op, 1.0); }), 1e-9);
  EXPECT_NEAR(c.x01, oracle::expect([&](double t) { return x_star(t, 0, 1, s.op, 1.0); }), 1e-9);
}

TEST(Observables, InvariantsAlongSweep) {
  std::vector<EnsembleParams> grid;
  for (double n = 0.5; n <= 6.0; n += 0.5) grid.push_back({n, 0.65, 0.5, 0.1});
  for (const auto& s : sweep(grid, rule())) {
    ASSERT_TRUE(s.ok());
    const auto o = compute_observables(s, rule());
    const auto& P = s.params;
    EXPECT_NEAR(o.XC, P.f * (P.pi * o.x11 + (1 - P.pi) * o.x01), 1e-12);
    EXPECT_NEAR(o.XW, (1 - P.f) * (P.pi * o.x10 + (1 - P.pi) * o.x00), 1e-12);
    EXPECT_NEAR(o.x_mean, o.XC + o.XW, 1e-9);
    EXPECT_NEAR(o.x_mean, P.pi - P.n * P.eps * o.s_mean, 1e-6);
    EXPECT_GE(o.phi, 0.0);
    EXPECT_LE(o.phi, 1.0);
    EXPECT_GE(o.psi0, 0.0);
    EXPECT_LE(o.psi1, 1.0);
  }
}

TEST(Observables, FailedBranchIsNaN) {
  SaddleSolution s;
  s.params = {1.0, 0.5, 0.5, 0.1};
  s.branch = Branch::failed;
  const auto o = compute_observables(s, rule());
  EXPECT_TRUE(std::isnan(o.s_mean));
  EXPECT_TRUE(std::isnan(o.XC));
  const auto r = make_record(s, rule());
  EXPECT_EQ(r.branch, Branch::failed);
}

TEST(Jump, DecompositionAtEndpoint) {
  const auto& s = left_endpoint();
  const auto j = jump_decomposition(s, rule());
  EXPECT_GE(j.dX, 0.0);
  EXPECT_NEAR(j.dX, j.dXC + j.dXW, 1e-6);
  const auto m = scale_moments(s.rescaled, s.params.eps);
  EXPECT_NEAR(j.dX, s.params.n * s.params.eps * m.m1, 1e-9);
  EXPECT_NEAR(s.params.n, 0.4234, 1e-3);
}

TEST(Jump, VanishesAsEpsilonShrinks) {
  const auto start = solve({1.0, 0.65, 0.75, 0.002});
  ASSERT_EQ(start.branch, Branch::industrial);
  const auto end = industrial_endpoint(start, SweepVar::n, rule());
  const auto j = jump_decomposition(end, rule());
  const auto wide = jump_decomposition(left_endpoint(), rule());
  EXPECT_LT(j.dX, wide.dX / 3);
  // dXC + dXW = dX, so the two parts cancel up to a vanishing remainder.
  EXPECT_NEAR(j.dXC + j.dXW, j.dX, 1e-9);
}

TEST(Jump, RequiresIndustrialSolution) {
  EXPECT_THROW(jump_decomposition(solve({0.5, 0.2, 0.3, 0.1}), rule()), DomainError);
}

TEST(Psi, JumpConcentratedOnNonPrimaryGoods) {
  const auto& s = left_endpoint();
  // Collapsed side: psi0 = 1, psi1 = 0.
  const double d0 = std::abs(1.0 - psi(s, 0));
  const double d1 = std::abs(0.0 - psi(s, 1));
  EXPECT_GT(d0, d1);
  EXPECT_GT(d0, 0.1);
}

TEST(Utility, CollapsedSentinels) {
  const auto full = solve({0.3, 1.0, 0.5, 0.1});
  if (full.branch == Branch::collapsed) EXPECT_EQ(utility_per_final_good(full, rule()), 0.0);
  const auto low = solve({0.5, 0.2, 0.5, 0.1});
  ASSERT_EQ(low.branch, Branch::collapsed);
  EXPECT_EQ(utility_per_final_good(low, rule()), -std::numeric_limits<double>::infinity());
}

TEST(Utility, MatchesQuadrature) {
  const auto s = solve({2.0, 0.65, 0.75, 0.1});
  const double u = 0.65 * oracle::expect([&](double t) { return std::log(x_star(t, 1, 1, s.op, 2.0)); }) +
                   0.35 * oracle::expect([&](double t) { return std::log(x_star(t, 0, 1, s.op, 2.0)); });
  EXPECT_NEAR(utility_per_final_good(s, rule()), u, 1e-8);
}

TEST(Utility, NondecreasingAlongIndustrialSweep) {
  std::vector<EnsembleParams> grid;
  for (double n = 0.45; n <= 6.0; n += 0.15) grid.push_back({n, 0.65, 0.75, 0.1});
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& s : sweep(grid, rule())) {
    ASSERT_EQ(s.branch, Branch::industrial);
    const double u = utility_per_final_good(s, rule());
    EXPECT_GE(u, prev - 1e-12);
    prev = u;
  }
}

TEST(PeakSharpening, SmallerEpsilonHasHigherPeak) {
  std::vector<EnsembleParams> a, b;
  for (double n = 1.0; n <= 3.0; n += 0.1) {
    a.push_back({n, 0.65, 0.5, 0.1});
    b.push_back({n, 0.65, 0.5, 0.01});
  }
  const auto sa = sweep(a, rule());
  const auto sb = sweep(b, rule());
  double peak_a = 0, peak_b = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double ma = scale_moments(sa[k].rescaled, 0.1).m1;
    const double mb = scale_moments(sb[k].rescaled, 0.01).m1;
    peak_a = std::max(peak_a, ma);
    peak_b = std::max(peak_b, mb);
    if (std::abs(a[k].n - 2.0) < 0.15) EXPECT_GT(mb, ma);
  }
  EXPECT_GT(peak_b, peak_a);
}

TEST(PhaseRecord, CarriesObservables) {
  const auto s = solve({1.0, 0.65, 0.5, 0.1});
  const auto r = make_record(s, rule());
  EXPECT_EQ(r.branch, Branch::industrial);
  EXPECT_EQ(r.params.n, 1.0);
  EXPECT_NEAR(r.obs.s_mean, 0.38768, 1e-5);
  EXPECT_NEAR(r.obs.phi, 0.45964, 1e-5);
}
