#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <vector>

#include "gestat/errors.hpp"
#include "gestat/finite_lab.hpp"

using namespace gestat;

TEST(SampleStat, SkipsNaNAndHandlesConstants) {
  const std::vector<double> v{2.0, 2.0, std::nan(""), 2.0};
  const auto s = sample_stat(v);
  EXPECT_EQ(s.count, 3);
  EXPECT_EQ(s.mean, 2.0);
  EXPECT_EQ(s.sem, 0.0);
  const std::vector<double> w{1.0, 3.0};
  EXPECT_NEAR(sample_stat(w).sem, 1.0, 1e-15);
}

TEST(MonteCarlo, RepeatedSeedHasNoSpread) {
  const std::vector<std::uint64_t> seeds(4, 77);
  const auto r = monte_carlo_observables({1.0, 0.65, 0.5, 0.1}, 30, seeds, 1);
  EXPECT_EQ(r.solved, 4);
  EXPECT_EQ(r.s_mean.sem, 0.0);
  EXPECT_EQ(r.phi.sem, 0.0);
}

TEST(MonteCarlo, NeedsTwoSeeds) {
  const std::vector<std::uint64_t> one{1};
  EXPECT_THROW(monte_carlo_observables({1.0, 0.65, 0.5, 0.1}, 30, one, 1), DomainError);
}

TEST(MonteCarlo, IdentityHoldsPerInstance) {
  const auto r = monte_carlo_observables({2.0, 0.65, 0.5, 0.1}, 25, 6, 500, 1);
  EXPECT_EQ(r.solved, 6);
  EXPECT_LT(r.max_identity_error, 1e-8);
  for (const auto& o : r.per_instance) {
    EXPECT_NEAR(o.x_mean, o.XC + o.XW, 1e-12);
    EXPECT_GE(o.phi, 0.0);
    EXPECT_LE(o.phi * r.N, r.C + 1e-9);
  }
}

TEST(MonteCarlo, WorkerCountDoesNotChangeResults) {
  const EnsembleParams p{1.5, 0.6, 0.5, 0.1};
  const auto a = monte_carlo_observables(p, 20, 5, 9, 1);
  const auto b = monte_carlo_observables(p, 20, 5, 9, 3);
  ASSERT_EQ(a.per_instance.size(), b.per_instance.size());
  for (std::size_t i = 0; i < a.per_instance.size(); ++i) {
    EXPECT_EQ(a.per_instance[i].seed, b.per_instance[i].seed);
    EXPECT_EQ(a.per_instance[i].s_mean, b.per_instance[i].s_mean);
  }
  EXPECT_EQ(a.s_mean.mean, b.s_mean.mean);
}

TEST(Feasibility, Extremes) {
  EXPECT_EQ(lp_feasibility_fraction({1.0, 1.0, 0.5, 0.1}, 40, 10, 1, 1).fraction, 1.0);
  EXPECT_EQ(lp_feasibility_fraction({1.0, 0.05, 0.5, 0.1}, 60, 10, 1, 1).fraction, 0.0);
}

TEST(Feasibility, FractionGrowsWithPrimaryDensity) {
  const EnsembleParams lo{1.0, 0.25, 0.5, 0.1}, hi{1.0, 0.45, 0.5, 0.1};
  EXPECT_LT(lp_feasibility_fraction(lo, 60, 30, 3, 1).fraction,
            lp_feasibility_fraction(hi, 60, 30, 3, 1).fraction);
}

TEST(Geometry, RankOneSamplesSaturate) {
  std::mt19937_64 eng(4);
  std::normal_distribution<double> g;
  Eigen::VectorXd dir(12);
  for (int j = 0; j < 12; ++j) dir(j) = 1.0 + 0.1 * j;
  Eigen::MatrixXd s(40, 12);
  for (int r = 0; r < 40; ++r) s.row(r) = g(eng) * dir.transpose();
  const auto m = correlation_matrix(s);
  EXPECT_NEAR(power_iteration_max(m), 12.0, 1e-9);
}

TEST(Geometry, ConstantColumnsGetUnitDiagonal) {
  Eigen::MatrixXd s(5, 3);
  s << 1, 0, 2, 2, 0, 1, 3, 0, 5, 4, 0, 2, 5, 0, 0;
  const auto m = correlation_matrix(s);
  EXPECT_EQ(m(1, 1), 1.0);
  EXPECT_EQ(m(0, 1), 0.0);
  EXPECT_NEAR(m(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(m(0, 2), m(2, 0), 1e-15);
}

TEST(Geometry, PowerIterationMatchesEigen) {
  std::mt19937_64 eng(8);
  std::normal_distribution<double> g;
  Eigen::MatrixXd s(200, 30);
  for (int r = 0; r < 200; ++r)
    for (int c = 0; c < 30; ++c) s(r, c) = g(eng) + (c < 5 ? 0.7 * s(r, 0) : 0.0);
  const auto m = correlation_matrix(s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  EXPECT_NEAR(power_iteration_max(m), es.eigenvalues().maxCoeff(), 1e-8);
}

TEST(Geometry, IndependentSamplesAreIsotropic) {
  std::mt19937_64 eng(5);
  std::normal_distribution<double> g;
  Eigen::MatrixXd s(1000, 40);
  for (int r = 0; r < 1000; ++r)
    for (int c = 0; c < 40; ++c) s(r, c) = g(eng);
  // Marchenko-Pastur edge (1 + sqrt(40/1000))^2 = 1.44.
  EXPECT_LT(power_iteration_max(correlation_matrix(s)) / 40.0, 0.05);
}

TEST(Geometry, VertexIsFeasible) {
  const auto e = sample_economy({1.0, 0.7, 0.5, 0.1}, 50, 2);
  std::mt19937_64 eng(1);
  std::normal_distribution<double> g;
  Eigen::VectorXd w(e.N);
  for (int i = 0; i < e.N; ++i) w(i) = std::abs(g(eng));
  const auto s = sample_vertex(e.q, e.x0, e.eps, w);
  EXPECT_GE(s.minCoeff(), 0.0);
  EXPECT_LE(s.sum(), e.primary_count() / e.eps + 1e-9);
  const Eigen::VectorXd x = e.x0 + e.q.transpose() * s;
  EXPECT_GE(x.minCoeff(), -1e-9);
  EXPECT_GT(s.sum(), 0.0);
}

TEST(Geometry, CollapsedProbeReportsNaN) {
  const auto r = pca_probe({1.0, 0.0, 0.5, 0.01}, 30, 2, 5, 1, 1);
  EXPECT_TRUE(r.collapsed);
  EXPECT_TRUE(std::isnan(r.lambda_max_over_N));
}

TEST(Geometry, ProbeIsBounded) {
  const auto r = pca_probe({1.0, 0.8, 0.5, 0.01}, 30, 2, 25, 1, 1);
  EXPECT_FALSE(r.collapsed);
  EXPECT_GE(r.lambda_max_over_N, 1.0 / r.N - 1e-12);
  EXPECT_LE(r.lambda_max_over_N, 1.0 + 1e-12);
}
