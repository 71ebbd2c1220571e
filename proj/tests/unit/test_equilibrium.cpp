#include <gtest/gtest.h>

#include <cmath>

#include "gestat/equilibrium.hpp"
#include "gestat/finite_lab.hpp"

using namespace gestat;

namespace {

EconomyInstance toy(const Eigen::MatrixXd& q, const Eigen::VectorXd& x0, const Eigen::VectorXd& k) {
  EconomyInstance e;
  e.N = static_cast<int>(q.rows());
  e.C = static_cast<int>(q.cols());
  e.eps = -q.row(0).sum();
  e.q = q;
  e.x0 = x0;
  e.k = k;
  return e;
}

}  // namespace

TEST(Equilibrium, EmptyUtility) {
  auto e = sample_economy({1.0, 0.6, 0.5, 0.1}, 20, 4);
  e.k.setZero();
  const auto s = solve_equilibrium(e);
  EXPECT_TRUE(s.ok());
  EXPECT_EQ(s.objective, 0.0);
  EXPECT_EQ(s.s_star.norm(), 0.0);
}

TEST(Equilibrium, ClosedConeGivesOrigin) {
  // Goods: primary, two final, one intermediate consumed by both technologies.
  Eigen::MatrixXd q(2, 4);
  q << -0.5, 0.6, 0.0, -0.2,
       -0.5, 0.0, 0.6, -0.2;
  const auto e = toy(q, Eigen::Vector4d(1, 0, 0, 0), Eigen::Vector4d(0, 1, 1, 0));
  const auto s = solve_equilibrium(e);
  EXPECT_EQ(s.s_star.norm(), 0.0);
  EXPECT_EQ(s.status, EquilibriumStatus::infeasible);
}

TEST(Equilibrium, MatchesConicSolverOnStoredInstance) {
  // Optimum of the same instance from an external conic solver.
  const auto e = load_economy(GESTAT_TEST_DATA "/economy_n3_seed1000.txt");
  const auto s = solve_equilibrium(e);
  ASSERT_TRUE(s.ok());
  EXPECT_NEAR(s.s_star.mean(), 0.22588678285229052, 1e-6);
  EXPECT_NEAR(s.objective, -0.7041315554510071, 1e-6);
}

TEST(Equilibrium, WalrasLaw) {
  const auto e = sample_economy({3.0, 0.65, 0.5, 0.1}, 33, 12);
  ASSERT_EQ(e.N, 99);
  const auto s = solve_equilibrium(e);
  ASSERT_TRUE(s.ok());
  EXPECT_NEAR(s.duals.dot(s.x_star), s.duals.dot(e.x0), 1e-6);
}

TEST(Equilibrium, CertificatesOnRandomInstances) {
  for (double n : {0.5, 1.0, 2.0, 4.0}) {
    const int C = static_cast<int>(std::lround(100 / n));
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto e = sample_economy({100.0 / C, 0.65, 0.5, 0.1}, C, seed);
      const auto s = solve_equilibrium(e);
      ASSERT_TRUE(s.ok()) << s.message;
      const double pn = s.duals.lpNorm<Eigen::Infinity>();
      const Eigen::VectorXd profit = e.q * s.duals;
      std::vector<char> active(e.N, 0);
      for (int i : s.active_set) active[i] = 1;
      for (int i = 0; i < e.N; ++i) {
        if (active[i]) EXPECT_LE(std::abs(profit(i)), 1e-6 * pn);
        EXPECT_LE(profit(i), 1e-6 * pn);
        EXPECT_GE(s.s_star(i), 0.0);
      }
      for (int c = 0; c < e.C; ++c) {
        EXPECT_NEAR(s.x_star(c), e.x0(c) + e.q.col(c).dot(s.s_star), 1e-8);
        EXPECT_GE(s.x_star(c), -1e-8);
        EXPECT_GE(s.duals(c), 0.0);
        if (e.k(c) > 0) EXPECT_NEAR(s.duals(c), 1.0 / s.x_star(c), 1e-12 / s.x_star(c));
        if (e.k(c) == 0 && s.x_star(c) > 1e-6) EXPECT_LE(s.duals(c), 1e-6 * pn);
      }
      EXPECT_LE(static_cast<int>(s.active_set.size()), e.C);
      EXPECT_LE(s.s_star.sum(), e.primary_count() / e.eps + 1e-6);
      EXPECT_LE(s.kkt_residual, 1e-6);
    }
  }
}

TEST(Equilibrium, CertifyFlagsWrongPrices) {
  const auto e = sample_economy({1.0, 0.65, 0.5, 0.1}, 40, 3);
  const auto s = solve_equilibrium(e);
  ASSERT_TRUE(s.ok());
  Eigen::VectorXd p = s.duals;
  p(0) += 0.3;
  EXPECT_GT(certify(e, s.s_star, p, s.active_set).max_residual(), 1e-3);
  EXPECT_LE(certify(e, s.s_star, s.duals, s.active_set).max_residual(), 1e-6);
}

TEST(Equilibrium, ActiveSetUsesRelativeThreshold) {
  const auto e = sample_economy({1.0, 0.65, 0.5, 0.1}, 50, 8);
  const auto s = solve_equilibrium(e);
  const double cut = 1e-6 * std::max(1.0, s.s_star.mean());
  int count = 0;
  for (int i = 0; i < e.N; ++i) count += s.s_star(i) > cut;
  EXPECT_EQ(count, static_cast<int>(s.active_set.size()));
}

TEST(Equilibrium, DegenerateInstancesNearTransition) {
  // Instances where some technology sits at s = 0 with zero profit, or the
  // interior-point iterate has more than C scales above the cut.
  struct Case {
    EnsembleParams p;
    int C;
    std::uint64_t seed;
  };
  const Case cases[] = {{{100.0 / 33, 0.65, 0.5, 0.1}, 33, 4025}, {{4.0, 0.65, 0.5, 0.1}, 25, 5089},
                        {{5.0, 0.65, 0.5, 0.1}, 20, 6073},       {{0.5, 0.65, 0.5, 0.1}, 200, 50008},
                        {{1.0, 0.4, 0.5, 0.01}, 100, 50022},     {{1.0, 0.4, 0.5, 0.1}, 100, 50032}};
  for (const auto& c : cases) {
    const auto e = sample_economy(c.p, c.C, c.seed);
    const auto s = solve_equilibrium(e);
    EXPECT_TRUE(s.ok()) << "seed " << c.seed << ": " << s.message;
    EXPECT_TRUE(s.polished) << "seed " << c.seed;
    EXPECT_LE(s.kkt_residual, 1e-9) << "seed " << c.seed;
    EXPECT_LE(static_cast<int>(s.active_set.size()), e.C);
  }
}
