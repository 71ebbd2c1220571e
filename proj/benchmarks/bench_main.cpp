#include <benchmark/benchmark.h>

#include <optional>

#include "gestat/critical_line.hpp"
#include "gestat/equilibrium.hpp"
#include "gestat/finite_lab.hpp"
#include "gestat/replica_solver.hpp"
#include "gestat/simplex.hpp"

using namespace gestat;

namespace {

const QuadratureRule& rule() {
  static const QuadratureRule r = QuadratureRule::with_fallback();
  return r;
}

void BM_GaussMoments(benchmark::State& st) {
  double x = -6.0, acc = 0.0;
  for (auto _ : st) {
    acc += gauss_moment_I(0, x) + gauss_moment_I(1, x) + gauss_moment_I(2, x);
    x = x > 6.0 ? -6.0 : x + 0.013;
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_GaussMoments);

void BM_MomentsM(benchmark::State& st) {
  const EnsembleParams P{2.0, 0.65, 0.5, 0.1};
  const OrderParams op{0.4, 0.3, 1.0, 1.0, 0.05, 1.0};
  for (auto _ : st) benchmark::DoNotOptimize(moments_M(op, P, rule()));
}
BENCHMARK(BM_MomentsM);

void BM_SaddleColdStart(benchmark::State& st) {
  const EnsembleParams P{st.range(0) / 10.0, 0.65, 0.5, 0.1};
  for (auto _ : st) benchmark::DoNotOptimize(solve_saddle(P, std::nullopt, rule()));
}
BENCHMARK(BM_SaddleColdStart)->Arg(5)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_SweepN(benchmark::State& st) {
  std::vector<EnsembleParams> grid;
  for (int k = 0; k <= 100; ++k) grid.push_back({0.5 + 0.045 * k, 0.65, 0.5, 0.1});
  for (auto _ : st) benchmark::DoNotOptimize(sweep(grid, rule()));
}
BENCHMARK(BM_SweepN)->Unit(benchmark::kMillisecond);

void BM_CriticalPi(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(solve_critical_pi(1.0, 0.1));
}
BENCHMARK(BM_CriticalPi)->Unit(benchmark::kMillisecond);

void BM_HomogeneousLp(benchmark::State& st) {
  const auto e = sample_economy({1.0, 0.4, 0.5, 0.1}, static_cast<int>(st.range(0)), 3);
  for (auto _ : st) benchmark::DoNotOptimize(homogeneous_lp_optimum(e));
}
BENCHMARK(BM_HomogeneousLp)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Equilibrium(benchmark::State& st) {
  const auto e = sample_economy({1.0, 0.65, 0.5, 0.1}, static_cast<int>(st.range(0)), 5);
  for (auto _ : st) benchmark::DoNotOptimize(solve_equilibrium(e));
}
BENCHMARK(BM_Equilibrium)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
