#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "gestat/critical_line.hpp"
#include "gestat/finite_lab.hpp"
#include "gestat/observables.hpp"
#include "gestat/replica_solver.hpp"
#include "run_config.hpp"

namespace gestat::cli {

namespace {

struct Suite {
  int failures = 0;
  void report(bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  }
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

int run_validation(const RunConfig& cfg) {
  Suite suite;
  const QuadratureRule rule = QuadratureRule::with_fallback(cfg.nodes);

  {
    std::mt19937_64 eng(cfg.seed);
    std::uniform_real_distribution<double> u(-8.0, 8.0);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      const double x = u(eng);
      for (int order = 0; order <= 2; ++order) {
        const double quad = gaussian_average_adaptive(
            [&](double t) { return t < -x ? 0.0 : std::pow(t + x, order); }, std::vector<double>{-x}, 1e-14);
        worst = std::max(worst, std::abs(quad - gauss_moment_I(order, x)));
      }
    }
    suite.report(worst < 1e-8, "gaussian moments vs quadrature", fmt("max error %.2e", worst));
  }

  {
    std::vector<EnsembleParams> grid;
    for (double n : {0.5, 1.0, 1.5, 2.0, 3.0, 4.0}) grid.push_back({n, 0.65, 0.5, 0.1});
    const auto sols = sweep(grid, rule);
    double id = 0.0, split = 0.0;
    bool all_ok = true;
    for (const auto& s : sols) {
      all_ok &= s.branch == Branch::industrial;
      if (!s.ok()) continue;
      const auto o = compute_observables(s, rule);
      id = std::max(id, std::abs(o.x_mean - (s.params.pi - s.params.n * s.params.eps * o.s_mean)));
      split = std::max(split, std::abs(o.XC + o.XW - o.x_mean));
    }
    suite.report(all_ok, "industrial saddle points along n", all_ok ? "all converged" : "some failed");
    suite.report(id < 1e-6, "consumption identity", fmt("max deviation %.2e", id));
    suite.report(split < 1e-9, "consumption split", fmt("max deviation %.2e", split));
  }

  {
    const auto line = critical_line_sweep({0.5, 1.0, 2.0}, 0.1);
    bool ok = line.size() == 3 && line[0].ok && line[1].ok && line[2].ok && line[0].pi_c > line[1].pi_c &&
              line[1].pi_c > line[2].pi_c;
    suite.report(ok, "critical line decreasing in n",
                 ok ? fmt("pi_c(1) = %.6f", line[1].pi_c) : std::string("not monotone or failed"));
  }

  {
    double kkt = 0.0, ident = 0.0, bound = 0.0;
    bool card = true, solved = true;
    for (int i = 0; i < 5; ++i) {
      const auto e = sample_economy({1.0, 0.65, 0.5, 0.1}, 100, cfg.seed + i);
      const auto sol = solve_equilibrium(e);
      solved &= sol.ok();
      kkt = std::max(kkt, sol.kkt_residual);
      card &= static_cast<int>(sol.active_set.size()) <= e.C;
      bound = std::max(bound, sol.s_star.sum() - e.primary_count() / e.eps);
      ident = std::max(ident, instance_observables(e, sol).identity_error);
    }
    suite.report(solved && kkt <= 1e-6, "equilibrium KKT certificates", fmt("max residual %.2e", kkt));
    suite.report(card, "active technologies at most C", card ? "holds" : "violated");
    suite.report(bound <= 1e-6, "production bound", fmt("max excess %.2e", bound));
    suite.report(ident <= 1e-6, "finite consumption identity", fmt("max deviation %.2e", ident));
  }

  {
    const auto rec = lp_feasibility_fraction({1.0, 1.0, 0.5, 0.1}, 50, 5, cfg.seed, 1);
    suite.report(rec.fraction == 1.0, "no homogeneous constraints is always feasible",
                 fmt("fraction %.2f", rec.fraction));
  }

  return suite.failures == 0 ? 0 : 1;
}

}  // namespace gestat::cli
