#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gestat/critical_line.hpp"
#include "gestat/errors.hpp"
#include "gestat/finite_lab.hpp"
#include "gestat/observables.hpp"
#include "gestat/parallel.hpp"
#include "gestat/replica_solver.hpp"
#include "gestat/version.hpp"
#include "run_config.hpp"

namespace gestat::cli {

namespace {

bool is_param_var(const std::string& v) { return v == "n" || v == "pi" || v == "f" || v == "eps"; }

void set_param(EnsembleParams& p, const std::string& var, double v) {
  if (var == "n") p.n = v;
  else if (var == "pi") p.pi = v;
  else if (var == "f") p.f = v;
  else if (var == "eps") p.eps = v;
}

std::vector<EnsembleParams> param_grid(const RunConfig& cfg) {
  std::vector<EnsembleParams> grid;
  for (double v : grid_values(cfg)) {
    EnsembleParams p = cfg.params;
    if (cfg.var == "i") {
      p = intermediate_sweep_map(cfg.fixed.at("f-over-n"), cfg.fixed.at("pi-over-n"), v, cfg.params.eps);
    } else {
      set_param(p, cfg.var, v);
    }
    grid.push_back(p);
  }
  return grid;
}

// C from --N when given; n is then snapped to N / C.
int finite_C(const RunConfig& cfg, EnsembleParams& p) {
  if (cfg.N <= 0) return cfg.C;
  const int C = std::max(2, static_cast<int>(std::lround(cfg.N / p.n)));
  p.n = static_cast<double>(cfg.N) / C;
  return C;
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

void validate_config(const RunConfig& cfg) {
  static const std::vector<std::string> subs{"saddle", "sweep", "critical-line", "finite",
                                             "lp-fraction", "pca-probe", "validate"};
  if (std::find(subs.begin(), subs.end(), cfg.subcommand) == subs.end()) {
    throw ConfigError("unknown subcommand '" + cfg.subcommand + "'");
  }
  try {
    cfg.params.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (cfg.points < 1) throw ConfigError("--points must be at least 1");
  if (!(cfg.tol > 0.0)) throw ConfigError("--tol must be positive");
  if (!std::isfinite(cfg.from) || !std::isfinite(cfg.to)) throw ConfigError("grid bounds must be finite");
  if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("--format must be csv or json");
  if (cfg.nodes < 2) throw ConfigError("--nodes must be at least 2");
  const bool grid_cmd = cfg.subcommand == "sweep" || cfg.subcommand == "critical-line" ||
                        cfg.subcommand == "finite" || cfg.subcommand == "lp-fraction" ||
                        cfg.subcommand == "pca-probe";
  if (!grid_cmd) return;
  if (cfg.subcommand == "critical-line") {
    if (!(cfg.from > 0.0 && cfg.to > 0.0)) throw ConfigError("critical-line grid is over n > 0");
    return;
  }
  if (cfg.var == "i") {
    if (cfg.subcommand != "sweep") throw ConfigError("--var i is only available for sweep");
    if (!cfg.fixed.count("f-over-n") || !cfg.fixed.count("pi-over-n")) {
      throw ConfigError("--var i needs --fix f-over-n=... and --fix pi-over-n=...");
    }
    if (!(cfg.from >= 0.0 && cfg.to < 1.0 && cfg.to >= 0.0 && cfg.from < 1.0)) {
      throw ConfigError("intermediate fraction grid must lie in [0, 1)");
    }
    return;
  }
  if (!is_param_var(cfg.var)) throw ConfigError("--var must be one of n, pi, f, eps, i");
  if (cfg.points > 1 || cfg.from != 0.0 || cfg.to != 0.0) {
    for (double v : {cfg.from, cfg.to}) {
      EnsembleParams p = cfg.params;
      set_param(p, cfg.var, v);
      try {
        p.validate();
      } catch (const std::exception& e) {
        throw ConfigError(std::string("grid bound: ") + e.what());
      }
    }
  }
  if (cfg.subcommand == "finite" && cfg.instances < 2) throw ConfigError("--instances must be at least 2");
  if (cfg.subcommand == "lp-fraction" && cfg.trials < 1) throw ConfigError("--trials must be positive");
  if (cfg.subcommand == "pca-probe" && (cfg.tech_draws < 2 || cfg.objective_draws < 2)) {
    throw ConfigError("--tech-draws and --objective-draws must be at least 2");
  }
  if (cfg.C < 2) throw ConfigError("--C must be at least 2");
}

std::vector<double> grid_values(const RunConfig& cfg) {
  // A grid command without bounds runs at the fixed parameter value.
  if (cfg.points == 1 && cfg.from == 0.0 && cfg.to == 0.0 && cfg.var != "i") {
    EnsembleParams p = cfg.params;
    if (cfg.var == "n") return {p.n};
    if (cfg.var == "pi") return {p.pi};
    if (cfg.var == "f") return {p.f};
    if (cfg.var == "eps") return {p.eps};
  }
  std::vector<double> v;
  for (int k = 0; k < cfg.points; ++k) {
    v.push_back(cfg.points == 1 ? cfg.from : cfg.from + (cfg.to - cfg.from) * k / (cfg.points - 1));
  }
  return v;
}

Metadata config_metadata(const RunConfig& cfg) {
  auto s = [](double v) { return format_number(v); };
  Metadata m{{"subcommand", cfg.subcommand}, {"n", s(cfg.params.n)},     {"pi", s(cfg.params.pi)},
             {"f", s(cfg.params.f)},         {"eps", s(cfg.params.eps)}, {"var", cfg.var},
             {"from", s(cfg.from)},          {"to", s(cfg.to)},          {"points", std::to_string(cfg.points)}};
  for (const auto& [k, v] : cfg.fixed) m.emplace_back("fix." + k, s(v));
  m.emplace_back("C", std::to_string(cfg.C));
  m.emplace_back("N", std::to_string(cfg.N));
  m.emplace_back("instances", std::to_string(cfg.instances));
  m.emplace_back("trials", std::to_string(cfg.trials));
  m.emplace_back("tech-draws", std::to_string(cfg.tech_draws));
  m.emplace_back("objective-draws", std::to_string(cfg.objective_draws));
  m.emplace_back("seed", std::to_string(cfg.seed));
  m.emplace_back("tol", s(cfg.tol));
  m.emplace_back("nodes", std::to_string(cfg.nodes));
  m.emplace_back("timestamp", timestamp());
  return m;
}

int run(const RunConfig& cfg) {
  try {
    validate_config(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "gestat: " << e.what() << '\n';
    return 2;
  }
  if (cfg.subcommand == "validate") return run_validation(cfg);

  const QuadratureRule rule = QuadratureRule::with_fallback(cfg.nodes);
  SolverOptions opts;
  opts.tol = cfg.tol;
  const int workers = cfg.workers > 0 ? cfg.workers : default_worker_count();
  Table table;
  bool partial = false;

  try {
    if (cfg.subcommand == "saddle" || cfg.subcommand == "sweep") {
      const auto grid = cfg.subcommand == "saddle" ? std::vector<EnsembleParams>{cfg.params} : param_grid(cfg);
      const auto sols = sweep(grid, rule, opts);
      for (const auto& s : sols) partial |= !s.ok();
      if (cfg.order_params || cfg.subcommand == "saddle") {
        table = saddle_table(sols);
      } else {
        std::vector<PhasePointRecord> recs;
        for (const auto& s : sols) recs.push_back(make_record(s, rule));
        table = phase_table(recs);
      }
    } else if (cfg.subcommand == "critical-line") {
      const auto pts = critical_line_sweep(grid_values(cfg), cfg.params.eps, std::min(cfg.tol, 1e-12));
      for (const auto& p : pts) partial |= !p.ok;
      table = critical_table(pts);
    } else if (cfg.subcommand == "finite") {
      std::vector<MonteCarloResult> rows;
      for (EnsembleParams p : param_grid(cfg)) {
        const int C = finite_C(cfg, p);
        rows.push_back(monte_carlo_observables(p, C, cfg.instances, cfg.seed, workers));
        partial |= rows.back().failed > rows.back().infeasible;
        if (!cfg.dump_dir.empty()) {
          std::filesystem::create_directories(cfg.dump_dir);
          for (int i = 0; i < cfg.instances; ++i) {
            std::ostringstream name;
            name << cfg.dump_dir << "/economy_n" << format_number(p.n) << "_pi" << format_number(p.pi)
                 << "_seed" << cfg.seed + i << ".txt";
            save_economy(name.str(), sample_economy(p, C, cfg.seed + i));
          }
        }
      }
      table = monte_carlo_table(rows);
    } else if (cfg.subcommand == "lp-fraction") {
      std::vector<FeasibilityRecord> rows;
      for (EnsembleParams p : param_grid(cfg)) {
        const int C = finite_C(cfg, p);
        rows.push_back(lp_feasibility_fraction(p, C, cfg.trials, cfg.seed, workers));
        partial |= rows.back().solver_failures > 0;
      }
      table = feasibility_table(rows);
    } else if (cfg.subcommand == "pca-probe") {
      std::vector<GeometryRecord> rows;
      for (EnsembleParams p : param_grid(cfg)) {
        const int C = finite_C(cfg, p);
        rows.push_back(pca_probe(p, C, cfg.tech_draws, cfg.objective_draws, cfg.seed, workers));
      }
      table = geometry_table(rows);
    }
  } catch (const DomainError& e) {
    std::cerr << "gestat: " << e.what() << '\n';
    return 2;
  }

  const Metadata meta = config_metadata(cfg);
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!cfg.output.empty() && cfg.output != "-") {
    file.open(cfg.output);
    if (!file) {
      std::cerr << "gestat: cannot open " << cfg.output << " for writing\n";
      return 2;
    }
    os = &file;
  }
  if (cfg.format == "json") {
    write_json(*os, meta, table);
  } else {
    write_csv(*os, meta, table);
  }
  os->flush();
  if (!*os) {
    std::cerr << "gestat: write failed\n";
    return 2;
  }
  return partial ? 1 : 0;
}

}  // namespace gestat::cli
