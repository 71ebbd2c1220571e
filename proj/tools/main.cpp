#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "gestat/version.hpp"
#include "run_config.hpp"

namespace {

using gestat::cli::RunConfig;

const std::vector<std::string> kSubcommands{"saddle", "sweep", "critical-line", "finite",
                                            "lp-fraction", "pca-probe", "validate"};

// key=value lines become "--key value" ahead of the real arguments, so the
// command line wins. "subcommand=..." picks the subcommand when none is given.
bool expand_config(std::vector<std::string>& args) {
  auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end()) return true;
  if (it + 1 == args.end()) {
    std::cerr << "gestat: --config needs a path\n";
    return false;
  }
  const std::string path = *(it + 1);
  args.erase(it, it + 2);
  std::ifstream in(path);
  if (!in) {
    std::cerr << "gestat: cannot read config " << path << '\n';
    return false;
  }
  std::string sub;
  std::vector<std::string> injected;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::cerr << "gestat: " << path << ':' << lineno << ": expected key=value\n";
      return false;
    }
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    if (key == "subcommand") {
      sub = value;
    } else if (key == "fix") {
      injected.insert(injected.end(), {"--fix", value});
    } else if (value == "true" || value == "false") {
      if (value == "true") injected.push_back("--" + key);
    } else {
      injected.insert(injected.end(), {"--" + key, value});
    }
  }
  auto pos = std::find_first_of(args.begin(), args.end(), kSubcommands.begin(), kSubcommands.end());
  if (pos == args.end()) {
    if (sub.empty()) {
      std::cerr << "gestat: no subcommand given\n";
      return false;
    }
    args.insert(args.begin(), sub);
    pos = args.begin();
  }
  args.insert(pos + 1, injected.begin(), injected.end());
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (!expand_config(args)) return 2;

  RunConfig cfg;
  CLI::App app{"Replica and finite-size analysis of random input-output economies", "gestat"};
  app.set_version_flag("--version", std::string(gestat::kVersion));
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--config", "key=value file; its entries act as flags placed before the command line");

  std::vector<std::string> fixes;
  auto common = [&](CLI::App* sub, bool grid) {
    sub->add_option("--n", cfg.params.n, "technologies per good, N/C")->capture_default_str();
    sub->add_option("--pi", cfg.params.pi, "fraction of primary goods")->capture_default_str();
    sub->add_option("--f", cfg.params.f, "fraction of final goods")->capture_default_str();
    sub->add_option("--eps", cfg.params.eps, "technology inefficiency")->capture_default_str();
    sub->add_option("--tol", cfg.tol, "solver tolerance")->capture_default_str();
    sub->add_option("--nodes", cfg.nodes, "Gauss-Hermite nodes")->capture_default_str();
    sub->add_option("--output,-o", cfg.output, "output file, stdout if omitted");
    sub->add_option("--format", cfg.format, "csv or json")->capture_default_str();
    sub->add_option("--workers", cfg.workers, "worker threads (default: GESTAT_WORKERS or all cores)");
    if (grid) {
      sub->add_option("--var", cfg.var, "swept variable: n, pi, f, eps or i")->capture_default_str();
      sub->add_option("--from", cfg.from, "grid start");
      sub->add_option("--to", cfg.to, "grid end");
      sub->add_option("--points", cfg.points, "grid points")->capture_default_str();
    }
  };
  auto finite_opts = [&](CLI::App* sub) {
    sub->add_option("--C", cfg.C, "number of goods")->capture_default_str();
    sub->add_option("--N", cfg.N, "number of technologies; sets C = round(N/n)");
    sub->add_option("--seed", cfg.seed, "base seed")->capture_default_str();
  };

  auto* saddle = app.add_subcommand("saddle", "solve the saddle point at one parameter point");
  common(saddle, false);
  auto* sweep = app.add_subcommand("sweep", "continuation sweep of the saddle point with observables");
  common(sweep, true);
  sweep->add_option("--fix", fixes, "f-over-n=VALUE or pi-over-n=VALUE for --var i");
  sweep->add_flag("--order-params", cfg.order_params, "emit order parameters instead of observables");
  sweep->get_option("--fix")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  auto* crit = app.add_subcommand("critical-line", "pi_c(n) on an n grid");
  common(crit, true);
  auto* finite = app.add_subcommand("finite", "Monte Carlo equilibria of sampled economies");
  common(finite, true);
  finite_opts(finite);
  finite->add_option("--instances", cfg.instances, "economies per grid point")->capture_default_str();
  finite->add_option("--dump", cfg.dump_dir, "directory for economy files");
  auto* lp = app.add_subcommand("lp-fraction", "fraction of feasible homogeneous LPs");
  common(lp, true);
  finite_opts(lp);
  lp->add_option("--trials", cfg.trials, "LP instances per grid point")->capture_default_str();
  auto* pca = app.add_subcommand("pca-probe", "largest correlation eigenvalue of sampled vertices");
  common(pca, true);
  finite_opts(pca);
  pca->add_option("--tech-draws", cfg.tech_draws, "technology draws")->capture_default_str();
  pca->add_option("--objective-draws", cfg.objective_draws, "objectives per technology draw")
      ->capture_default_str();
  auto* val = app.add_subcommand("validate", "run the invariant suite");
  common(val, false);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();
  if (cfg.subcommand == "critical-line" && !crit->get_option("--var")->count()) cfg.var = "n";
  for (const auto& fx : fixes) {
    const auto eq = fx.find('=');
    try {
      if (eq == std::string::npos) throw std::invalid_argument(fx);
      cfg.fixed[fx.substr(0, eq)] = std::stod(fx.substr(eq + 1));
    } catch (const std::exception&) {
      std::cerr << "gestat: --fix expects name=value, got '" << fx << "'\n";
      return 2;
    }
  }
  return gestat::cli::run(cfg);
}
