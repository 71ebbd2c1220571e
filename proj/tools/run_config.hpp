#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gestat/ensemble.hpp"
#include "gestat/records.hpp"

namespace gestat::cli {

struct RunConfig {
  std::string subcommand;
  EnsembleParams params;
  std::string var = "n";
  double from = 0.0, to = 0.0;
  int points = 1;
  std::map<std::string, double> fixed;  // f-over-n, pi-over-n for the intermediate sweep
  int C = 100;
  int N = 0;  // when positive, C = round(N / n) and n becomes N / C
  int instances = 100;
  int trials = 100;
  int tech_draws = 10;
  int objective_draws = 25;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  int nodes = 120;
  int workers = 0;
  bool order_params = false;
  std::string dump_dir;
  std::string output;
  std::string format = "csv";
};

/// Thrown for invalid configurations; maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void validate_config(const RunConfig& cfg);
std::vector<double> grid_values(const RunConfig& cfg);
Metadata config_metadata(const RunConfig& cfg);

/// 0 success, 1 partial failure, 2 configuration or I/O error.
int run(const RunConfig& cfg);

/// Invariant suite behind `validate`; prints one line per check.
int run_validation(const RunConfig& cfg);

}  // namespace gestat::cli
