#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gestat/critical_line.hpp"
#include "gestat/finite_lab.hpp"
#include "gestat/observables.hpp"
#include "gestat/replica_solver.hpp"

namespace gestat {

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Shortest round-trip decimal; "nan", "inf" and "-inf" for non-finite values.
std::string format_number(double v);

/// `#`-prefixed metadata block (library version first), header row, data rows.
void write_csv(std::ostream& os, const Metadata& meta, const Table& table);
/// {"metadata": {...}, "columns": [...], "rows": [[...], ...]}; non-finite numbers as strings.
void write_json(std::ostream& os, const Metadata& meta, const Table& table);

Table saddle_table(std::span<const SaddleSolution> rows);
Table phase_table(std::span<const PhasePointRecord> rows);
Table critical_table(std::span<const CriticalPoint> rows);
Table feasibility_table(std::span<const FeasibilityRecord> rows);
Table geometry_table(std::span<const GeometryRecord> rows);
Table monte_carlo_table(std::span<const MonteCarloResult> rows);

}  // namespace gestat
