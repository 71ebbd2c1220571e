#include "gestat/records.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "gestat/version.hpp"

namespace gestat {

namespace {

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

Cell num(double v) { return v; }
Cell count(long long v) { return v; }

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, const Metadata& meta, const Table& table) {
  os << "# gestat " << kVersion << '\n';
  for (const auto& [k, v] : meta) os << "# " << k << '=' << v << '\n';
  for (std::size_t j = 0; j < table.columns.size(); ++j) os << (j ? "," : "") << table.columns[j];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << cell_text(row[j]);
    os << '\n';
  }
}

void write_json(std::ostream& os, const Metadata& meta, const Table& table) {
  nlohmann::ordered_json doc;
  doc["metadata"]["gestat"] = kVersion;
  for (const auto& [k, v] : meta) doc["metadata"][k] = v;
  doc["columns"] = table.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    auto r = nlohmann::ordered_json::array();
    for (const auto& c : row) {
      if (const auto* d = std::get_if<double>(&c)) {
        if (std::isfinite(*d)) {
          r.push_back(*d);
        } else {
          r.push_back(format_number(*d));
        }
      } else if (const auto* i = std::get_if<long long>(&c)) {
        r.push_back(*i);
      } else {
        r.push_back(std::get<std::string>(c));
      }
    }
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  os << doc.dump(1) << '\n';
}

Table saddle_table(std::span<const SaddleSolution> rows) {
  Table t{{"n", "pi", "f", "eps", "branch", "Omega", "kappa", "p", "sigma", "chi", "chi_hat", "residual",
           "iters"},
          {}};
  for (const auto& s : rows) {
    const auto& P = s.params;
    t.rows.push_back({num(P.n), num(P.pi), num(P.f), num(P.eps), std::string(branch_name(s.branch)),
                      num(s.op.Omega), num(s.op.kappa), num(s.op.p), num(s.op.sigma), num(s.op.chi),
                      num(s.op.chi_hat), num(s.residual_norm), count(s.iterations)});
  }
  return t;
}

Table phase_table(std::span<const PhasePointRecord> rows) {
  Table t{{"n", "pi", "f", "eps", "branch", "s_mean", "phi", "XC", "XW", "x11", "x01", "x10", "x00", "psi0",
           "psi1", "u_mean"},
          {}};
  for (const auto& r : rows) {
    const auto& P = r.params;
    const auto& o = r.obs;
    t.rows.push_back({num(P.n), num(P.pi), num(P.f), num(P.eps), std::string(branch_name(r.branch)),
                      num(o.s_mean), num(o.phi), num(o.XC), num(o.XW), num(o.x11), num(o.x01), num(o.x10),
                      num(o.x00), num(o.psi0), num(o.psi1), num(o.u_mean)});
  }
  return t;
}

Table critical_table(std::span<const CriticalPoint> rows) {
  Table t{{"n", "eps", "pi_c", "xi", "residual"}, {}};
  for (const auto& c : rows) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    t.rows.push_back({num(c.n), num(c.eps), num(c.ok ? c.pi_c : nan), num(c.ok ? c.xi : nan),
                      num(c.ok ? c.residual : nan)});
  }
  return t;
}

Table feasibility_table(std::span<const FeasibilityRecord> rows) {
  Table t{{"n", "pi", "eps", "N", "C", "trials", "feasible_count", "fraction"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({num(r.n), num(r.pi), num(r.eps), count(r.N), count(r.C), count(r.trials),
                      count(r.feasible_count), num(r.fraction)});
  }
  return t;
}

Table geometry_table(std::span<const GeometryRecord> rows) {
  Table t{{"n", "pi", "eps", "N", "C", "samples", "lambda_max", "lambda_max_over_N", "collapsed_draws"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({num(r.n), num(r.pi), num(r.eps), count(r.N), count(r.C), count(r.samples),
                      num(r.lambda_max), num(r.lambda_max_over_N), count(r.collapsed_draws)});
  }
  return t;
}

Table monte_carlo_table(std::span<const MonteCarloResult> rows) {
  Table t{{"n", "pi", "f", "eps", "N", "C", "instances", "solved", "infeasible", "s_mean", "s_mean_se", "phi", "phi_se",
           "XC", "XC_se", "XW", "XW_se", "u_mean", "u_mean_se", "identity_error"},
          {}};
  for (const auto& r : rows) {
    const auto& P = r.params;
    t.rows.push_back({num(P.n), num(P.pi), num(P.f), num(P.eps), count(r.N), count(r.C), count(r.instances),
                      count(r.solved), count(r.infeasible), num(r.s_mean.mean), num(r.s_mean.sem), num(r.phi.mean), num(r.phi.sem),
                      num(r.XC.mean), num(r.XC.sem), num(r.XW.mean), num(r.XW.sem), num(r.u.mean),
                      num(r.u.sem), num(r.max_identity_error)});
  }
  return t;
}

}  // namespace gestat
