#include "gestat/finite_lab.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "gestat/errors.hpp"
#include "gestat/parallel.hpp"
#include "gestat/simplex.hpp"

namespace gestat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::mt19937_64 draw_engine(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream,
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

}  // namespace

SampleStat sample_stat(std::span<const double> values) {
  SampleStat st;
  double sum = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++st.count;
    }
  }
  if (st.count == 0) {
    st.mean = st.sem = kNaN;
    return st;
  }
  st.mean = sum / st.count;
  if (st.count < 2) {
    st.sem = kNaN;
    return st;
  }
  double ss = 0.0;
  for (double v : values)
    if (std::isfinite(v)) ss += (v - st.mean) * (v - st.mean);
  st.sem = std::sqrt(ss / (st.count - 1) / st.count);
  return st;
}

InstanceObservables instance_observables(const EconomyInstance& e, const EquilibriumSolution& sol) {
  InstanceObservables o;
  o.seed = e.seed;
  o.ok = sol.ok();
  o.status = sol.status;
  if (!o.ok) {
    o.s_mean = o.phi = o.x_mean = o.XC = o.XW = o.u_mean = o.identity_error = kNaN;
    return o;
  }
  o.s_mean = sol.s_star.mean();
  o.phi = static_cast<double>(sol.active_set.size()) / e.N;
  double logs = 0.0;
  int finals = 0;
  for (int c = 0; c < e.C; ++c) {
    const double x = sol.x_star(c);
    if (e.k(c) > 0.0) {
      o.XC += x;
      logs += std::log(x);
      ++finals;
    } else {
      o.XW += x;
    }
  }
  o.XC /= e.C;
  o.XW /= e.C;
  o.x_mean = o.XC + o.XW;
  o.u_mean = finals > 0 ? logs / finals : kNaN;
  const double pi_hat = e.x0.mean();
  o.identity_error =
      std::abs(o.x_mean - (pi_hat - static_cast<double>(e.N) / e.C * e.eps * o.s_mean));
  return o;
}

MonteCarloResult monte_carlo_observables(const EnsembleParams& params, int C,
                                         std::span<const std::uint64_t> seeds, int workers) {
  if (seeds.size() < 2) throw DomainError("monte_carlo_observables: need at least two instances");
  params.validate();
  MonteCarloResult r;
  r.params = params;
  r.C = C;
  r.N = static_cast<int>(std::lround(params.n * C));
  r.instances = static_cast<int>(seeds.size());
  r.per_instance.resize(seeds.size());
  parallel_for(seeds.size(), workers, [&](std::size_t i) {
    const EconomyInstance e = sample_economy(params, C, seeds[i]);
    r.per_instance[i] = instance_observables(e, solve_equilibrium(e));
  });
  std::vector<double> s, phi, x, xc, xw, u;
  for (const auto& o : r.per_instance) {
    if (!o.ok) {
      ++r.failed;
      r.infeasible += o.status == EquilibriumStatus::infeasible;
      continue;
    }
    ++r.solved;
    s.push_back(o.s_mean);
    phi.push_back(o.phi);
    x.push_back(o.x_mean);
    xc.push_back(o.XC);
    xw.push_back(o.XW);
    u.push_back(o.u_mean);
    r.max_identity_error = std::max(r.max_identity_error, o.identity_error);
  }
  r.s_mean = sample_stat(s);
  r.phi = sample_stat(phi);
  r.x_mean = sample_stat(x);
  r.XC = sample_stat(xc);
  r.XW = sample_stat(xw);
  r.u = sample_stat(u);
  return r;
}

MonteCarloResult monte_carlo_observables(const EnsembleParams& params, int C, int instances,
                                         std::uint64_t base_seed, int workers) {
  if (instances < 2) throw DomainError("monte_carlo_observables: need at least two instances");
  std::vector<std::uint64_t> seeds(instances);
  for (int i = 0; i < instances; ++i) seeds[i] = base_seed + static_cast<std::uint64_t>(i);
  return monte_carlo_observables(params, C, seeds, workers);
}

double homogeneous_lp_optimum(const EconomyInstance& e) {
  std::vector<int> rows;
  for (int c = 0; c < e.C; ++c)
    if (e.x0(c) <= 0.0) rows.push_back(c);
  Eigen::MatrixXd A(rows.size(), e.N);
  for (std::size_t r = 0; r < rows.size(); ++r) A.row(r) = -e.q.col(rows[r]).transpose();
  const LpResult lp = solve_lp(A, Eigen::VectorXd::Zero(rows.size()), Eigen::VectorXd::Ones(e.N),
                               Eigen::VectorXd::Ones(e.N));
  if (lp.status != LpStatus::optimal) throw NoConvergence("homogeneous LP did not finish", kNaN);
  return lp.objective;
}

FeasibilityRecord lp_feasibility_fraction(const EnsembleParams& params, int C, int trials,
                                          std::uint64_t base_seed, int workers) {
  if (trials < 1) throw DomainError("lp_feasibility_fraction: trials must be positive");
  params.validate();
  FeasibilityRecord rec;
  rec.n = params.n;
  rec.pi = params.pi;
  rec.eps = params.eps;
  rec.C = C;
  rec.N = static_cast<int>(std::lround(params.n * C));
  rec.trials = trials;
  std::vector<int> outcome(trials, 0);  // 1 feasible, -1 solver failure
  parallel_for(trials, workers, [&](std::size_t t) {
    const EconomyInstance e = sample_economy(params, C, base_seed + t);
    try {
      outcome[t] = homogeneous_lp_optimum(e) > kFeasibilityThreshold ? 1 : 0;
    } catch (const NoConvergence&) {
      outcome[t] = -1;
    }
  });
  for (int o : outcome) {
    if (o == 1) ++rec.feasible_count;
    if (o == -1) ++rec.solver_failures;
  }
  rec.fraction = static_cast<double>(rec.feasible_count) / trials;
  return rec;
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& samples) {
  const int n = static_cast<int>(samples.cols());
  Eigen::MatrixXd z = samples.rowwise() - samples.colwise().mean();
  std::vector<char> constant(n, 0);
  for (int j = 0; j < n; ++j) {
    const double norm = z.col(j).norm();
    const double scale = samples.col(j).cwiseAbs().maxCoeff();
    if (!(norm > 1e-12 * std::max(scale, 1e-300))) {
      z.col(j).setZero();
      constant[j] = 1;
    } else {
      z.col(j) /= norm;
    }
  }
  Eigen::MatrixXd r = z.transpose() * z;
  for (int j = 0; j < n; ++j) r(j, j) = 1.0;
  return r;
}

double power_iteration_max(const Eigen::MatrixXd& m, double tol, int max_iter) {
  const int n = static_cast<int>(m.rows());
  if (n == 0) return kNaN;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd mv = m * v;
    const double next = v.dot(mv);
    const double norm = mv.norm();
    if (norm == 0.0) return 0.0;
    v = mv / norm;
    if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

Eigen::VectorXd sample_vertex(const Eigen::MatrixXd& q, const Eigen::VectorXd& x0, double eps,
                              const Eigen::VectorXd& w) {
  const int N = static_cast<int>(q.rows()), C = static_cast<int>(q.cols());
  Eigen::MatrixXd A(C + 1, N);
  A.topRows(C) = -q.transpose();
  A.row(C).setOnes();
  Eigen::VectorXd b(C + 1);
  b.head(C) = x0;
  b(C) = x0.sum() / eps;
  const LpResult lp = solve_lp(A, b, w, Eigen::VectorXd::Constant(N, std::numeric_limits<double>::infinity()));
  if (lp.status != LpStatus::optimal) throw NoConvergence("vertex LP did not finish", kNaN);
  return lp.x;
}

GeometryRecord pca_probe(const EnsembleParams& params, int C, int n_tech_draws, int n_objective_draws,
                         std::uint64_t base_seed, int workers) {
  if (n_tech_draws < 2 || n_objective_draws < 2) throw DomainError("pca_probe: need at least two draws each");
  params.validate();
  GeometryRecord rec;
  rec.n = params.n;
  rec.pi = params.pi;
  rec.eps = params.eps;
  rec.C = C;
  rec.N = static_cast<int>(std::lround(params.n * C));
  rec.samples = n_tech_draws * n_objective_draws;
  const int N = rec.N;

  std::vector<double> lambdas(n_tech_draws, kNaN);
  parallel_for(n_tech_draws, workers, [&](std::size_t t) {
    const std::uint64_t seed = base_seed + t;
    const Eigen::MatrixXd q = sample_technologies(N, C, params.eps, seed);
    auto eng = draw_engine(seed, 3);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd S(n_objective_draws, N);
    for (int j = 0; j < n_objective_draws; ++j) {
      Eigen::VectorXd x0(C);
      for (int c = 0; c < C; ++c) x0(c) = uni(eng) < params.pi ? 1.0 : 0.0;
      Eigen::VectorXd w(N);
      for (int i = 0; i < N; ++i) w(i) = std::abs(gauss(eng));
      w /= w.norm();
      S.row(j) = sample_vertex(q, x0, params.eps, w).transpose();
    }
    if (S.cwiseAbs().maxCoeff() <= kFeasibilityThreshold) return;
    lambdas[t] = power_iteration_max(correlation_matrix(S));
  });

  double sum = 0.0;
  int used = 0;
  for (double l : lambdas) {
    if (std::isnan(l)) {
      ++rec.collapsed_draws;
    } else {
      sum += l;
      ++used;
    }
  }
  rec.collapsed = used == 0;
  rec.lambda_max = rec.collapsed ? kNaN : sum / used;
  rec.lambda_max_over_N = rec.lambda_max / N;
  return rec;
}

}  // namespace gestat
