#include "gestat/replica_solver.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "gestat/errors.hpp"
#include "kink_quadrature.hpp"

namespace gestat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Vec = Eigen::VectorXd;

struct FinalGoodSums {
  double y = 0.0, yt = 0.0, y2 = 0.0;
};

// y = chi / x*(t) with x* the positive root of x^2 - a x - chi = 0.
inline double final_good_y(double a, double chi) {
  const double root = std::sqrt(a * a + 4.0 * chi);
  return a >= 0.0 ? 2.0 * chi / (a + root) : 0.5 * (root - a);
}

FinalGoodSums final_good_sums(double x0, double kappa, double w, double chi,
                              const QuadratureRule& rule) {
  auto y_of = [=](double t) { return final_good_y(x0 - kappa - w * t, chi); };
  FinalGoodSums s;
  const double width = std::sqrt(chi) / w;
  const double t0 = (x0 - kappa) / w;
  if (detail::use_adaptive(t0, width, rule)) {
    const auto cuts = detail::kink_cuts(t0, width);
    const double tol = rule.fallback_tol();
    s.y = gaussian_average_adaptive(y_of, cuts, tol);
    s.yt = gaussian_average_adaptive([&](double t) { return y_of(t) * t; }, cuts, tol);
    s.y2 = gaussian_average_adaptive([&](double t) { double y = y_of(t); return y * y; }, cuts, tol);
    return s;
  }
  const auto nodes = rule.nodes();
  const auto weights = rule.weights();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double y = y_of(nodes[i]);
    s.y += weights[i] * y;
    s.yt += weights[i] * y * nodes[i];
    s.y2 += weights[i] * y * y;
  }
  return s;
}

double norm_inf(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Vec to_vec(const std::array<double, 6>& a, int m = 6) {
  Vec v(m);
  for (int i = 0; i < m; ++i) v(i) = a[i];
  return v;
}

struct NewtonOutcome {
  bool converged = false;
  double residual = kInf;
  int iterations = 0;
};

// Damped Newton with a central-difference Jacobian and backtracking on the
// max-norm. F may throw on inadmissible points; those count as failed trials.
template <class F>
NewtonOutcome damped_newton(F&& fun, Vec& x, double tol, int max_iter, double max_step = 2.0) {
  NewtonOutcome out;
  auto safe = [&](const Vec& z, Vec& r) {
    try {
      r = fun(z);
      return r.allFinite();
    } catch (const std::exception&) {
      return false;
    }
  };
  Vec r;
  if (!safe(x, r)) return out;
  double fn = norm_inf(r);
  const int m = static_cast<int>(x.size());
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it;
    out.residual = fn;
    if (fn <= tol) {
      out.converged = true;
      return out;
    }
    Eigen::MatrixXd J(r.size(), m);
    for (int j = 0; j < m; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
      Vec xp = x, xm = x, rp, rm;
      xp(j) += h;
      xm(j) -= h;
      if (!safe(xp, rp) || !safe(xm, rm)) return out;
      J.col(j) = (rp - rm) / (2.0 * h);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(J);
    if (qr.rank() < m) return out;
    Vec dx = -qr.solve(r);
    const double big = norm_inf(dx);
    if (big > max_step) dx *= max_step / big;
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      Vec trial = x + t * dx, rt;
      if (safe(trial, rt) && norm_inf(rt) < (1.0 - 1e-4 * t) * fn) {
        x = std::move(trial);
        r = std::move(rt);
        fn = norm_inf(r);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.iterations = it + 1;
      out.residual = fn;
      return out;
    }
  }
  out.iterations = max_iter;
  out.residual = fn;
  out.converged = fn <= tol;
  return out;
}

// Industrial unknowns: (log Omega, kappa, ell, log gamma, log delta, log chi).
RescaledParams unpack(const Vec& v) {
  return {std::exp(v(0)), v(1), v(2), std::exp(v(3)), std::exp(v(4))};
}

Vec pack(const RescaledParams& r, double chi) {
  Vec v(6);
  v << std::log(r.Omega), r.kappa, r.ell, std::log(r.gamma), std::log(r.delta), std::log(chi);
  return v;
}

double lerp_param(double a, double b, double lam, bool geometric) {
  if (geometric && a > 0 && b > 0) return a * std::pow(b / a, lam);
  return a + lam * (b - a);
}

EnsembleParams interpolate(const EnsembleParams& a, const EnsembleParams& b, double lam) {
  EnsembleParams p = b;
  p.n = lerp_param(a.n, b.n, lam, true);
  p.pi = lerp_param(a.pi, b.pi, lam, false);
  p.f = lerp_param(a.f, b.f, lam, false);
  p.eps = lerp_param(a.eps, b.eps, lam, true);
  return p;
}

// Industrial branch is declared lost below this chi.
constexpr double kMinChi = kIndustrialChiFloor;

struct PathState {
  Vec v;
  int iterations = 0;
  double residual = kInf;
};

bool industrial_newton(PathState& st, const EnsembleParams& P, const QuadratureRule& rule,
                       double tol) {
  auto fun = [&](const Vec& v) {
    if (v(5) < std::log(kMinChi)) throw DomainError("chi below floor");
    return to_vec(rescaled_residual(unpack(v), std::exp(v(5)), P, rule));
  };
  Vec v = st.v;
  const auto out = damped_newton(fun, v, tol, 60);
  st.iterations += out.iterations;
  if (!out.converged) return false;
  st.v = v;
  st.residual = out.residual;
  return true;
}

// Natural-parameter continuation from (from, st.v) to `to` with step halving.
bool continue_path(PathState& st, const EnsembleParams& from, const EnsembleParams& to,
                   const QuadratureRule& rule, double tol) {
  double lam = 0.0, h = 1.0;
  const double h_min = 1.0 / 8192.0;
  while (lam < 1.0) {
    const double next = std::min(1.0, lam + h);
    PathState trial = st;
    const double step_tol = next < 1.0 ? std::max(tol, 1e-9) : tol;
    if (industrial_newton(trial, interpolate(from, to, next), rule, step_tol)) {
      const int used = trial.iterations - st.iterations;
      st = std::move(trial);
      lam = next;
      if (used < 6) h = std::min(1.0, 2.0 * h);
    } else {
      st.iterations = trial.iterations;
      h *= 0.5;
      if (h < h_min) return false;
    }
  }
  return true;
}

EnsembleParams anchor_params() {
  EnsembleParams p;
  p.n = 1.0;
  p.pi = 0.65;
  p.f = 0.5;
  p.eps = 0.1;
  return p;
}

Vec anchor_guess() {
  const RescaledParams r{0.51944, 0.55424, 0.51547, 0.50866, 0.45964};
  return pack(r, 0.43284);
}

bool cold_start(PathState& st, const EnsembleParams& target, const QuadratureRule& rule,
                double tol) {
  st.v = anchor_guess();
  EnsembleParams a = anchor_params();
  a.utility = target.utility;
  if (!industrial_newton(st, a, rule, std::max(tol, 1e-9))) return false;
  EnsembleParams high = a;
  high.pi = std::max(0.95, target.pi);
  EnsembleParams moved = target;
  moved.pi = high.pi;
  return continue_path(st, a, high, rule, tol) && continue_path(st, high, moved, rule, tol) &&
         continue_path(st, moved, target, rule, tol);
}

SaddleSolution industrial_solution(const PathState& st, const EnsembleParams& P) {
  SaddleSolution s;
  s.params = P;
  s.branch = Branch::industrial;
  s.rescaled = unpack(st.v);
  s.op = unscale(s.rescaled, std::exp(st.v(5)));
  s.residual_norm = st.residual;
  s.iterations = st.iterations;
  return s;
}

// As Omega -> 0 the chi = 0 system becomes scale free: with kappa = u w the
// endowed goods drop out and one step maps (u, w) to (u', w sqrt(lambda)).
// The trivial point attracts iff lambda(u*) < 1 at the fixed point u* = u'(u*).
struct ScaleFree {
  double u = 0.0;
  double lambda = 0.0;
  double delta = 0.0;
};

ScaleFree scale_free_step(double u, const EnsembleParams& P) {
  const double m = 1.0 - P.pi;
  const double l = m * gauss_moment_I(1, u);
  const double d = m * gauss_moment_I(0, u);
  const double g = std::sqrt(std::max(m * gauss_moment_I(2, u) - l * l, 1e-300));
  const double z = l * P.eps / g;
  const double lam = P.n * (g / d) * (g / d) * gauss_moment_I(2, -z);
  const double up = (l + P.n * P.eps * (g / d) * gauss_moment_I(1, -z)) / std::sqrt(lam);
  return {up, lam, d};
}

std::optional<ScaleFree> scale_free_fixed_point(const EnsembleParams& P, int& iterations) {
  if (P.pi >= 1.0) return std::nullopt;
  auto gap = [&](double u) { return scale_free_step(u, P).u - u; };
  double lo = -8.0, glo = gap(lo);
  for (double hi = lo + 0.05; hi <= 60.0; hi += 0.05) {
    const double ghi = gap(hi);
    ++iterations;
    if (std::isfinite(glo) && std::isfinite(ghi) && glo * ghi <= 0.0) {
      std::uintmax_t it = 100;
      const auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-14 * std::max(1.0, std::abs(a)); };
      const auto br = boost::math::tools::toms748_solve(gap, lo, hi, glo, ghi, tol, it);
      iterations += static_cast<int>(it);
      const double u = 0.5 * (br.first + br.second);
      auto sf = scale_free_step(u, P);
      sf.u = u;
      return sf;
    }
    lo = hi;
    glo = ghi;
  }
  return std::nullopt;
}

}  // namespace

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::industrial: return "industrial";
    case Branch::collapsed: return "collapsed";
    default: return "failed";
  }
}

RescaledParams rescale(const OrderParams& op) {
  return {op.Omega, op.kappa, op.p * op.chi, op.sigma * op.chi, op.chi_hat * op.chi};
}

OrderParams unscale(const RescaledParams& r, double chi) {
  OrderParams op;
  op.Omega = r.Omega;
  op.kappa = r.kappa;
  op.chi = chi;
  if (chi > 0.0) {
    op.p = r.ell / chi;
    op.sigma = r.gamma / chi;
    op.chi_hat = r.delta / chi;
  } else {
    op.p = op.sigma = op.chi_hat = kInf;
  }
  return op;
}

double x_star(double t, int x0, int k, const OrderParams& op, double n) {
  const double a = x0 - op.kappa - std::sqrt(n * op.Omega) * t;
  if (k == 1 && op.chi > 0.0) {
    const double root = std::sqrt(a * a + 4.0 * op.chi);
    return a >= 0.0 ? 0.5 * (a + root) : 2.0 * op.chi / (root - a);
  }
  return a > 0.0 ? a : 0.0;
}

double x_star_generic(double a, double chi, double (*uprime)(double)) {
  if (!(chi > 0.0)) return a > 0.0 ? a : 0.0;
  // g(x) = x - a - chi u'(x) is increasing for decreasing u'.
  auto g = [=](double x) { return x - a - chi * uprime(x); };
  double lo = a > 0.0 ? a : 1.0, hi = std::max(a, 0.0) + 1.0;
  for (int k = 0; k < 2000 && !(g(lo) < 0.0); ++k) lo *= 0.5;
  for (int k = 0; k < 2000 && g(hi) < 0.0; ++k) hi *= 2.0;
  if (!(g(lo) < 0.0) || g(hi) < 0.0) throw NoConvergence("x_star_generic: no bracket", g(lo));
  std::uintmax_t iters = 200;
  const auto tol = [](double l, double h) { return std::abs(h - l) <= 1e-12 * std::max(1.0, h); };
  const auto bracket = boost::math::tools::toms748_solve(g, lo, hi, tol, iters);
  return 0.5 * (bracket.first + bracket.second);
}

MValues moments_M(double Omega, double kappa, double chi, const EnsembleParams& P,
                  const QuadratureRule& rule) {
  if (!(Omega > 0.0)) throw NonFinite("moments_M: Omega must be positive");
  const double w = std::sqrt(P.n * Omega);
  MValues M;
  const double mass[2] = {1.0 - P.pi, P.pi};
  for (int x0 = 0; x0 < 2; ++x0) {
    if (mass[x0] == 0.0) continue;
    const double d = (kappa - x0) / w;
    const double c1 = w * gauss_moment_I(1, d);
    const double ct = w * gauss_moment_I(0, d);
    const double c2 = w * w * gauss_moment_I(2, d);
    double f1 = c1, ft = ct, f2 = c2;
    if (P.f > 0.0 && chi > 0.0) {
      const auto s = final_good_sums(x0, kappa, w, chi, rule);
      f1 = s.y;
      ft = s.yt;
      f2 = s.y2;
    }
    M.M1 += mass[x0] * (P.f * f1 + (1.0 - P.f) * c1);
    M.Mt += mass[x0] * (P.f * ft + (1.0 - P.f) * ct);
    M.M2 += mass[x0] * (P.f * f2 + (1.0 - P.f) * c2);
  }
  if (!std::isfinite(M.M1) || !std::isfinite(M.Mt) || !std::isfinite(M.M2)) {
    throw NonFinite("moments_M: non-finite average");
  }
  return M;
}

MValues moments_M(const OrderParams& op, const EnsembleParams& params, const QuadratureRule& rule) {
  if (!(op.chi > 0.0)) throw DomainError("moments_M: chi must be positive");
  return moments_M(op.Omega, op.kappa, op.chi, params, rule);
}

std::array<double, 6> saddle_residual(const OrderParams& op, const EnsembleParams& P,
                                      const QuadratureRule& rule) {
  if (!(op.sigma > 0.0) || !(op.chi_hat > 0.0) || !(op.chi > 0.0) || !(op.Omega > 0.0)) {
    throw DomainError("saddle_residual: order parameters outside the open domain");
  }
  const MValues M = moments_M(op, P, rule);
  const double chi2 = op.chi * op.chi;
  const double radicand = M.M2 / chi2 - op.p * op.p;
  if (radicand < 0.0) throw DomainError("saddle_residual: M2/chi^2 - p^2 is negative");
  const auto s = truncated_scale_moments(op.p, op.sigma, op.chi_hat, P.eps);
  return {op.p - M.M1 / op.chi,
          op.chi_hat - M.Mt / std::sqrt(P.n * op.Omega * chi2),
          op.sigma - std::sqrt(radicand),
          op.Omega - s.m2,
          op.kappa - op.p * op.chi - P.n * P.eps * s.m1,
          op.chi - P.n / op.sigma * s.mt};
}

std::array<double, 6> rescaled_residual(const RescaledParams& r, double chi, const EnsembleParams& P,
                                        const QuadratureRule& rule) {
  if (!(r.gamma > 0.0) || !(r.delta > 0.0)) throw DomainError("rescaled_residual: gamma, delta > 0");
  const MValues M = moments_M(r.Omega, r.kappa, chi, P, rule);
  const double w = std::sqrt(P.n * r.Omega);
  const double z = r.ell * P.eps / r.gamma;
  const double sc = r.gamma / r.delta;
  return {r.ell - M.M1,
          r.delta - M.Mt / w,
          r.gamma * r.gamma + r.ell * r.ell - M.M2,
          r.Omega - sc * sc * gauss_moment_I(2, -z),
          r.kappa - r.ell - P.n * P.eps * sc * gauss_moment_I(1, -z),
          r.delta - P.n * gauss_moment_I(0, -z)};
}

TruncatedMoments scale_moments(const RescaledParams& r, double eps) {
  if (!(r.gamma > 0.0) || !(r.delta > 0.0)) return {0.0, 0.0, 0.0, 0.0};
  const double z = r.ell * eps / r.gamma;
  const double sc = r.gamma / r.delta;
  const double i0 = gauss_moment_I(0, -z);
  return {i0, sc * gauss_moment_I(1, -z), sc * i0, sc * sc * gauss_moment_I(2, -z)};
}

SaddleSolution solve_saddle(const EnsembleParams& params, const std::optional<SaddleSolution>& init,
                            const QuadratureRule& rule, const SolverOptions& opts) {
  params.validate();
  if (!(opts.tol > 0.0)) throw DomainError("solve_saddle: tol must be positive");
  if (params.pi == 1.0 && params.f == 1.0) {
    // Every good is endowed and consumed: each activity loses eps at x = x0, so s = 0.
    SaddleSolution idle;
    idle.params = params;
    idle.branch = Branch::collapsed;
    idle.op = unscale(idle.rescaled, 0.0);
    idle.message = "no activity is profitable at pi = f = 1";
    return idle;
  }
  int spent = 0;
  PathState st;
  bool ok = false;
  if (init && init->branch == Branch::industrial && init->op.chi > 0.0) {
    st.v = pack(init->rescaled, init->op.chi);
    ok = continue_path(st, init->params, params, rule, opts.tol);
    spent += st.iterations;
  }
  if (!ok) {
    PathState cold;
    ok = cold_start(cold, params, rule, opts.tol);
    spent += cold.iterations;
    st = std::move(cold);
  }
  if (ok) {
    auto sol = industrial_solution(st, params);
    sol.iterations = spent;
    if (scale_moments(sol.rescaled, params.eps).m1 > 0.0) return sol;
  }
  // pi = 1 has no homogeneous constraints and never collapses.
  const auto sf = scale_free_fixed_point(params, spent);
  if (sf && sf->lambda < 1.0 + 1e-9) {
    SaddleSolution col;
    col.params = params;
    col.branch = Branch::collapsed;
    col.rescaled = {0.0, 0.0, 0.0, 0.0, sf->delta};
    col.op = unscale(col.rescaled, 0.0);
    col.residual_norm = std::abs(scale_free_step(sf->u, params).u - sf->u);
    col.iterations = spent;
    return col;
  }
  throw NoConvergence("solve_saddle: neither branch converged", st.residual);
}

std::vector<SaddleSolution> sweep(const std::vector<EnsembleParams>& grid, const QuadratureRule& rule,
                                  const SolverOptions& opts) {
  std::vector<SaddleSolution> out;
  out.reserve(grid.size());
  std::optional<SaddleSolution> warm;
  for (const auto& p : grid) {
    try {
      auto s = solve_saddle(p, warm, rule, opts);
      if (s.branch == Branch::industrial) warm = s;
      out.push_back(std::move(s));
    } catch (const NoConvergence& e) {
      SaddleSolution bad;
      bad.params = p;
      bad.branch = Branch::failed;
      bad.residual_norm = e.last_residual();
      bad.message = e.what();
      out.push_back(std::move(bad));
    }
  }
  return out;
}

SaddleSolution industrial_endpoint(const SaddleSolution& start, SweepVar var,
                                   const QuadratureRule& rule, const SolverOptions& opts) {
  if (start.branch != Branch::industrial || !(start.op.chi > 0.0)) {
    throw DomainError("industrial_endpoint: start must be an industrial solution");
  }
  auto get = [var](const EnsembleParams& p) { return var == SweepVar::n ? p.n : p.pi; };
  auto set = [var](EnsembleParams& p, double v) { (var == SweepVar::n ? p.n : p.pi) = v; };

  // Walk towards the boundary until chi is small.
  PathState st;
  st.v = pack(start.rescaled, start.op.chi);
  EnsembleParams at = start.params;
  double step = 0.05 * std::max(get(at), 0.1);
  while (std::exp(st.v(5)) > 1e-4 && step > 1e-7) {
    EnsembleParams nxt = at;
    const double v = get(at) - step;
    if (v <= 0.0) {
      step *= 0.5;
      continue;
    }
    set(nxt, v);
    PathState trial = st;
    if (industrial_newton(trial, nxt, rule, std::max(opts.tol, 1e-9))) {
      st = std::move(trial);
      at = nxt;
    } else {
      st.iterations = trial.iterations;
      step *= 0.5;
    }
  }

  // Continuation in log chi down to kMinChi with the swept parameter as
  // sixth unknown.
  Vec v(6);
  v.head<5>() = st.v.head<5>();
  v(5) = get(at);
  double log_chi = st.v(5);
  auto fun_at = [&](double chi) {
    return [&, chi](const Vec& u) {
      EnsembleParams P = at;
      set(P, u(5));
      P.validate();
      return to_vec(rescaled_residual(unpack(u), chi, P, rule));
    };
  };
  const double target = std::log(kMinChi);
  double h = 1.0;
  NewtonOutcome out;
  int spent = st.iterations;
  while (log_chi > target) {
    const double next = std::max(target, log_chi - h);
    Vec trial = v;
    out = damped_newton(fun_at(std::exp(next)), trial, next > target ? std::max(opts.tol, 1e-9) : opts.tol,
                        60, 0.5);
    spent += out.iterations;
    if (out.converged) {
      v = trial;
      log_chi = next;
      h = std::min(2.0, 1.5 * h);
    } else {
      h *= 0.5;
      if (h < 1e-4) throw NoConvergence("industrial_endpoint: boundary solve failed", out.residual);
    }
  }
  SaddleSolution s;
  s.params = at;
  set(s.params, v(5));
  s.branch = Branch::industrial;
  s.rescaled = unpack(v);
  s.op = unscale(s.rescaled, kMinChi);
  s.residual_norm = out.residual;
  s.iterations = spent;
  return s;
}

}  // namespace gestat
