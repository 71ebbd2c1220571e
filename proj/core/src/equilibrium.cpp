#include "gestat/equilibrium.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

#include "gestat/simplex.hpp"

namespace gestat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Barrier {
  const EconomyInstance& e;
  double mu = 1.0;

  Eigen::VectorXd goods(const Eigen::VectorXd& s) const { return e.x0 + e.q.transpose() * s; }

  double value(const Eigen::VectorXd& s) const {
    if (s.minCoeff() <= 0.0) return -kInf;
    const Eigen::VectorXd x = goods(s);
    double v = 0.0;
    for (int c = 0; c < e.C; ++c) {
      if (x(c) <= 0.0) return -kInf;
      v += (e.k(c) > 0.0 ? e.k(c) : mu) * std::log(x(c));
    }
    return v + mu * s.array().log().sum();
  }
};

// Largest point with slack tau in every s_i and x_c, by linear programming.
Eigen::VectorXd interior_start(const EconomyInstance& e, double& tau) {
  const int N = e.N, C = e.C;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(C + N, N + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(C + N);
  A.topLeftCorner(C, N) = -e.q.transpose();
  A.topRightCorner(C, 1).setOnes();
  b.head(C) = e.x0;
  A.bottomLeftCorner(N, N) = -Eigen::MatrixXd::Identity(N, N);
  A.bottomRightCorner(N, 1).setOnes();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(N + 1);
  c(N) = 1.0;
  Eigen::VectorXd up = Eigen::VectorXd::Constant(N + 1, e.primary_count() / e.eps + 1.0);
  up(N) = 1.0;
  const LpResult r = solve_lp(A, b, c, up);
  tau = r.status == LpStatus::optimal ? r.x(N) : 0.0;
  return r.x.head(N);
}

int barrier_solve(const EconomyInstance& e, Eigen::VectorXd& s, double mu_final) {
  Barrier B{e};
  int steps = 0;
  for (double mu = 1.0;; mu *= 0.2) {
    B.mu = std::max(mu, mu_final);
    for (int it = 0; it < 200; ++it) {
      const Eigen::VectorXd x = B.goods(s);
      Eigen::VectorXd w1(e.C), w2(e.C);
      for (int c = 0; c < e.C; ++c) {
        const double a = e.k(c) > 0.0 ? e.k(c) : B.mu;
        w1(c) = a / x(c);
        w2(c) = a / (x(c) * x(c));
      }
      const Eigen::VectorXd g = e.q * w1 + B.mu * s.cwiseInverse();
      Eigen::MatrixXd H = e.q * w2.asDiagonal() * e.q.transpose();
      H.diagonal() += B.mu * s.array().square().inverse().matrix();
      const Eigen::VectorXd d = H.ldlt().solve(g);
      const double dec = g.dot(d);
      ++steps;
      if (!(dec > 1e-13)) break;

      const Eigen::VectorXd dx = e.q.transpose() * d;
      double amax = 1.0;
      for (int i = 0; i < e.N; ++i)
        if (d(i) < 0.0) amax = std::min(amax, -0.99 * s(i) / d(i));
      for (int c = 0; c < e.C; ++c)
        if (dx(c) < 0.0) amax = std::min(amax, -0.99 * x(c) / dx(c));
      const double f0 = B.value(s);
      double a = amax;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, a *= 0.5) {
        const Eigen::VectorXd trial = s + a * d;
        if (B.value(trial) >= f0 + 1e-4 * a * dec) {
          s = trial;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (B.mu <= mu_final) break;
  }
  return steps;
}

// Newton on the active-set KKT equations (zero profit for active technologies,
// tight non-final goods at zero), with the sets corrected by sign checks.
enum class NewtonResult { converged, singular, failed };

NewtonResult newton_on_sets(const EconomyInstance& e, const std::vector<int>& A, const std::vector<int>& T,
                            Eigen::VectorXd& sa, Eigen::VectorXd& pt, Eigen::VectorXd& x) {
  const int na = static_cast<int>(A.size()), nt = static_cast<int>(T.size());
  Eigen::VectorXd full = Eigen::VectorXd::Zero(e.N);
  double last = kInf;
  for (int it = 0; it < 30; ++it) {
    full.setZero();
    for (int a = 0; a < na; ++a) full(A[a]) = sa(a);
    x = e.x0 + e.q.transpose() * full;
    for (int c = 0; c < e.C; ++c)
      if (e.k(c) > 0.0 && !(x(c) > 0.0)) return NewtonResult::failed;
    Eigen::VectorXd F(na + nt);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(na + nt, na + nt);
    for (int a = 0; a < na; ++a) {
      const int i = A[a];
      double r = 0.0;
      for (int c = 0; c < e.C; ++c)
        if (e.k(c) > 0.0) r += e.k(c) * e.q(i, c) / x(c);
      for (int t = 0; t < nt; ++t) {
        r += pt(t) * e.q(i, T[t]);
        J(a, na + t) = e.q(i, T[t]);
      }
      F(a) = r;
      for (int b = 0; b < na; ++b) {
        const int j = A[b];
        double h = 0.0;
        for (int c = 0; c < e.C; ++c)
          if (e.k(c) > 0.0) h -= e.k(c) * e.q(i, c) * e.q(j, c) / (x(c) * x(c));
        J(a, b) = h;
      }
    }
    for (int t = 0; t < nt; ++t) {
      F(na + t) = x(T[t]);
      for (int b = 0; b < na; ++b) J(na + t, b) = e.q(A[b], T[t]);
    }
    // Stop at roundoff: tiny, or small and no longer shrinking.
    const double res = F.lpNorm<Eigen::Infinity>();
    if (res < 1e-13 || (res < 1e-7 && res > 0.5 * last)) return NewtonResult::converged;
    last = res;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible()) return NewtonResult::singular;
    const Eigen::VectorXd step = lu.solve(F);
    sa -= step.head(na);
    pt -= step.tail(nt);
  }
  return NewtonResult::failed;
}

bool polish(const EconomyInstance& e, Eigen::VectorXd& s, Eigen::VectorXd& p, double mu) {
  const double cut = std::sqrt(mu);
  const Eigen::VectorXd x_start = e.x0 + e.q.transpose() * s;
  std::vector<int> A, T;
  std::vector<double> sa0, pt0;
  for (int i = 0; i < e.N; ++i)
    if (s(i) > cut) {
      A.push_back(i);
      sa0.push_back(s(i));
    }
  for (int c = 0; c < e.C; ++c)
    if (e.k(c) <= 0.0 && x_start(c) < cut) {
      T.push_back(c);
      pt0.push_back(mu / std::max(x_start(c), 1e-300));
    }

  for (int round = 0; round < 50; ++round) {
    if (A.empty()) return false;
    Eigen::VectorXd sa = Eigen::Map<Eigen::VectorXd>(sa0.data(), sa0.size());
    Eigen::VectorXd pt = Eigen::Map<Eigen::VectorXd>(pt0.data(), pt0.size());
    Eigen::VectorXd x;
    const auto nr = newton_on_sets(e, A, T, sa, pt, x);
    if (nr == NewtonResult::failed) return false;
    if (nr == NewtonResult::singular) {
      // More active technologies than the tight goods can pin down; drop the smallest.
      const auto k = std::min_element(sa0.begin(), sa0.end()) - sa0.begin();
      A.erase(A.begin() + k);
      sa0.erase(sa0.begin() + k);
      continue;
    }

    // Degenerate technologies and goods: drop the wrong-signed ones and retry.
    bool changed = false;
    std::vector<int> A2, T2;
    std::vector<double> sa2, pt2;
    for (std::size_t a = 0; a < A.size(); ++a) {
      if (sa(a) > 0.0) {
        A2.push_back(A[a]);
        sa2.push_back(sa(a));
      } else {
        changed = true;
      }
    }
    for (std::size_t t = 0; t < T.size(); ++t) {
      if (pt(t) >= -1e-12) {
        T2.push_back(T[t]);
        pt2.push_back(std::max(pt(t), 0.0));
      } else {
        changed = true;
      }
    }
    if (changed) {
      A = std::move(A2), T = std::move(T2), sa0 = std::move(sa2), pt0 = std::move(pt2);
      continue;
    }

    Eigen::VectorXd price = Eigen::VectorXd::Zero(e.C);
    for (int c = 0; c < e.C; ++c)
      if (e.k(c) > 0.0) price(c) = e.k(c) / x(c);
    for (std::size_t t = 0; t < T.size(); ++t) price(T[t]) = std::max(pt(t), 0.0);
    // Goods pushed negative become tight; profitable idle technologies become active.
    for (int c = 0; c < e.C; ++c) {
      if (e.k(c) <= 0.0 && x(c) < -1e-12 && std::find(T.begin(), T.end(), c) == T.end()) {
        T2.push_back(c);
        pt2.push_back(0.0);
        changed = true;
      }
    }
    const Eigen::VectorXd profit = e.q * price;
    const double scale = price.lpNorm<Eigen::Infinity>();
    for (int i = 0; i < e.N; ++i) {
      if (profit(i) > 1e-9 * scale && std::find(A.begin(), A.end(), i) == A.end()) {
        A2.push_back(i);
        sa2.push_back(cut);
        changed = true;
      }
    }
    if (changed) {
      A = std::move(A2), T = std::move(T2), sa0 = std::move(sa2), pt0 = std::move(pt2);
      continue;
    }

    s.setZero();
    for (std::size_t a = 0; a < A.size(); ++a) s(A[a]) = sa(a);
    p = price;
    return true;
  }
  return false;
}

}  // namespace

std::string status_name(EquilibriumStatus s) {
  switch (s) {
    case EquilibriumStatus::optimal: return "optimal";
    case EquilibriumStatus::infeasible: return "infeasible";
    default: return "failed";
  }
}

double KktReport::max_residual() const {
  return std::max({stationarity, dual_feasibility, complementarity, primal, walras, excess_price});
}

KktReport certify(const EconomyInstance& e, const Eigen::VectorXd& s, const Eigen::VectorXd& p,
                  const std::vector<int>& active) {
  KktReport r;
  const Eigen::VectorXd x = e.x0 + e.q.transpose() * s;
  const double pn = std::max(p.lpNorm<Eigen::Infinity>(), 1e-300);
  const Eigen::VectorXd profit = e.q * p;
  std::vector<char> is_active(e.N, 0);
  for (int i : active) is_active[i] = 1;
  for (int i = 0; i < e.N; ++i) {
    if (is_active[i]) r.stationarity = std::max(r.stationarity, std::abs(profit(i)) / pn);
    r.dual_feasibility = std::max(r.dual_feasibility, std::max(0.0, profit(i)) / pn);
    r.complementarity = std::max(r.complementarity, s(i) * std::abs(profit(i)) / pn);
    r.primal = std::max(r.primal, -s(i));
  }
  for (int c = 0; c < e.C; ++c) {
    r.primal = std::max(r.primal, -x(c));
    r.primal = std::max(r.primal, -p(c) / pn);
    if (e.k(c) <= 0.0) {
      r.complementarity = std::max(r.complementarity, p(c) * std::abs(x(c)) / pn);
      if (x(c) > 1e-6) r.excess_price = std::max(r.excess_price, p(c) / pn);
    }
  }
  const double px0 = p.dot(e.x0);
  r.walras = std::abs(p.dot(x) - px0) / std::max(std::abs(px0), 1e-300);
  return r;
}

EquilibriumSolution solve_equilibrium(const EconomyInstance& econ, double tol) {
  EquilibriumSolution out;
  const int N = econ.N, C = econ.C;
  out.s_star = Eigen::VectorXd::Zero(N);
  out.duals = Eigen::VectorXd::Zero(C);

  auto finish = [&](const Eigen::VectorXd& s, const Eigen::VectorXd& p) {
    out.s_star = s;
    out.x_star = econ.x0 + econ.q.transpose() * s;
    out.duals = p;
    out.active_set.clear();
    const double cut = 1e-6 * std::max(1.0, s.mean());
    for (int i = 0; i < N; ++i)
      if (s(i) > cut) out.active_set.push_back(i);
    out.objective = 0.0;
    for (int c = 0; c < C; ++c)
      if (econ.k(c) > 0.0) out.objective += econ.k(c) * std::log(out.x_star(c));
    out.kkt = certify(econ, s, p, out.active_set);
    out.kkt_residual = out.kkt.max_residual();
  };

  if (econ.final_count() == 0) {
    out.status = EquilibriumStatus::optimal;
    out.polished = true;
    finish(out.s_star, out.duals);
    out.message = "no final goods";
    return out;
  }

  double tau = 0.0;
  Eigen::VectorXd s = interior_start(econ, tau);
  if (!(tau > 1e-10)) {
    // No interior: treat the origin as the only candidate.
    bool finals_ok = true;
    for (int c = 0; c < C; ++c)
      if (econ.k(c) > 0.0 && econ.x0(c) <= 0.0) finals_ok = false;
    out.x_star = econ.x0;
    if (!finals_ok) {
      out.status = EquilibriumStatus::infeasible;
      out.objective = -kInf;
      out.kkt_residual = kInf;
      out.message = "feasible set has no interior and some final good is unreachable";
      return out;
    }
    Eigen::VectorXd p = Eigen::VectorXd::Zero(C);
    for (int c = 0; c < C; ++c)
      if (econ.k(c) > 0.0) p(c) = econ.k(c) / econ.x0(c);
    out.polished = true;
    finish(Eigen::VectorXd::Zero(N), p);
    out.status = out.kkt_residual <= 1e-6 ? EquilibriumStatus::optimal : EquilibriumStatus::failed;
    out.message = "feasible set has no interior";
    return out;
  }

  const double mu_final = std::min(1e-9, tol);
  out.newton_steps = barrier_solve(econ, s, mu_final);
  const Eigen::VectorXd x = econ.x0 + econ.q.transpose() * s;
  Eigen::VectorXd p(C);
  for (int c = 0; c < C; ++c) p(c) = econ.k(c) > 0.0 ? econ.k(c) / x(c) : mu_final / x(c);

  Eigen::VectorXd sp = s, pp = p;
  if (polish(econ, sp, pp, mu_final)) {
    out.polished = true;
    finish(sp, pp);
  } else {
    finish(s, p);
  }
  out.status = out.kkt_residual <= 1e-6 ? EquilibriumStatus::optimal : EquilibriumStatus::failed;
  if (!out.ok()) out.message = "KKT residual above 1e-6";
  return out;
}

}  // namespace gestat
