#include "gestat/simplex.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "gestat/errors.hpp"

namespace gestat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Tableau {
  int m, n, total;
  Eigen::MatrixXd T;  // B^{-1} [A I]
  Eigen::VectorXd ub, d, beta;
  std::vector<int> basis, where;
  std::vector<char> at_upper;

  Tableau(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
          const Eigen::VectorXd& upper)
      : m(static_cast<int>(A.rows())), n(static_cast<int>(A.cols())), total(m + n),
        T(m, m + n), ub(m + n), d(m + n), beta(b), basis(m), where(m + n, -1), at_upper(m + n, 0) {
    T.leftCols(n) = A;
    T.rightCols(m).setIdentity();
    ub.head(n) = upper;
    ub.tail(m).setConstant(kInf);
    d.head(n) = c;
    d.tail(m).setZero();
    for (int i = 0; i < m; ++i) {
      basis[i] = n + i;
      where[n + i] = i;
    }
  }

  // Values of the basic variables for right-hand side b at the current basis.
  Eigen::VectorXd basic_values(const Eigen::VectorXd& b) const {
    Eigen::VectorXd v = T.rightCols(m) * b;
    for (int j = 0; j < total; ++j)
      if (where[j] < 0 && at_upper[j]) v -= ub(j) * T.col(j);
    return v;
  }

  LpStatus run(double tol, int max_pivots, int& pivots) {
    int degenerate_run = 0;
    bool bland = false;
    while (pivots < max_pivots) {
      int enter = -1;
      double best = 0.0;
      for (int j = 0; j < total; ++j) {
        if (where[j] >= 0) continue;
        const double gain = at_upper[j] ? -d(j) : d(j);
        if (gain <= tol) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (gain > best) {
          best = gain;
          enter = j;
        }
      }
      if (enter < 0) return LpStatus::optimal;
      const double dir = at_upper[enter] ? -1.0 : 1.0;

      // Ratio test, including the entering variable's own bound flip.
      double theta = ub(enter);
      int leave = -1;
      bool leave_to_upper = false;
      for (int i = 0; i < m; ++i) {
        const double rate = -dir * T(i, enter);
        if (std::abs(rate) <= tol) continue;
        const int bv = basis[i];
        double lim;
        bool to_upper;
        if (rate < 0.0) {
          lim = std::max(beta(i), 0.0) / -rate;
          to_upper = false;
        } else {
          if (!std::isfinite(ub(bv))) continue;
          lim = std::max(ub(bv) - beta(i), 0.0) / rate;
          to_upper = true;
        }
        bool take;
        if (leave < 0) {
          take = lim <= theta;
        } else if (lim < theta - 1e-12) {
          take = true;
        } else if (lim <= theta + 1e-12) {
          take = bland ? bv < basis[leave] : std::abs(T(i, enter)) > std::abs(T(leave, enter));
        } else {
          take = false;
        }
        if (take) {
          theta = lim;
          leave = i;
          leave_to_upper = to_upper;
        }
      }
      if (!std::isfinite(theta)) return LpStatus::unbounded;
      ++pivots;
      if (theta <= 1e-12) {
        if (++degenerate_run > 50) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }

      beta -= theta * dir * T.col(enter);
      if (leave < 0) {
        at_upper[enter] = !at_upper[enter];
        continue;
      }
      const double enter_value = (at_upper[enter] ? ub(enter) : 0.0) + dir * theta;
      const int out = basis[leave];
      T.row(leave) /= T(leave, enter);
      for (int i = 0; i < m; ++i) {
        if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
      }
      d -= d(enter) * T.row(leave).transpose();
      basis[leave] = enter;
      where[enter] = leave;
      where[out] = -1;
      at_upper[out] = leave_to_upper ? 1 : 0;
      at_upper[enter] = 0;
      beta(leave) = enter_value;
    }
    return LpStatus::iteration_limit;
  }

  Eigen::VectorXd solution() const {
    Eigen::VectorXd all = Eigen::VectorXd::Zero(total);
    for (int j = 0; j < total; ++j)
      if (where[j] < 0 && at_upper[j]) all(j) = ub(j);
    for (int i = 0; i < m; ++i) all(basis[i]) = beta(i);
    return all;
  }
};

// Deterministic jitter in (0.5, 1].
double jitter(int i) {
  std::uint64_t z = static_cast<std::uint64_t>(i) + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  return 0.5 + 0.5 * static_cast<double>(z >> 11) / 9007199254740992.0;
}

}  // namespace

LpResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                  const Eigen::VectorXd& upper, double tol, int max_pivots) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != n || upper.size() != n) {
    throw DomainError("solve_lp: dimension mismatch");
  }
  if (m > 0 && b.minCoeff() < 0.0) throw DomainError("solve_lp: right-hand side must be nonnegative");

  LpResult res;
  res.pivots = 0;
  // Perturbed right-hand side first: degenerate vertices (b = 0 rows) otherwise
  // stall for thousands of pivots. The final basis is then checked against b.
  Eigen::VectorXd bp(m);
  for (int i = 0; i < m; ++i) bp(i) = b(i) + 1e-7 * (1.0 + std::abs(b(i))) * jitter(i);
  Tableau tab(A, bp, c, upper);
  LpStatus st = tab.run(tol, max_pivots, res.pivots);
  if (st == LpStatus::optimal) {
    const Eigen::VectorXd exact = tab.basic_values(b);
    if (m == 0 || exact.minCoeff() >= -tol) {
      tab.beta = exact;
    } else {
      st = LpStatus::iteration_limit;
    }
    for (int i = 0; i < m && st == LpStatus::optimal; ++i) {
      const int bv = tab.basis[i];
      if (std::isfinite(tab.ub(bv)) && tab.beta(i) > tab.ub(bv) + tol) st = LpStatus::iteration_limit;
    }
  }
  if (st != LpStatus::optimal && st != LpStatus::unbounded) {
    tab = Tableau(A, b, c, upper);
    st = tab.run(tol, max_pivots, res.pivots);
  }
  res.status = st;

  const Eigen::VectorXd all = tab.solution();
  res.x = all.head(n).cwiseMax(0.0);
  for (int j = 0; j < n; ++j) res.x(j) = std::min(res.x(j), upper(j));
  res.duals = -tab.d.tail(m);
  res.objective = c.dot(res.x);
  return res;
}

}  // namespace gestat
