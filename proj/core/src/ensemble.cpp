#include "gestat/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "gestat/errors.hpp"

namespace gestat {

namespace {

std::mt19937_64 stream_engine(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream, 0x9e3779b9u};
  return std::mt19937_64(seq);
}

Eigen::VectorXd bernoulli_vector(int C, double prob, std::uint64_t seed, std::uint32_t stream) {
  auto eng = stream_engine(seed, stream);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd v(C);
  for (int c = 0; c < C; ++c) v(c) = u(eng) < prob ? 1.0 : 0.0;
  return v;
}

std::string expect_token(std::istream& is, const char* what) {
  std::string tok;
  if (!(is >> tok)) throw DomainError(std::string("economy file: missing ") + what);
  return tok;
}

double read_double(std::istream& is, const char* what) {
  const std::string tok = expect_token(is, what);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size()) throw DomainError(std::string("economy file: bad number for ") + what);
  return v;
}

void expect_keyword(std::istream& is, const std::string& key) {
  if (expect_token(is, key.c_str()) != key) {
    throw DomainError("economy file: expected '" + key + "'");
  }
}

}  // namespace

void EnsembleParams::validate() const {
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("n must be positive");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("eps must be positive");
  if (!(pi >= 0.0 && pi <= 1.0)) throw DomainError("pi must lie in [0, 1]");
  if (!(f >= 0.0 && f <= 1.0)) throw DomainError("f must lie in [0, 1]");
}

int EconomyInstance::primary_count() const { return static_cast<int>(x0.sum() + 0.5); }
int EconomyInstance::final_count() const { return static_cast<int>(k.sum() + 0.5); }

Eigen::MatrixXd sample_technologies(int N, int C, double eps, std::uint64_t seed) {
  if (N < 1 || C < 2) throw DomainError("sample_technologies: need N >= 1 and C >= 2");
  auto eng = stream_engine(seed, 0);
  std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(static_cast<double>(C)));
  Eigen::MatrixXd q(N, C);
  for (int i = 0; i < N; ++i)
    for (int c = 0; c < C; ++c) q(i, c) = g(eng);
  // Mean shift of each technology onto sum_c q(i, c) = -eps.
  const Eigen::VectorXd shift = (q.rowwise().sum().array() + eps) / C;
  q.colwise() -= shift;
  return q;
}

EconomyInstance sample_economy(const EnsembleParams& params, int C, std::uint64_t seed) {
  params.validate();
  if (C < 2) throw DomainError("sample_economy: C must be at least 2");
  const long N = std::lround(params.n * C);
  if (N < 1) throw DomainError("sample_economy: round(n C) must be at least 1");
  EconomyInstance e;
  e.N = static_cast<int>(N);
  e.C = C;
  e.eps = params.eps;
  e.seed = seed;
  e.q = sample_technologies(e.N, C, params.eps, seed);
  e.x0 = bernoulli_vector(C, params.pi, seed, 1);
  e.k = bernoulli_vector(C, params.f, seed, 2);
  return e;
}

EnsembleParams intermediate_sweep_map(double f_over_n, double pi_over_n, double i, double eps) {
  if (!(i >= 0.0 && i < 1.0)) throw DomainError("intermediate fraction must lie in [0, 1)");
  if (!(f_over_n >= 0.0) || !(pi_over_n >= 0.0) || f_over_n + pi_over_n <= 0.0) {
    throw DomainError("f/n and pi/n must be nonnegative and not both zero");
  }
  // (1 - a n)(1 - b n) = i, smaller root so that f, pi <= 1.
  const double a = f_over_n, b = pi_over_n;
  const double disc = (a - b) * (a - b) + 4.0 * a * b * i;
  EnsembleParams p;
  p.n = 2.0 * (1.0 - i) / ((a + b) + std::sqrt(disc));
  p.f = std::min(1.0, a * p.n);
  p.pi = std::min(1.0, b * p.n);
  p.eps = eps;
  p.validate();
  if (std::abs((1.0 - p.f) * (1.0 - p.pi) - i) > 1e-12) {
    throw DomainError("intermediate_sweep_map: no valid (n, pi, f) triple");
  }
  return p;
}

void write_economy(std::ostream& os, const EconomyInstance& e) {
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  };
  os << "# gestat-economy v1\n";
  os << "N " << e.N << "\nC " << e.C << "\neps " << num(e.eps) << "\nseed " << e.seed << "\nq\n";
  for (int i = 0; i < e.N; ++i) {
    for (int c = 0; c < e.C; ++c) os << (c ? " " : "") << num(e.q(i, c));
    os << '\n';
  }
  os << "x0\n";
  for (int c = 0; c < e.C; ++c) os << (c ? " " : "") << num(e.x0(c));
  os << "\nk\n";
  for (int c = 0; c < e.C; ++c) os << (c ? " " : "") << num(e.k(c));
  os << '\n';
}

EconomyInstance read_economy(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# gestat-economy v1", 0) != 0) {
    throw DomainError("economy file: missing header line");
  }
  EconomyInstance e;
  expect_keyword(is, "N");
  e.N = static_cast<int>(read_double(is, "N"));
  expect_keyword(is, "C");
  e.C = static_cast<int>(read_double(is, "C"));
  if (e.N < 1 || e.C < 1) throw DomainError("economy file: bad dimensions");
  expect_keyword(is, "eps");
  e.eps = read_double(is, "eps");
  expect_keyword(is, "seed");
  e.seed = std::stoull(expect_token(is, "seed"));
  expect_keyword(is, "q");
  e.q.resize(e.N, e.C);
  for (int i = 0; i < e.N; ++i)
    for (int c = 0; c < e.C; ++c) e.q(i, c) = read_double(is, "q entry");
  expect_keyword(is, "x0");
  e.x0.resize(e.C);
  for (int c = 0; c < e.C; ++c) e.x0(c) = read_double(is, "x0 entry");
  expect_keyword(is, "k");
  e.k.resize(e.C);
  for (int c = 0; c < e.C; ++c) e.k(c) = read_double(is, "k entry");
  return e;
}

void save_economy(const std::string& path, const EconomyInstance& econ) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_economy(os, econ);
  if (!os) throw std::runtime_error("write failed for " + path);
}

EconomyInstance load_economy(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_economy(is);
}

}  // namespace gestat
