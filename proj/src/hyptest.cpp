#include "qforma/hyptest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "qforma/eigensolve.hpp"
#include "qforma/error.hpp"
#include "qforma/rng.hpp"
#include "qforma/sparse_class.hpp"

namespace qforma {

namespace {

struct KahanSum {
  double s = 0.0, c = 0.0;
  void add(double y) {
    y -= c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  double value() const { return s; }
};

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    fail(ErrorKind::domain, "alpha must lie in (0,1)");
}

void check_q(double q) {
  if (!(q > 2.0) || !std::isfinite(q))
    fail(ErrorKind::domain, "moment order requires q > 2");
}

void check_cq(double cq) {
  if (!(cq > 0.0) || !std::isfinite(cq))
    fail(ErrorKind::domain, "generic constant cq must be positive");
}

// Entries outside the diagonal blocks of the given size must vanish.
void check_block_structure(const SymmetricMatrix& x, int block,
                           const char* which) {
  const int p = x.dim();
  const double tol = 1e-12 * std::max(1.0, x.max_abs_entry());
  for (int j = 0; j < p; ++j)
    for (int l = 0; l < p; ++l)
      if (j / block != l / block && std::fabs(x(j, l)) > tol)
        fail(ErrorKind::bad_input,
             std::string(which) + " is not block-diagonal with block size " +
                 std::to_string(block));
}

}  // namespace

// ---- Data matrix IO ---------------------------------------------------------

DataMatrix read_data_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::bad_input, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorKind::bad_input, path + ": empty file");
  std::istringstream hdr(line);
  long long n = 0, p = 0;
  if (!(hdr >> n >> p) || n < 1 || p < 1 || p > kMaxDim)
    fail(ErrorKind::bad_input, path + ": header must be 'n p'");
  DataMatrix data;
  data.n = static_cast<int>(n);
  data.p = static_cast<int>(p);
  data.values.reserve(static_cast<std::size_t>(n) * p);
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      fail(ErrorKind::bad_input, path + ": expected " + std::to_string(n) +
                                     " rows, got " + std::to_string(i));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string tok;
    std::istringstream row(line);
    long long count = 0;
    while (std::getline(row, tok, ',')) {
      try {
        std::size_t pos = 0;
        data.values.push_back(std::stod(tok, &pos));
      } catch (...) {
        fail(ErrorKind::bad_input,
             path + ": bad value in row " + std::to_string(i + 1));
      }
      ++count;
    }
    if (count != p)
      fail(ErrorKind::bad_input,
           path + ": row " + std::to_string(i + 1) + " has " +
               std::to_string(count) + " fields, expected " +
               std::to_string(p));
  }
  for (double v : data.values)
    if (!std::isfinite(v))
      fail(ErrorKind::bad_input, path + ": data must be finite");
  return data;
}

void write_data_csv(const std::string& path, const DataMatrix& data) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::bad_input, "cannot write '" + path + "'");
  out << data.n << ' ' << data.p << '\n';
  char buf[40];
  for (int i = 0; i < data.n; ++i) {
    for (int j = 0; j < data.p; ++j) {
      if (j) out << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", data.at(i, j));
      out << buf;
    }
    out << '\n';
  }
  if (!out) fail(ErrorKind::bad_input, "write failed for '" + path + "'");
}

// ---- Hypothesis pairs -------------------------------------------------------

HypothesisPair HypothesisPair::block_pair(SymmetricMatrix a,
                                          SymmetricMatrix b, int m, int k) {
  if (m < 2 || m % 2 != 0)
    fail(ErrorKind::bad_input,
         "block hypothesis needs an even number of blocks m >= 2");
  if (k < 1) fail(ErrorKind::bad_input, "block size k must be >= 1");
  const long long p = static_cast<long long>(m) * k;
  if (a.dim() != p || b.dim() != p)
    fail(ErrorKind::bad_input, "matrices must be (m k) x (m k)");
  check_block_structure(a, 2 * k, "null precision A");
  check_block_structure(b, k, "alternative precision B");
  HypothesisPair pair(std::move(a), std::move(b), Structure::block_diagonal);
  pair.m = m;
  pair.k = k;
  return pair;
}

HypothesisPair HypothesisPair::sparse_pair(SymmetricMatrix b, double r,
                                           double m_p, double c0) {
  const SparseClassResult chk = is_in_sparse_class(b, r, m_p, c0);
  if (!chk.member)
    fail(ErrorKind::bad_input,
         "alternative precision is outside the sparse class: " + chk.witness);
  HypothesisPair pair(gen_identity(b.dim()), std::move(b), Structure::sparse);
  pair.r = r;
  pair.m_p = m_p;
  pair.c0 = c0;
  return pair;
}

HypothesisPair paper_block_pair(int m, int k) {
  if (m < 2 || m % 2 != 0)
    fail(ErrorKind::bad_input,
         "block hypothesis needs an even number of blocks m >= 2");
  if (k < 1) fail(ErrorKind::bad_input, "block size k must be >= 1");
  const long long pll = static_cast<long long>(m) * k;
  if (pll > kMaxDim) fail(ErrorKind::size, "m*k exceeds dimension cap");
  const int p = static_cast<int>(pll);
  std::vector<double> e(static_cast<std::size_t>(p) * p, 0.0);
  const int big = 2 * k;
  for (int blk = 0; blk < m / 2; ++blk) {
    const int off = blk * big;
    for (int j = 0; j < big; ++j)
      for (int l = 0; l < big; ++l)
        e[static_cast<std::size_t>(off + j) * p + (off + l)] =
            j == l ? 2.0 : 1.0;
  }
  return HypothesisPair::block_pair(SymmetricMatrix(p, std::move(e)),
                                    gen_identity(p), m, k);
}

// ---- Core statistics --------------------------------------------------------

SymmetricMatrix g_matrix(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  if (a.dim() != b.dim())
    fail(ErrorKind::bad_input, "hypothesis matrices must share a dimension");
  const int p = a.dim();
  const SymmetricMatrix root = inverse_sqrt(a);
  std::vector<double> diff(static_cast<std::size_t>(p) * p);
  for (int j = 0; j < p; ++j)
    for (int l = 0; l < p; ++l)
      diff[static_cast<std::size_t>(j) * p + l] = a(j, l) - b(j, l);
  // root * diff * root, then symmetrize.
  std::vector<double> tmp(static_cast<std::size_t>(p) * p, 0.0);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      const double rij = root(i, j);
      if (rij == 0.0) continue;
      const double* drow = diff.data() + static_cast<std::size_t>(j) * p;
      double* trow = tmp.data() + static_cast<std::size_t>(i) * p;
      for (int l = 0; l < p; ++l) trow[l] += rij * drow[l];
    }
  std::vector<double> prod(static_cast<std::size_t>(p) * p, 0.0);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      const double tij = tmp[static_cast<std::size_t>(i) * p + j];
      if (tij == 0.0) continue;
      double* prow = prod.data() + static_cast<std::size_t>(i) * p;
      for (int l = 0; l < p; ++l) prow[l] += tij * root(j, l);
    }
  std::vector<double> sym(static_cast<std::size_t>(p) * p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      sym[static_cast<std::size_t>(i) * p + j] =
          0.5 * (prod[static_cast<std::size_t>(i) * p + j] +
                 prod[static_cast<std::size_t>(j) * p + i]);
  return SymmetricMatrix(p, std::move(sym));
}

LrtStatistic lrt_statistic(const DataMatrix& data, const SymmetricMatrix& a,
                           const SymmetricMatrix& b) {
  if (a.dim() != b.dim())
    fail(ErrorKind::bad_input, "hypothesis matrices must share a dimension");
  if (data.p != a.dim())
    fail(ErrorKind::bad_input, "data dimension does not match the hypotheses");
  if (data.n < 1) fail(ErrorKind::bad_input, "need at least one observation");
  const int p = data.p;
  const double log_det_ratio = log_det_pd(b) - log_det_pd(a);
  KahanSum quad;
  for (int i = 0; i < data.n; ++i) {
    const auto x = data.row(i);
    KahanSum row_sum;
    for (int j = 0; j < p; ++j) {
      double dot = 0.0;
      for (int l = 0; l < p; ++l) dot += (a(j, l) - b(j, l)) * x[l];
      row_sum.add(x[j] * dot);
    }
    quad.add(row_sum.value());
  }
  LrtStatistic stat;
  stat.l_star = quad.value();
  stat.l_n = log_det_ratio + stat.l_star / static_cast<double>(data.n);
  return stat;
}

double gaussian_null_percentile(const SymmetricMatrix& g, long long n,
                                double alpha, long long n_draws,
                                std::uint64_t seed) {
  check_alpha(alpha);
  if (n < 1) fail(ErrorKind::domain, "sample size n must be >= 1");
  if (n_draws < 1) fail(ErrorKind::domain, "need at least one draw");
  const EigenDecomposition ed = eigendecompose(g);
  double dmax = 0.0;
  for (double d : ed.values) dmax = std::max(dmax, std::fabs(d));
  if (dmax == 0.0) return 0.0;
  std::vector<double> coef;
  for (double d : ed.values)
    if (std::fabs(d) > 1e-14 * dmax) coef.push_back(d);

  std::vector<double> draws(static_cast<std::size_t>(n_draws));
  const double dof = static_cast<double>(n);
  for (long long i = 0; i < n_draws; ++i) {
    CounterRng rng(seed, kStreamPercentile + static_cast<std::uint64_t>(i));
    double s = 0.0;
    for (double d : coef) s += d * rng.chi_square(dof);
    draws[static_cast<std::size_t>(i)] = s;
  }
  std::sort(draws.begin(), draws.end());
  long long idx = static_cast<long long>(
      std::ceil((1.0 - alpha) * static_cast<double>(n_draws)));
  idx = std::max<long long>(1, std::min(idx, n_draws));
  return draws[static_cast<std::size_t>(idx - 1)];
}

double conservative_theorem1_value(double tr_g, long long n, double u_p,
                                   double q, double alpha, double cq) {
  check_alpha(alpha);
  check_q(q);
  check_cq(cq);
  if (n < 1) fail(ErrorKind::domain, "sample size n must be >= 1");
  const double nd = static_cast<double>(n);
  if (u_p <= 0.0) return nd * tr_g;
  return nd * tr_g + std::sqrt(nd) * std::pow(cq * u_p / alpha, 1.0 / q);
}

ConservativeRegion conservative_region_theorem1(const SymmetricMatrix& g,
                                                long long n,
                                                const MomentProfile& prof,
                                                double alpha, double cq) {
  const BoundBreakdown bound = theorem1_bound(g, prof);
  ConservativeRegion region;
  if (bound.log_scale) {
    // U_p overflowed the linear scale; carry the exponent arithmetic in logs.
    check_alpha(alpha);
    check_cq(cq);
    if (n < 1) fail(ErrorKind::domain, "sample size n must be >= 1");
    const double nd = static_cast<double>(n);
    region.u_p = std::numeric_limits<double>::infinity();
    region.critical_value =
        nd * g.trace() +
        std::sqrt(nd) * std::exp((bound.structural_total + std::log(cq) -
                                  std::log(alpha)) /
                                 prof.q);
    return region;
  }
  region.u_p = bound.structural_total;
  region.degenerate = region.u_p <= 0.0;
  region.critical_value = conservative_theorem1_value(
      g.trace(), n, region.u_p, prof.q, alpha, cq);
  return region;
}

double conservative_sparse_value(double tr_g, long long n, int p, double q,
                                 double m_p, double alpha, double cq) {
  check_alpha(alpha);
  check_q(q);
  check_cq(cq);
  if (n < 1) fail(ErrorKind::domain, "sample size n must be >= 1");
  if (p < 1) fail(ErrorKind::size, "dimension must be >= 1");
  if (!(m_p >= 0.0)) fail(ErrorKind::domain, "M_p must be >= 0");
  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  const double width = std::sqrt(pd) +
                       std::pow(pd, 1.0 / (2.0 * q)) * std::sqrt(m_p);
  return nd * tr_g + std::sqrt(nd) * width * std::pow(cq / alpha, 1.0 / q);
}

double conservative_region_sparse(const SymmetricMatrix& g, long long n,
                                  double q, double m_p, double alpha,
                                  double cq) {
  return conservative_sparse_value(g.trace(), n, g.dim(), q, m_p, alpha, cq);
}

double baseline_bs_value(double tr_g, long long n, int p, double q,
                         double m_p, double alpha, double cq) {
  check_alpha(alpha);
  check_q(q);
  check_cq(cq);
  if (n < 1) fail(ErrorKind::domain, "sample size n must be >= 1");
  if (p < 1) fail(ErrorKind::size, "dimension must be >= 1");
  if (!(m_p >= 0.0)) fail(ErrorKind::domain, "M_p must be >= 0");
  const double nd = static_cast<double>(n);
  return nd * tr_g + std::sqrt(nd * static_cast<double>(p) * m_p) *
                         std::pow(cq / alpha, 1.0 / q);
}

double baseline_bs_region(const SymmetricMatrix& g, long long n, double q,
                          double m_p, double alpha, double cq) {
  return baseline_bs_value(g.trace(), n, g.dim(), q, m_p, alpha, cq);
}

DataMatrix simulate_observations(const SymmetricMatrix& omega,
                                 const ComponentDistribution& dist,
                                 long long n, std::uint64_t seed) {
  if (n < 1) fail(ErrorKind::domain, "need at least one observation");
  const int p = omega.dim();
  const SymmetricMatrix root = inverse_sqrt(omega);
  DataMatrix data;
  data.n = static_cast<int>(n);
  data.p = p;
  data.values.resize(static_cast<std::size_t>(n) * p);
  std::vector<double> y(p);
  for (long long i = 0; i < n; ++i) {
    CounterRng rng(seed, kStreamObservations + static_cast<std::uint64_t>(i));
    for (int j = 0; j < p; ++j) y[j] = dist.sample(rng);
    double* x = data.values.data() + static_cast<std::size_t>(i) * p;
    for (int j = 0; j < p; ++j) {
      double dot = 0.0;
      for (int l = 0; l < p; ++l) dot += root(j, l) * y[l];
      x[j] = dot;
    }
  }
  return data;
}

std::string test_method_name(TestMethod method) {
  switch (method) {
    case TestMethod::gaussian_mc_percentile: return "gaussian_mc_percentile";
    case TestMethod::conservative_theorem1: return "conservative_theorem1";
    case TestMethod::conservative_corollary1: return "conservative_corollary1";
  }
  return "unknown";
}

TestMethod parse_test_method(const std::string& name) {
  if (name == "gaussian_mc_percentile") return TestMethod::gaussian_mc_percentile;
  if (name == "conservative_theorem1") return TestMethod::conservative_theorem1;
  if (name == "conservative_corollary1")
    return TestMethod::conservative_corollary1;
  fail(ErrorKind::bad_input, "unknown test method '" + name + "'");
}

TestOutcome run_test(const DataMatrix& data, const HypothesisPair& pair,
                     const TestParams& params) {
  check_alpha(params.alpha);
  if (data.p != pair.a.dim())
    fail(ErrorKind::bad_input, "data dimension does not match the hypotheses");
  const LrtStatistic stat = lrt_statistic(data, pair.a, pair.b);

  double critical = 0.0;
  if (params.critical_value) {
    critical = *params.critical_value;
  } else {
    switch (params.method) {
      case TestMethod::gaussian_mc_percentile: {
        const SymmetricMatrix g = g_matrix(pair.a, pair.b);
        critical = gaussian_null_percentile(g, data.n, params.alpha,
                                            params.n_draws, params.seed);
        break;
      }
      case TestMethod::conservative_theorem1: {
        const SymmetricMatrix g = g_matrix(pair.a, pair.b);
        critical = conservative_region_theorem1(g, data.n, params.prof,
                                                params.alpha, params.cq)
                       .critical_value;
        break;
      }
      case TestMethod::conservative_corollary1: {
        if (pair.structure != HypothesisPair::Structure::sparse)
          fail(ErrorKind::bad_input,
               "the sparse-class region needs a sparse hypothesis pair");
        const SymmetricMatrix g = g_matrix(pair.a, pair.b);
        critical = conservative_region_sparse(g, data.n, params.q, pair.m_p,
                                              params.alpha, params.cq);
        break;
      }
    }
  }

  TestOutcome out;
  out.l_n = stat.l_n;
  out.l_star = stat.l_star;
  out.critical_value = critical;
  out.alpha = params.alpha;
  out.reject = stat.l_star > critical;
  out.method = test_method_name(params.method);
  return out;
}

double calibrate_lstar_moment(const HypothesisPair& pair,
                              const ComponentDistribution& dist, long long n,
                              double q, int n_replicates,
                              std::uint64_t seed_base) {
  if (!(q > 0.0)) fail(ErrorKind::domain, "moment order requires q > 0");
  if (n_replicates < 1)
    fail(ErrorKind::domain, "need at least one calibration replicate");
  const SymmetricMatrix g = g_matrix(pair.a, pair.b);
  const double center = static_cast<double>(n) * g.trace();
  KahanSum acc;
  for (int rep = 0; rep < n_replicates; ++rep) {
    const DataMatrix data = simulate_observations(
        pair.a, dist, n, seed_base + static_cast<std::uint64_t>(rep));
    const LrtStatistic stat = lrt_statistic(data, pair.a, pair.b);
    acc.add(std::pow(std::fabs(stat.l_star - center), q));
  }
  return acc.value() / static_cast<double>(n_replicates);
}

}  // namespace qforma
