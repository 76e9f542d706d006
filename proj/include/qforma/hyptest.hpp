#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qforma/bounds.hpp"
#include "qforma/matrix.hpp"
#include "qforma/montecarlo.hpp"

namespace qforma {

// Observations, one row per sample vector.
// File format: CSV, first line "n p", then n rows of p values.
struct DataMatrix {
  int n = 0, p = 0;
  std::vector<double> values;  // row-major

  double at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * p + j];
  }
  std::span<const double> row(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * p,
            static_cast<std::size_t>(p)};
  }
};
DataMatrix read_data_csv(const std::string& path);
void write_data_csv(const std::string& path, const DataMatrix& data);

// Precision-matrix hypothesis pair H0: Omega = A vs H1: Omega = B.
//
// block_diagonal structure: A has m/2 diagonal blocks of size 2k, B has m
// blocks of size k, p = mk, m even (merging adjacent coordinate clusters).
// sparse structure: A = Id and B is a member of the sparse class
// G_r(M_p) with spectral radius at most C0.
struct HypothesisPair {
  enum class Structure { block_diagonal, sparse };

  SymmetricMatrix a, b;
  Structure structure;
  int m = 0, k = 0;                     // block_diagonal tag
  double r = 0.0, m_p = 0.0, c0 = 0.0;  // sparse tag

  static HypothesisPair block_pair(SymmetricMatrix a, SymmetricMatrix b,
                                   int m, int k);
  static HypothesisPair sparse_pair(SymmetricMatrix b, double r, double m_p,
                                    double c0);

 private:
  HypothesisPair(SymmetricMatrix a_in, SymmetricMatrix b_in, Structure s)
      : a(std::move(a_in)), b(std::move(b_in)), structure(s) {}
};

// The worked block pair used throughout: A = diag of m/2 blocks
// (Id_{2k} + ones_{2k}), B = Id_p. Both positive definite; A couples
// adjacent k-clusters pairwise, B keeps them independent.
HypothesisPair paper_block_pair(int m, int k);

// G = A^{-1/2} (A - B) A^{-1/2}, symmetrized against rounding skew.
SymmetricMatrix g_matrix(const SymmetricMatrix& a, const SymmetricMatrix& b);

// Quasi-likelihood-ratio statistic of the data against (A, B):
//   L_n   = log det(B A^{-1}) + (1/n) sum_i x_i^T (A - B) x_i
//   L*    = n (L_n - log det(B A^{-1})) = sum_i x_i^T (A - B) x_i
struct LrtStatistic {
  double l_n = 0.0;
  double l_star = 0.0;
};
LrtStatistic lrt_statistic(const DataMatrix& data, const SymmetricMatrix& a,
                           const SymmetricMatrix& b);

// Monte Carlo (1-alpha)-quantile of the Gaussian null law of L*,
// sum_j d_j chi2_j(n) with d_j the eigenvalues of G; order statistic at
// index ceil((1-alpha) n_draws) of the sorted draws, substream per draw.
double gaussian_null_percentile(const SymmetricMatrix& g, long long n,
                                double alpha, long long n_draws,
                                std::uint64_t seed);

// Conservative critical value n tr(G) + sqrt(n) (cq U_p / alpha)^{1/q},
// U_p = theorem-style structural total of G under prof (q = prof.q).
// U_p = 0 degenerates to n tr(G).
struct ConservativeRegion {
  double critical_value = 0.0;
  double u_p = 0.0;
  bool degenerate = false;
};
ConservativeRegion conservative_region_theorem1(const SymmetricMatrix& g,
                                                long long n,
                                                const MomentProfile& prof,
                                                double alpha, double cq);
// Pure-formula version for precomputed U_p.
double conservative_theorem1_value(double tr_g, long long n, double u_p,
                                   double q, double alpha, double cq);

// Sparse-alternative critical value
//   n tr(G) + sqrt(n) (p^{1/2} + p^{1/(2q)} M_p^{1/2}) (cq/alpha)^{1/q}.
double conservative_region_sparse(const SymmetricMatrix& g, long long n,
                                  double q, double m_p, double alpha,
                                  double cq);
double conservative_sparse_value(double tr_g, long long n, int p, double q,
                                 double m_p, double alpha, double cq);

// The comparison region derived from the Frobenius-scale bound instead:
//   n tr(G) + (n p M_p)^{1/2} (cq/alpha)^{1/q}.
double baseline_bs_region(const SymmetricMatrix& g, long long n, double q,
                          double m_p, double alpha, double cq);
double baseline_bs_value(double tr_g, long long n, int p, double q,
                         double m_p, double alpha, double cq);

// Rows x_i = Omega^{-1/2} y_i with y_i components iid from dist; row i uses
// the (seed, row) substream.
DataMatrix simulate_observations(const SymmetricMatrix& omega,
                                 const ComponentDistribution& dist,
                                 long long n, std::uint64_t seed);

enum class TestMethod {
  gaussian_mc_percentile,
  conservative_theorem1,
  conservative_corollary1
};
std::string test_method_name(TestMethod method);
TestMethod parse_test_method(const std::string& name);

struct TestParams {
  TestMethod method = TestMethod::gaussian_mc_percentile;
  double alpha = 0.05;
  MomentProfile prof;           // conservative_theorem1 (q = prof.q)
  double q = 4.0;               // conservative_corollary1
  double cq = 1.0;
  long long n_draws = 200000;   // gaussian_mc_percentile
  std::uint64_t seed = 0;
  // Reuse a precomputed critical value (e.g. across replicates sharing one
  // hypothesis pair).
  std::optional<double> critical_value;
};

struct TestOutcome {
  double l_n = 0.0;
  double l_star = 0.0;
  double critical_value = 0.0;
  double alpha = 0.0;
  bool reject = false;
  std::string method;
};

TestOutcome run_test(const DataMatrix& data, const HypothesisPair& pair,
                     const TestParams& params);

// Empirical q-th moment of L* - n tr(G) over n_replicates H0 datasets
// (Omega = pair.a, replicate r seeded seed_base + r, the same pipeline
// run_test uses). Dividing by n^{q/2} U_p turns it into a calibrated cq:
// conservative_region_theorem1 with that cq yields the critical value
// n tr(G) + (m_hat/alpha)^{1/q}, whose level on the calibration sample is
// at most alpha by Markov on the empirical measure.
double calibrate_lstar_moment(const HypothesisPair& pair,
                              const ComponentDistribution& dist, long long n,
                              double q, int n_replicates,
                              std::uint64_t seed_base);

}  // namespace qforma
