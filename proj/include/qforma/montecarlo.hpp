#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qforma/bounds.hpp"
#include "qforma/matrix.hpp"

namespace qforma {

// Law of one iid component X, standardized to mean 0 and variance 1.
//   gaussian              N(0,1)
//   rademacher            +/-1 with probability 1/2
//   student_t(df)         t_df / sqrt(df/(df-2)), df > 2
//   centered_exponential  Exp(1) - 1
//   uniform               U[-sqrt(3), sqrt(3)]
struct ComponentDistribution {
  enum class Tag {
    gaussian,
    rademacher,
    student_t,
    centered_exponential,
    uniform_standardized
  };
  Tag tag = Tag::gaussian;
  double df = 0.0;  // student_t only

  static ComponentDistribution parse(const std::string& text);
  std::string name() const;

  // E|X|^w exists (student_t needs w < df).
  bool has_moment(double w) const;
  // E|X|^w by closed form.
  double abs_moment(double w) const;
  // One standardized draw.
  double sample(class CounterRng& rng) const;
};

// kappa_w = abs_moment(w)^{1/w} and nu_q = (E|X^2-1|^q)^{1/q}; nu_q uses
// composite Gauss-Legendre quadrature (panels split at the |.| kinks,
// algebraic tail substitution for student_t) when no closed form applies,
// to ~1e-8 relative. student_t requires df >= 2q + 0.5 so kappa_{2q} stays
// finite and well-conditioned.
MomentProfile analytic_profile(const ComponentDistribution& dist, double q);

struct EmpiricalMoment {
  double estimate = 0.0;
  double std_error = 0.0;
  long long n_samples = 0;
  std::uint64_t seed = 0;
  double q = 0.0;
};

// n_samples values of x^T A x - tr(A), x with iid components from dist.
// Sample i draws from the substream (seed, sample index i), so the stream
// is deterministic in (seed, n_samples, p) and order-independent.
std::vector<double> sample_quadform_deviations(const SymmetricMatrix& a,
                                               const ComponentDistribution& dist,
                                               long long n_samples,
                                               std::uint64_t seed);

// (1/N) sum |v_i|^q with a 32-batch-means standard error; requires
// n >= 32. When N is not a multiple of 32 the estimate still uses every
// value and the batches use the first 32*floor(N/32) of them.
EmpiricalMoment empirical_moment_from_stream(std::span<const double> values,
                                             double q, std::uint64_t seed);
EmpiricalMoment empirical_moment(const SymmetricMatrix& a,
                                 const ComponentDistribution& dist, double q,
                                 long long n_samples, std::uint64_t seed);

// Exact E|x^T A x - tr(A)|^q for rademacher components by enumerating all
// 2^p sign vectors in Gray-code order; p <= 20.
double exact_moment_rademacher(const SymmetricMatrix& a, double q);

// Markov's inequality on the empirical measure:
//   #{|v_i| >= r}/N  <=  ((1/N) sum |v_i|^q) / r^q.
// This is an identity, so holds is expected true on every stream.
struct MarkovCheck {
  double tail_fraction = 0.0;
  double moment_over_rq = 0.0;
  bool holds = true;
};
MarkovCheck markov_tail_check(std::span<const double> values, double q,
                              double r);

// One value per line, 17 significant digits, after the header line
// "# seed=... dist=... p=... q=...".
void write_stream(const std::string& path, std::span<const double> values,
                  std::uint64_t seed, const std::string& dist_name, int p,
                  double q);

inline constexpr long long kDefaultSamples = 200000;

}  // namespace qforma
