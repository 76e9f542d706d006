#include "qforma/montecarlo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "qforma/error.hpp"
#include "qforma/rng.hpp"

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

// ---- Gauss-Legendre quadrature -------------------------------------------

struct GaussRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;
};

// Nodes as Legendre roots by Newton iteration; deterministic and accurate
// to ~1e-15 for moderate n.
GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

const GaussRule& rule64() {
  static const GaussRule rule = gauss_legendre(64);
  return rule;
}

template <class F>
double integrate_panel(F&& f, double a, double b) {
  const GaussRule& r = rule64();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  KahanSum s;
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    s.add(r.weights[i] * f(mid + half * r.nodes[i]));
  return half * s.value();
}

template <class F>
double integrate(F&& f, const std::vector<double>& breaks) {
  KahanSum s;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    s.add(integrate_panel(f, breaks[i], breaks[i + 1]));
  return s.value();
}

std::vector<double> geometric_breaks(double first, double last) {
  std::vector<double> b{0.0, first};
  for (double x = first * 2.0; x < last; x *= 2.0) b.push_back(x);
  b.push_back(last);
  return b;
}

// ---- nu_q = ||X^2 - 1||_q by quadrature ----------------------------------

double nu_q_pow_gaussian(double q) {
  const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const auto f = [&](double x) {
    return std::pow(std::fabs(x * x - 1.0), q) *
           std::exp(-0.5 * x * x) * inv_sqrt2pi;
  };
  std::vector<double> breaks = geometric_breaks(1.0, 44.0);
  return 2.0 * integrate(f, breaks);
}

double nu_q_pow_uniform(double q) {
  const double root3 = std::sqrt(3.0);
  const auto f = [&](double x) {
    return std::pow(std::fabs(x * x - 1.0), q);
  };
  return integrate(f, {0.0, 1.0, root3}) / root3;
}

double nu_q_pow_exponential(double q) {
  // X = E - 1, X^2 - 1 = E(E - 2); integrate over the Exp(1) variable.
  const auto f = [&](double e) {
    return std::pow(std::fabs(e * (e - 2.0)), q) * std::exp(-e);
  };
  return integrate(f, geometric_breaks(2.0, 256.0));
}

double nu_q_pow_student_t(double q, double df) {
  const double scale = std::sqrt(df / (df - 2.0));  // X = T / scale
  const double log_norm = std::lgamma(0.5 * (df + 1.0)) -
                          std::lgamma(0.5 * df) -
                          0.5 * std::log(df * std::numbers::pi);
  const auto density = [&](double x) {
    const double t = x * scale;
    return scale * std::exp(log_norm -
                            0.5 * (df + 1.0) * std::log1p(t * t / df));
  };
  const auto f = [&](double x) {
    return std::pow(std::fabs(x * x - 1.0), q) * density(x);
  };
  const double x0 = 50.0;
  const double head = integrate(f, geometric_breaks(1.0, x0));
  // Tail x in (x0, inf) via x = x0/u^2: du-integrand is algebraic in u with
  // exponent 2(df - 2q) - 1 >= 0 under df >= 2q + 0.5, so it stays bounded.
  const auto tail_f = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double x = x0 / (u * u);
    return f(x) * 2.0 * x0 / (u * u * u);
  };
  const double tail =
      integrate(tail_f, {0.0, 1.0 / 64, 1.0 / 16, 0.25, 0.5, 1.0});
  return 2.0 * (head + tail);
}

}  // namespace

// ---- ComponentDistribution ------------------------------------------------

ComponentDistribution ComponentDistribution::parse(const std::string& text) {
  ComponentDistribution d;
  if (text == "gaussian") {
    d.tag = Tag::gaussian;
  } else if (text == "rademacher") {
    d.tag = Tag::rademacher;
  } else if (text == "centered_exponential") {
    d.tag = Tag::centered_exponential;
  } else if (text == "uniform" || text == "uniform_standardized") {
    d.tag = Tag::uniform_standardized;
  } else if (text.rfind("student_t(", 0) == 0 && text.back() == ')') {
    d.tag = Tag::student_t;
    const std::string num = text.substr(10, text.size() - 11);
    try {
      std::size_t pos = 0;
      d.df = std::stod(num, &pos);
      if (pos != num.size()) throw 0;
    } catch (...) {
      fail(ErrorKind::bad_input,
           "bad degrees of freedom in distribution '" + text + "'");
    }
    if (!(d.df > 2.0) || !std::isfinite(d.df))
      fail(ErrorKind::domain, "student_t needs df > 2 for unit variance");
  } else {
    fail(ErrorKind::bad_input,
         "unknown distribution '" + text +
             "' (expected gaussian, rademacher, student_t(df), "
             "centered_exponential, uniform)");
  }
  return d;
}

std::string ComponentDistribution::name() const {
  switch (tag) {
    case Tag::gaussian: return "gaussian";
    case Tag::rademacher: return "rademacher";
    case Tag::centered_exponential: return "centered_exponential";
    case Tag::uniform_standardized: return "uniform";
    case Tag::student_t: {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "student_t(%g)", df);
      return buf;
    }
  }
  return "unknown";
}

bool ComponentDistribution::has_moment(double w) const {
  return tag != Tag::student_t || w < df;
}

double ComponentDistribution::abs_moment(double w) const {
  if (!(w >= 0.0)) fail(ErrorKind::domain, "moment order must be >= 0");
  switch (tag) {
    case Tag::gaussian:
      // E|Z|^w = 2^{w/2} Gamma((w+1)/2) / sqrt(pi)
      return std::exp(0.5 * w * std::numbers::ln2 +
                      std::lgamma(0.5 * (w + 1.0)) -
                      0.5 * std::log(std::numbers::pi));
    case Tag::rademacher:
      return 1.0;
    case Tag::uniform_standardized:
      // |X| ~ U[0, sqrt(3)]: E|X|^w = 3^{w/2} / (w + 1)
      return std::pow(3.0, 0.5 * w) / (w + 1.0);
    case Tag::centered_exponential: {
      // E|E-1|^w = e^{-1} (Gamma(w+1) + int_0^1 u^w e^u du), the integral
      // summed as sum_k 1/(k! (w+k+1)).
      KahanSum s;
      double kfact = 1.0;
      for (int k = 0; k < 40; ++k) {
        if (k > 0) kfact *= k;
        s.add(1.0 / (kfact * (w + k + 1.0)));
      }
      return (std::tgamma(w + 1.0) + s.value()) / std::numbers::e;
    }
    case Tag::student_t: {
      if (!(w < df))
        fail(ErrorKind::insufficient_moments,
             "student_t with df=" + std::to_string(df) +
                 " lacks the order-" + std::to_string(w) + " moment");
      // standardized: (df-2)^{w/2} G((w+1)/2) G((df-w)/2) / (sqrt(pi) G(df/2))
      return std::exp(0.5 * w * std::log(df - 2.0) +
                      std::lgamma(0.5 * (w + 1.0)) +
                      std::lgamma(0.5 * (df - w)) -
                      0.5 * std::log(std::numbers::pi) -
                      std::lgamma(0.5 * df));
    }
  }
  fail(ErrorKind::bad_input, "unhandled distribution tag");
}

double ComponentDistribution::sample(CounterRng& rng) const {
  switch (tag) {
    case Tag::gaussian:
      return rng.normal();
    case Tag::rademacher:
      return rng.uniform01() < 0.5 ? -1.0 : 1.0;
    case Tag::uniform_standardized:
      return (2.0 * rng.uniform01() - 1.0) * std::sqrt(3.0);
    case Tag::centered_exponential:
      return -std::log(rng.uniform01_open()) - 1.0;
    case Tag::student_t: {
      const double z = rng.normal();
      const double v = rng.chi_square(df);
      return z / std::sqrt(v / df) / std::sqrt(df / (df - 2.0));
    }
  }
  fail(ErrorKind::bad_input, "unhandled distribution tag");
}

MomentProfile analytic_profile(const ComponentDistribution& dist, double q) {
  if (!(q > 2.0) || !std::isfinite(q))
    fail(ErrorKind::domain, "moment order requires q > 2");
  if (dist.tag == ComponentDistribution::Tag::student_t &&
      dist.df < 2.0 * q + 0.5)
    fail(ErrorKind::insufficient_moments,
         "student_t needs df >= 2q + 0.5 (df=" + std::to_string(dist.df) +
             ", q=" + std::to_string(q) + ")");
  MomentProfile prof;
  prof.q = q;
  prof.kappa2 = 1.0;  // standardized components
  prof.kappa4 = std::pow(dist.abs_moment(4.0), 0.25);
  prof.kappa2q = std::pow(dist.abs_moment(2.0 * q), 0.5 / q);
  switch (dist.tag) {
    case ComponentDistribution::Tag::rademacher:
      prof.nu_q = 0.0;
      break;
    case ComponentDistribution::Tag::gaussian:
      prof.nu_q = std::pow(nu_q_pow_gaussian(q), 1.0 / q);
      break;
    case ComponentDistribution::Tag::uniform_standardized:
      prof.nu_q = std::pow(nu_q_pow_uniform(q), 1.0 / q);
      break;
    case ComponentDistribution::Tag::centered_exponential:
      prof.nu_q = std::pow(nu_q_pow_exponential(q), 1.0 / q);
      break;
    case ComponentDistribution::Tag::student_t:
      prof.nu_q = std::pow(nu_q_pow_student_t(q, dist.df), 1.0 / q);
      break;
  }
  prof.source = dist.name();
  prof.validate();
  return prof;
}

// ---- Sampling --------------------------------------------------------------

std::vector<double> sample_quadform_deviations(const SymmetricMatrix& a,
                                               const ComponentDistribution& dist,
                                               long long n_samples,
                                               std::uint64_t seed) {
  if (n_samples < 0) fail(ErrorKind::domain, "sample count must be >= 0");
  const int p = a.dim();
  const double tr = a.trace();
  std::vector<double> x(p);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  for (long long i = 0; i < n_samples; ++i) {
    CounterRng rng(seed, kStreamQuadform + static_cast<std::uint64_t>(i));
    for (int j = 0; j < p; ++j) x[j] = dist.sample(rng);
    KahanSum quad;
    for (int j = 0; j < p; ++j) {
      const auto row = a.row(j);
      double dot = 0.0;
      for (int k = 0; k < p; ++k) dot += row[k] * x[k];
      quad.add(x[j] * dot);
    }
    out.push_back(quad.value() - tr);
  }
  return out;
}

EmpiricalMoment empirical_moment_from_stream(std::span<const double> values,
                                             double q, std::uint64_t seed) {
  if (!(q > 0.0)) fail(ErrorKind::domain, "moment order requires q > 0");
  const long long n = static_cast<long long>(values.size());
  if (n < 32)
    fail(ErrorKind::too_few_samples,
         "need at least 32 samples for the batch-means standard error");
  KahanSum total;
  for (double v : values) total.add(std::pow(std::fabs(v), q));
  EmpiricalMoment m;
  m.estimate = total.value() / static_cast<double>(n);
  m.n_samples = n;
  m.seed = seed;
  m.q = q;

  const long long batch = n / 32;
  std::vector<double> means(32);
  for (int b = 0; b < 32; ++b) {
    KahanSum s;
    for (long long i = b * batch; i < (b + 1) * batch; ++i)
      s.add(std::pow(std::fabs(values[static_cast<std::size_t>(i)]), q));
    means[b] = s.value() / static_cast<double>(batch);
  }
  double mbar = 0.0;
  for (double v : means) mbar += v;
  mbar /= 32.0;
  double var = 0.0;
  for (double v : means) var += (v - mbar) * (v - mbar);
  var /= 31.0;
  m.std_error = std::sqrt(var / 32.0);
  return m;
}

EmpiricalMoment empirical_moment(const SymmetricMatrix& a,
                                 const ComponentDistribution& dist, double q,
                                 long long n_samples, std::uint64_t seed) {
  const std::vector<double> values =
      sample_quadform_deviations(a, dist, n_samples, seed);
  return empirical_moment_from_stream(values, q, seed);
}

// ---- Exact rademacher oracle ----------------------------------------------

double exact_moment_rademacher(const SymmetricMatrix& a, double q) {
  if (!(q > 0.0)) fail(ErrorKind::domain, "moment order requires q > 0");
  const int p = a.dim();
  if (p > 20)
    fail(ErrorKind::size, "exact enumeration limited to p <= 20");
  const double tr = a.trace();
  std::vector<double> x(p, 1.0);
  std::vector<double> y(p);  // y = A x
  double quad = 0.0;
  {
    KahanSum qsum;
    for (int j = 0; j < p; ++j) {
      const auto row = a.row(j);
      double dot = 0.0;
      for (int k = 0; k < p; ++k) dot += row[k] * x[k];
      y[j] = dot;
      qsum.add(x[j] * dot);
    }
    quad = qsum.value();
  }
  const std::uint64_t count = 1ULL << p;
  KahanSum acc;
  acc.add(std::pow(std::fabs(quad - tr), q));
  for (std::uint64_t i = 1; i < count; ++i) {
    const int j = std::countr_zero(i);  // Gray-code flip position
    const double xj = x[j];
    quad += -4.0 * xj * y[j] + 4.0 * a(j, j);
    for (int k = 0; k < p; ++k) y[k] -= 2.0 * xj * a(k, j);
    x[j] = -xj;
    // Periodically recompute the running form to cancel drift.
    if ((i & 0xFFF) == 0) {
      KahanSum qsum;
      for (int r = 0; r < p; ++r) {
        const auto row = a.row(r);
        double dot = 0.0;
        for (int k = 0; k < p; ++k) dot += row[k] * x[k];
        y[r] = dot;
        qsum.add(x[r] * dot);
      }
      quad = qsum.value();
    }
    acc.add(std::pow(std::fabs(quad - tr), q));
  }
  return acc.value() / static_cast<double>(count);
}

// ---- Markov check -----------------------------------------------------------

MarkovCheck markov_tail_check(std::span<const double> values, double q,
                              double r) {
  if (!(r > 0.0)) fail(ErrorKind::domain, "threshold r must be > 0");
  if (!(q > 0.0)) fail(ErrorKind::domain, "moment order requires q > 0");
  const double n = static_cast<double>(values.size());
  MarkovCheck chk;
  if (values.empty()) return chk;
  long long tail = 0;
  KahanSum total;
  for (double v : values) {
    if (std::fabs(v) >= r) ++tail;
    total.add(std::pow(std::fabs(v), q));
  }
  const double rq = std::pow(r, q);
  chk.tail_fraction = static_cast<double>(tail) / n;
  chk.moment_over_rq = (total.value() / n) / rq;
  // count-form comparison avoids the division rounding
  chk.holds = static_cast<double>(tail) * rq <= total.value();
  return chk;
}

void write_stream(const std::string& path, std::span<const double> values,
                  std::uint64_t seed, const std::string& dist_name, int p,
                  double q) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::bad_input, "cannot write '" + path + "'");
  char buf[64];
  out << "# seed=" << seed << " dist=" << dist_name << " p=" << p;
  std::snprintf(buf, sizeof(buf), " q=%.17g\n", q);
  out << buf;
  for (double v : values) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    out << buf;
  }
  if (!out) fail(ErrorKind::bad_input, "write failed for '" + path + "'");
}

}  // namespace qforma
