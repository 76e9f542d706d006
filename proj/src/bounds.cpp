#include "qforma/bounds.hpp"

#include <cmath>
#include <limits>

#include "qforma/eigensolve.hpp"
#include "qforma/error.hpp"

namespace qforma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Terms above 1e300 (or non-finite intermediates) push the breakdown into
// log scale.
constexpr double kLogCap = 690.77552789821368;  // ln(1e300)
constexpr double kLogFloor = std::numeric_limits<double>::lowest();

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

double log0(double x) { return x > 0.0 ? std::log(x) : -kInf; }

// Sum of |v_i|^w in index order, both in linear scale (may overflow to inf)
// and as a log (prescaled by the max, always finite for finite inputs).
struct ScaledSum {
  double linear = 0.0;
  double logv = -kInf;
};

template <class Get>
ScaledSum scaled_pow_sum(int count, double w, Get&& get) {
  double mx = 0.0;
  for (int i = 0; i < count; ++i) mx = std::max(mx, std::fabs(get(i)));
  if (mx == 0.0) return {};
  KahanSum lin, norm;
  for (int i = 0; i < count; ++i) {
    const double av = std::fabs(get(i));
    lin.add(std::pow(av, w));
    norm.add(std::pow(av / mx, w));
  }
  return {lin.value(), w * std::log(mx) + std::log(norm.value())};
}

struct TermSpec {
  const char* name;
  double linear;  // may be inf
  double logv;    // natural log, -inf for an exact zero
};

BoundBreakdown assemble(const char* method, const std::vector<TermSpec>& ts,
                        double cq) {
  bool log_mode = false;
  for (const auto& t : ts)
    if (!std::isfinite(t.linear) || t.logv > kLogCap) log_mode = true;
  BoundBreakdown out;
  out.method = method;
  out.cq = cq;
  out.log_scale = log_mode;
  if (!log_mode) {
    KahanSum total;
    for (const auto& t : ts) {
      out.terms.emplace_back(t.name, t.linear);
      total.add(t.linear);
    }
    out.structural_total = total.value();
    return out;
  }
  // Log scale: terms hold logs (zeros clamped to the lowest finite double),
  // total is the log-sum-exp in term order.
  double m = -kInf;
  for (const auto& t : ts) m = std::max(m, t.logv);
  KahanSum acc;
  for (const auto& t : ts) {
    out.terms.emplace_back(t.name,
                           std::isfinite(t.logv) ? t.logv : kLogFloor);
    acc.add(std::exp(t.logv - m));
  }
  out.structural_total = m + std::log(acc.value());
  return out;
}

void check_cq(double cq) {
  if (!(cq > 0.0) || !std::isfinite(cq))
    fail(ErrorKind::domain, "generic constant cq must be positive");
}

BoundBreakdown theorem1_impl(const SymmetricMatrix& a,
                             const MomentProfile& prof, double cq,
                             const SpectralSummary& spec) {
  const int p = a.dim();
  const double q = prof.q;

  const ScaledSum diag_sq =
      scaled_pow_sum(p, 2.0, [&](int j) { return a(j, j); });
  const ScaledSum off_2q = scaled_pow_sum(
      p * p, 2.0 * q,
      [&](int i) { return i / p == i % p ? 0.0 : a.entries()[i]; });
  // sum_k (sum_{j != k} a_jk^2)^q, combined column by column.
  KahanSum row_lin;
  double row_log_max = -kInf;
  std::vector<double> row_logs(p, -kInf);
  for (int k = 0; k < p; ++k) {
    const ScaledSum inner =
        scaled_pow_sum(p, 2.0, [&](int j) { return j == k ? 0.0 : a(j, k); });
    row_lin.add(std::pow(inner.linear, q));
    row_logs[k] = q * inner.logv;
    row_log_max = std::max(row_log_max, row_logs[k]);
  }
  ScaledSum row_q{row_lin.value(), -kInf};
  if (row_log_max > -kInf) {
    KahanSum acc;
    for (int k = 0; k < p; ++k) acc.add(std::exp(row_logs[k] - row_log_max));
    row_q.logv = row_log_max + std::log(acc.value());
  }
  const ScaledSum s4 = scaled_pow_sum(
      p, 4.0, [&](int j) { return spec.singular_values()[j]; });

  const double k2 = prof.kappa2, k2q = prof.kappa2q;
  const std::vector<TermSpec> ts = {
      {"T1", std::pow(k2q, 2.0 * q) * std::pow(diag_sq.linear, q / 2.0),
       2.0 * q * log0(k2q) + (q / 2.0) * diag_sq.logv},
      {"T2", std::pow(k2q, 2.0 * q) * std::sqrt(off_2q.linear),
       2.0 * q * log0(k2q) + 0.5 * off_2q.logv},
      {"T3", std::pow(k2 * k2q, q) * std::sqrt(row_q.linear),
       q * log0(k2 * k2q) + 0.5 * row_q.logv},
      {"T4", std::pow(k2, q) * std::pow(s4.linear, q / 4.0),
       q * log0(k2) + (q / 4.0) * s4.logv},
  };
  return assemble("theorem1", ts, cq);
}

BoundBreakdown bai_silverstein_impl(const SymmetricMatrix& a,
                                    const MomentProfile& prof, double cq,
                                    const SpectralSummary& spec) {
  const int p = a.dim();
  const double q = prof.q;
  const ScaledSum frob_sq = scaled_pow_sum(
      p * p, 2.0, [&](int i) { return a.entries()[i]; });
  const ScaledSum s_q = scaled_pow_sum(
      p, q, [&](int j) { return spec.singular_values()[j]; });
  const double k4 = prof.kappa4, k2q = prof.kappa2q;
  const std::vector<TermSpec> ts = {
      {"S1", std::pow(k4, 2.0 * q) * std::pow(frob_sq.linear, q / 2.0),
       2.0 * q * log0(k4) + (q / 2.0) * frob_sq.logv},
      {"S2", std::pow(k2q, 2.0 * q) * s_q.linear,
       2.0 * q * log0(k2q) + s_q.logv},
  };
  return assemble("bai_silverstein", ts, cq);
}

}  // namespace

void MomentProfile::validate() const {
  if (!(q > 2.0) || !std::isfinite(q))
    fail(ErrorKind::domain, "moment order requires q > 2");
  for (double v : {kappa2, kappa4, kappa2q, nu_q})
    if (!(v >= 0.0) || !std::isfinite(v))
      fail(ErrorKind::domain, "moment profile entries must be finite and >= 0");
  // Lyapunov ordering with slack for estimated profiles.
  if (kappa2 > kappa4 + 1e-9 * std::max(1.0, kappa4) ||
      kappa4 > kappa2q + 1e-9 * std::max(1.0, kappa2q))
    fail(ErrorKind::domain,
         "moment profile violates the ordering kappa2 <= kappa4 <= kappa2q");
}

MomentProfile unit_profile(double q) {
  MomentProfile prof;
  prof.q = q;
  prof.source = "unit";
  prof.validate();
  return prof;
}

double BoundBreakdown::term(const std::string& name) const {
  for (const auto& [n, v] : terms)
    if (n == name) return v;
  fail(ErrorKind::bad_input, "no term named '" + name + "' in " + method);
}

BoundBreakdown theorem1_bound(const SymmetricMatrix& a,
                              const MomentProfile& prof, double cq) {
  prof.validate();
  check_cq(cq);
  return theorem1_impl(a, prof, cq, SpectralSummary(a));
}

BoundBreakdown bai_silverstein_bound(const SymmetricMatrix& a,
                                     const MomentProfile& prof, double cq) {
  prof.validate();
  check_cq(cq);
  return bai_silverstein_impl(a, prof, cq, SpectralSummary(a));
}

Corollary1Bound corollary1_bound(int p, double q, double r, double m_p,
                                 double c0, double cq) {
  if (!(q > 2.0) || !std::isfinite(q))
    fail(ErrorKind::domain, "moment order requires q > 2");
  if (!(r >= 0.0 && r < 1.0))
    fail(ErrorKind::domain, "sparse-class exponent requires 0 <= r < 1");
  if (!(m_p > 0.0) || !std::isfinite(m_p))
    fail(ErrorKind::domain, "sparse-class budget M_p must be positive");
  if (!(c0 > 0.0) || !std::isfinite(c0))
    fail(ErrorKind::domain, "sparse-class radius C0 must be positive");
  if (p < 1 || p > kMaxDim) fail(ErrorKind::size, "dimension out of range");
  check_cq(cq);

  const double lp = std::log(static_cast<double>(p));
  const double lm = std::log(m_p), lc = std::log(c0);
  const std::vector<TermSpec> raw = {
      {"p_term", std::pow(p, q / 2.0), (q / 2.0) * lp},
      {"sparse_term", std::sqrt(static_cast<double>(p)) * std::pow(m_p, q / 2.0),
       0.5 * lp + (q / 2.0) * lm},
  };
  const std::vector<TermSpec> tracked = {
      {"T1", std::pow(c0, q) * std::pow(p, q / 2.0), q * lc + (q / 2.0) * lp},
      {"T2",
       std::pow(c0, q - r / 2.0) * std::sqrt(static_cast<double>(p)) *
           std::sqrt(m_p),
       (q - r / 2.0) * lc + 0.5 * lp + 0.5 * lm},
      {"T3",
       std::pow(c0, q * (1.0 - r / 2.0)) * std::sqrt(static_cast<double>(p)) *
           std::pow(m_p, q / 2.0),
       q * (1.0 - r / 2.0) * lc + 0.5 * lp + (q / 2.0) * lm},
      {"T4", std::pow(c0, q) * std::pow(p, q / 4.0), q * lc + (q / 4.0) * lp},
  };
  Corollary1Bound out;
  out.raw = assemble("corollary1", raw, cq);
  out.tracked = assemble("corollary1", tracked, cq);
  return out;
}

double rosenthal_sum_bound(long long n, double q, double mu_q, double sigma2,
                           double c) {
  if (n < 0) fail(ErrorKind::domain, "count must be >= 0");
  if (!(q > 2.0) || !std::isfinite(q))
    fail(ErrorKind::domain, "moment order requires q > 2");
  if (!(mu_q >= 0.0) || !(sigma2 >= 0.0))
    fail(ErrorKind::domain, "moments must be nonnegative");
  if (!(c > 0.0) || !std::isfinite(c))
    fail(ErrorKind::domain, "numeric constant must be positive");
  const double nd = static_cast<double>(n);
  return std::pow(c, q) * (std::pow(q, q) * nd * mu_q +
                           std::pow(q, q / 2.0) * std::pow(nd * sigma2, q / 2.0));
}

double burkholder_diag_bound(const std::vector<double>& diag,
                             const MomentProfile& prof) {
  prof.validate();
  KahanSum sq;
  for (double v : diag) sq.add(v * v);
  return std::pow((prof.q - 1.0) * prof.nu_q * prof.nu_q * sq.value(),
                  prof.q / 2.0);
}

CompareReport compare_bounds(const SymmetricMatrix& a,
                             const MomentProfile& prof) {
  prof.validate();
  const SpectralSummary spec(a);
  CompareReport rep;
  rep.theorem1 = theorem1_impl(a, prof, 1.0, spec);
  rep.bai_silverstein = bai_silverstein_impl(a, prof, 1.0, spec);
  if (!rep.theorem1.log_scale && !rep.bai_silverstein.log_scale) {
    const double t = rep.theorem1.structural_total;
    const double b = rep.bai_silverstein.structural_total;
    rep.ratio = b == 0.0 ? (t == 0.0 ? 1.0 : kInf) : t / b;
    return rep;
  }
  const auto log_total = [](const BoundBreakdown& b) {
    return b.log_scale ? b.structural_total : log0(b.structural_total);
  };
  rep.ratio =
      std::exp(log_total(rep.theorem1) - log_total(rep.bai_silverstein));
  return rep;
}

}  // namespace qforma
