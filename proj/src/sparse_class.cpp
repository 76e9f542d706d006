#include "qforma/sparse_class.hpp"

#include <cmath>
#include <vector>

#include "qforma/eigensolve.hpp"
#include "qforma/error.hpp"
#include "qforma/rng.hpp"

namespace qforma {

namespace {

void check_class_params(double r, double m_p, double c0) {
  if (!(r >= 0.0 && r < 1.0))
    fail(ErrorKind::domain, "sparse-class exponent requires 0 <= r < 1");
  if (!(m_p > 0.0) || !std::isfinite(m_p))
    fail(ErrorKind::domain, "sparse-class budget M_p must be positive");
  if (!(c0 > 0.0) || !std::isfinite(c0))
    fail(ErrorKind::domain, "sparse-class radius C0 must be positive");
}

double lr_term(double v, double r) {
  if (v == 0.0) return 0.0;
  if (r == 0.0) return 1.0;  // counting convention
  return std::pow(std::fabs(v), r);
}

}  // namespace

double max_column_lr_mass(const SymmetricMatrix& a, double r,
                          int* worst_column) {
  const int p = a.dim();
  double worst = -1.0;
  int worst_k = 1;
  for (int k = 0; k < p; ++k) {
    double s = 0.0;
    for (int j = 0; j < p; ++j) s += lr_term(a(j, k), r);
    if (s > worst) {
      worst = s;
      worst_k = k + 1;
    }
  }
  if (worst_column) *worst_column = worst_k;
  return worst;
}

SparseClassResult is_in_sparse_class(const SymmetricMatrix& a, double r,
                                     double m_p, double c0) {
  check_class_params(r, m_p, c0);
  SparseClassResult res;
  res.spectral_radius = spectral_radius(a);
  res.worst_column_mass = max_column_lr_mass(a, r, &res.worst_column);
  res.spectral_ok = res.spectral_radius <= c0 + 1e-9 * std::max(1.0, c0);
  res.budget_ok =
      res.worst_column_mass <= m_p + 1e-9 * std::max(1.0, m_p);
  res.member = res.spectral_ok && res.budget_ok;
  if (!res.spectral_ok)
    res.witness = "spectral radius " + std::to_string(res.spectral_radius) +
                  " exceeds C0 = " + std::to_string(c0);
  else if (!res.budget_ok)
    res.witness = "column " + std::to_string(res.worst_column) +
                  " has l^r mass " + std::to_string(res.worst_column_mass) +
                  " exceeding M_p = " + std::to_string(m_p);
  return res;
}

SymmetricMatrix gen_sparse_member(int p, double r, double m_p, double c0,
                                  std::uint64_t seed) {
  check_class_params(r, m_p, c0);
  if (p < 1 || p > kMaxDim)
    fail(ErrorKind::size, "dimension out of range for sparse generator");
  // The generator keeps a nondegenerate diagonal whose per-column l^r
  // footprint can reach 1; a budget below 1 cannot host it.
  if (m_p < 1.0)
    fail(ErrorKind::infeasible_class,
         "budget M_p < 1 cannot accommodate the diagonal");

  CounterRng rng(seed, kStreamSparseGen);
  std::vector<double> e(static_cast<std::size_t>(p) * p, 0.0);
  std::vector<double> used(p, 0.0);
  for (int k = 0; k < p; ++k) {
    const double d = 0.5 + 0.5 * rng.uniform01();
    e[static_cast<std::size_t>(k) * p + k] = d;
    used[k] = lr_term(d, r);
  }
  // Off-diagonal proposals, upper triangle in column-major order so each
  // column is filled against its remaining budget.
  for (int k = 1; k < p; ++k) {
    for (int j = 0; j < k; ++j) {
      const double u = rng.uniform01();
      // Keep the fill sparse: most proposals decline.
      if (u >= 0.25) continue;
      const double w = (rng.uniform01() - 0.5);  // in (-0.5, 0.5)
      if (w == 0.0) continue;
      const double cost = lr_term(w, r);
      if (used[j] + cost > m_p || used[k] + cost > m_p) continue;
      e[static_cast<std::size_t>(j) * p + k] = w;
      e[static_cast<std::size_t>(k) * p + j] = w;
      used[j] += cost;
      used[k] += cost;
    }
  }
  SymmetricMatrix a(p, std::move(e));
  const double rho = spectral_radius(a);
  if (rho > c0) a = a.scaled((c0 / rho) * (1.0 - 1e-10));
  const SparseClassResult check = is_in_sparse_class(a, r, m_p, c0);
  if (!check.member)
    fail(ErrorKind::infeasible_class,
         "generator could not certify membership: " + check.witness);
  return a;
}

}  // namespace qforma
