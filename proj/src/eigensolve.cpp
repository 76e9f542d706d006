#include "qforma/eigensolve.hpp"

#include <algorithm>
#include <cmath>

#include "qforma/error.hpp"

namespace qforma {

namespace {

double off_diag_frobenius(const std::vector<double>& a, int p) {
  double s = 0.0;
  for (int j = 0; j < p; ++j)
    for (int k = 0; k < p; ++k)
      if (j != k) {
        const double v = a[static_cast<std::size_t>(j) * p + k];
        s += v * v;
      }
  return std::sqrt(s);
}

}  // namespace

EigenDecomposition eigendecompose(const SymmetricMatrix& m) {
  // Extreme entry scales overflow or underflow the squared-norm tolerances;
  // rotations are scale-equivariant, so solve m/scale and restore the values.
  const double scale = m.max_abs_entry();
  if (scale > 1e150 || (scale > 0.0 && scale < 1e-150)) {
    EigenDecomposition out = eigendecompose(m.scaled(1.0 / scale));
    for (double& value : out.values) value *= scale;
    return out;
  }
  const int p = m.dim();
  std::vector<double> a(m.entries().begin(), m.entries().end());
  std::vector<double> v(static_cast<std::size_t>(p) * p, 0.0);
  for (int j = 0; j < p; ++j) v[static_cast<std::size_t>(j) * p + j] = 1.0;

  const double norm = frobenius_norm(m);
  EigenDecomposition out;
  out.p = p;
  if (norm == 0.0 || p == 1) {
    out.values.resize(p);
    for (int j = 0; j < p; ++j)
      out.values[j] = a[static_cast<std::size_t>(j) * p + j];
    out.vectors = std::move(v);
    return out;
  }

  const double conv_tol = 1e-12 * norm;
  const double skip_tol = 1e-14 * norm / p;
  const int max_sweeps = 64;
  auto at = [&](int r, int c) -> double& {
    return a[static_cast<std::size_t>(r) * p + c];
  };

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off_diag_frobenius(a, p) < conv_tol) break;
    for (int j = 0; j < p - 1; ++j) {
      for (int k = j + 1; k < p; ++k) {
        const double ajk = at(j, k);
        if (std::fabs(ajk) <= skip_tol) continue;
        const double ajj = at(j, j);
        const double akk = at(k, k);
        // Rotation angle: stable formula via t = s/c.
        const double theta = (akk - ajj) / (2.0 * ajk);
        const double t =
            (theta >= 0.0 ? 1.0 : -1.0) /
            (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // Update rows/columns j and k of A.
        for (int l = 0; l < p; ++l) {
          const double alj = at(l, j);
          const double alk = at(l, k);
          at(l, j) = c * alj - s * alk;
          at(l, k) = s * alj + c * alk;
        }
        for (int l = 0; l < p; ++l) {
          const double ajl = at(j, l);
          const double akl = at(k, l);
          at(j, l) = c * ajl - s * akl;
          at(k, l) = s * ajl + c * akl;
        }
        // Accumulate the rotation into V (columns j, k).
        for (int l = 0; l < p; ++l) {
          const double vlj = v[static_cast<std::size_t>(l) * p + j];
          const double vlk = v[static_cast<std::size_t>(l) * p + k];
          v[static_cast<std::size_t>(l) * p + j] = c * vlj - s * vlk;
          v[static_cast<std::size_t>(l) * p + k] = s * vlj + c * vlk;
        }
      }
    }
  }
  if (sweep == max_sweeps && off_diag_frobenius(a, p) >= conv_tol)
    fail(ErrorKind::decomposition_failure,
         "Jacobi eigensolver did not converge in 64 sweeps");

  out.sweeps = sweep;
  std::vector<int> order(p);
  for (int j = 0; j < p; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return a[static_cast<std::size_t>(x) * p + x] <
           a[static_cast<std::size_t>(y) * p + y];
  });
  out.values.resize(p);
  out.vectors.assign(static_cast<std::size_t>(p) * p, 0.0);
  for (int col = 0; col < p; ++col) {
    const int src = order[col];
    out.values[col] = a[static_cast<std::size_t>(src) * p + src];
    for (int row = 0; row < p; ++row)
      out.vectors[static_cast<std::size_t>(row) * p + col] =
          v[static_cast<std::size_t>(row) * p + src];
  }
  return out;
}

SpectralSummary::SpectralSummary(const SymmetricMatrix& a) {
  const EigenDecomposition ed = eigendecompose(a);
  sv_.reserve(ed.values.size());
  for (double lam : ed.values) sv_.push_back(std::fabs(lam));
  std::sort(sv_.begin(), sv_.end(), std::greater<double>());
}

double SpectralSummary::lp_norm(double q) const {
  if (!(q > 0.0)) fail(ErrorKind::bad_input, "lp_norm requires q > 0");
  return std::pow(norm_pow(q), 1.0 / q);
}

double SpectralSummary::norm_pow(double q) const {
  if (!(q > 0.0)) fail(ErrorKind::bad_input, "norm_pow requires q > 0");
  double s = 0.0, c = 0.0;
  for (double sv : sv_) {
    const double y = std::pow(sv, q) - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

std::vector<double> singular_values(const SymmetricMatrix& a) {
  return SpectralSummary(a).singular_values();
}

double spectral_radius(const SymmetricMatrix& a) {
  return SpectralSummary(a).spectral_radius();
}

SymmetricMatrix inverse_sqrt(const SymmetricMatrix& omega, double eps) {
  const int p = omega.dim();
  const EigenDecomposition ed = eigendecompose(omega);
  const double lam_max = ed.values.back();
  std::vector<double> inv_root(p);
  for (int j = 0; j < p; ++j) {
    const double lam = ed.values[j];
    if (lam <= 0.0 || lam <= eps * lam_max)
      fail(ErrorKind::not_positive_definite,
           "matrix is not positive definite (eigenvalue " +
               std::to_string(lam) + ")");
    inv_root[j] = 1.0 / std::sqrt(lam);
  }
  // V diag(inv_root) V^T, symmetrized to kill rounding skew.
  std::vector<double> out(static_cast<std::size_t>(p) * p, 0.0);
  for (int r = 0; r < p; ++r)
    for (int c = r; c < p; ++c) {
      double s = 0.0;
      for (int j = 0; j < p; ++j)
        s += ed.vec(r, j) * inv_root[j] * ed.vec(c, j);
      out[static_cast<std::size_t>(r) * p + c] = s;
      out[static_cast<std::size_t>(c) * p + r] = s;
    }
  return SymmetricMatrix(p, std::move(out));
}

double log_det_pd(const SymmetricMatrix& omega, double eps) {
  const EigenDecomposition ed = eigendecompose(omega);
  const double lam_max = ed.values.back();
  double s = 0.0;
  for (double lam : ed.values) {
    if (lam <= 0.0 || lam <= eps * lam_max)
      fail(ErrorKind::not_positive_definite,
           "matrix is not positive definite (eigenvalue " +
               std::to_string(lam) + ")");
    s += std::log(lam);
  }
  return s;
}

SymmetricMatrix multiply_symmetrized(const SymmetricMatrix& x,
                                     const SymmetricMatrix& y) {
  if (x.dim() != y.dim())
    fail(ErrorKind::bad_input, "dimension mismatch in matrix product");
  const int p = x.dim();
  std::vector<double> prod(static_cast<std::size_t>(p) * p, 0.0);
  for (int r = 0; r < p; ++r)
    for (int j = 0; j < p; ++j) {
      const double xr = x(r, j);
      if (xr == 0.0) continue;
      for (int c = 0; c < p; ++c)
        prod[static_cast<std::size_t>(r) * p + c] += xr * y(j, c);
    }
  std::vector<double> sym(static_cast<std::size_t>(p) * p, 0.0);
  for (int r = 0; r < p; ++r)
    for (int c = 0; c < p; ++c)
      sym[static_cast<std::size_t>(r) * p + c] =
          0.5 * (prod[static_cast<std::size_t>(r) * p + c] +
                 prod[static_cast<std::size_t>(c) * p + r]);
  return SymmetricMatrix(p, std::move(sym));
}

}  // namespace qforma
