#pragma once

#include <vector>

#include "qforma/matrix.hpp"

namespace qforma {

// Full symmetric eigendecomposition A = V diag(values) V^T.
// vectors is row-major p x p with eigenvector j stored in column j.
struct EigenDecomposition {
  int p = 0;
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // row-major, columns are eigenvectors
  int sweeps = 0;

  double vec(int row, int col) const {
    return vectors[static_cast<std::size_t>(row) * p + col];
  }
};

// Cyclic Jacobi rotations. Converges when the off-diagonal Frobenius mass
// drops below 1e-12 * ||A||_F; rotations with |a_jk| <= 1e-14 * ||A||_F / p
// are skipped, which keeps block-diagonal inputs cheap. Capped at 64 sweeps.
EigenDecomposition eigendecompose(const SymmetricMatrix& a);

// Spectral quantities of a symmetric matrix, via its singular values
// (absolute eigenvalues, sorted descending).
class SpectralSummary {
 public:
  explicit SpectralSummary(const SymmetricMatrix& a);

  const std::vector<double>& singular_values() const { return sv_; }
  double spectral_radius() const { return sv_.empty() ? 0.0 : sv_.front(); }
  // (sum_j s_j^q)^(1/q) for q > 0.
  double lp_norm(double q) const;
  // sum_j s_j^q.
  double norm_pow(double q) const;

 private:
  std::vector<double> sv_;
};

std::vector<double> singular_values(const SymmetricMatrix& a);
double spectral_radius(const SymmetricMatrix& a);

// Omega^{-1/2} for symmetric positive definite Omega. Eigenvalues at or
// below eps * max-eigenvalue (or <= 0) make the input non-invertible here.
SymmetricMatrix inverse_sqrt(const SymmetricMatrix& omega, double eps = 1e-10);

// log det(Omega) for symmetric positive definite Omega, summed in log space.
double log_det_pd(const SymmetricMatrix& omega, double eps = 1e-10);

// C = X * Y symmetrized as (C + C^T)/2; both inputs must share a dimension.
SymmetricMatrix multiply_symmetrized(const SymmetricMatrix& x,
                                     const SymmetricMatrix& y);

}  // namespace qforma
