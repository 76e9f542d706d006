#pragma once

#include <cstdint>
#include <string>

#include "qforma/matrix.hpp"

namespace qforma {

// Membership check for the approximately-sparse class
//   G_r(M_p) = { A : rho(A) <= C0,  max_k sum_j |a_jk|^r <= M_p },
// with 0 <= r < 1 and the counting convention |a|^0 = 1 for a != 0.
// Comparisons carry a 1e-9 relative slack to absorb eigensolver noise.
struct SparseClassResult {
  bool member = false;
  bool spectral_ok = false;
  bool budget_ok = false;
  double spectral_radius = 0.0;
  double worst_column_mass = 0.0;
  int worst_column = 0;   // 1-based; 0 when p == 0 columns checked
  std::string witness;    // empty when member, else the violated condition
};

SparseClassResult is_in_sparse_class(const SymmetricMatrix& a, double r,
                                     double m_p, double c0);

// sum_j |a_jk|^r for the worst column, 1-based index of that column in
// *worst_column when non-null.
double max_column_lr_mass(const SymmetricMatrix& a, double r,
                          int* worst_column = nullptr);

// Seeded generator of a class member: diagonal drawn in [0.5, 1), then
// off-diagonal entries added column-by-column from the stream while
// greedily respecting the l^r budget, then a spectral rescale enforcing
// rho(A) <= C0 and a final membership re-check.
// M_p < 1 cannot accommodate the diagonal and raises the infeasible-class
// error.
SymmetricMatrix gen_sparse_member(int p, double r, double m_p, double c0,
                                  std::uint64_t seed);

}  // namespace qforma
