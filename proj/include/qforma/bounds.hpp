#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qforma/matrix.hpp"

namespace qforma {

// Absolute-moment profile of one standardized component X:
//   kappa_w = ||X||_w = (E|X|^w)^{1/w},  nu_q = ||X^2 - 1||_q.
// Standardized components have kappa2 = 1.
struct MomentProfile {
  double q = 4.0;        // moment order of the target bound, q > 2
  double kappa2 = 1.0;   // ||X||_2
  double kappa4 = 1.0;   // ||X||_4
  double kappa2q = 1.0;  // ||X||_{2q}
  double nu_q = 0.0;     // ||X^2 - 1||_q
  std::string source = "unit";

  // Validates q > 2, finiteness, nonnegativity, and the Lyapunov ordering
  // kappa2 <= kappa4 <= kappa2q (1e-9 relative slack for estimated inputs).
  void validate() const;
};

// A unit profile: all kappa_w = 1, nu_q = 0 (the constant-free structural
// scale used for bound-vs-bound comparisons).
MomentProfile unit_profile(double q);

// One bound evaluation, term by term, with the generic constant factored
// out: bound value = cq * structural_total. Terms are kept in a fixed order
// and summed Kahan-compensated so totals are bit-stable across runs.
// If any term would exceed 1e300 the whole breakdown switches to log scale:
// terms and structural_total then hold natural logs (log-sum-exp total) and
// log_scale is true; exact zeros are clamped to the lowest finite double.
struct BoundBreakdown {
  std::string method;
  std::vector<std::pair<std::string, double>> terms;
  double structural_total = 0.0;
  double cq = 1.0;
  bool log_scale = false;

  double term(const std::string& name) const;  // lookup, error if missing
};

// E|x^T A x - tr(A)|^q <= C_q { T1 + T2 + T3 + T4 } with
//   T1 = kappa2q^{2q} (sum_j a_jj^2)^{q/2}
//   T2 = kappa2q^{2q} (sum_{j!=k} |a_jk|^{2q})^{1/2}
//   T3 = (kappa2 kappa2q)^q (sum_k (sum_{j!=k} a_jk^2)^q)^{1/2}
//   T4 = kappa2^q |s|_4^q          (s = singular values of A)
BoundBreakdown theorem1_bound(const SymmetricMatrix& a,
                              const MomentProfile& prof, double cq = 1.0);

// E|x^T A x - tr(A)|^q <= C_q { S1 + S2 } with
//   S1 = kappa4^{2q} |A|_F^q
//   S2 = kappa2q^{2q} |s|_q^q
BoundBreakdown bai_silverstein_bound(const SymmetricMatrix& a,
                                     const MomentProfile& prof,
                                     double cq = 1.0);

// Sparse-class bound for members of G_r(M_p) with rho(A) <= C0, reported
// two ways: the raw scaling shape p^{q/2} + p^{1/2} M_p^{q/2} with all
// constants set to 1, and the constant-tracked per-term majorants of the
// four T-terms above:
//   T1 <= C0^q p^{q/2}
//   T2 <= C0^{q - r/2} p^{1/2} M_p^{1/2}
//   T3 <= C0^{q(1 - r/2)} p^{1/2} M_p^{q/2}
//   T4 <= C0^q p^{q/4}
// (T4 follows from |s|_4^q <= (p rho^4)^{q/4}; the exponent on C0 is q.)
struct Corollary1Bound {
  BoundBreakdown raw;      // terms p_term, sparse_term
  BoundBreakdown tracked;  // terms T1..T4
};
Corollary1Bound corollary1_bound(int p, double q, double r, double m_p,
                                 double c0, double cq = 1.0);

// Rosenthal bound for sums of independent centered variables:
//   C^q [ q^q n mu_q + q^{q/2} (n sigma2)^{q/2} ],
// mu_q = E|X|^q per variable, sigma2 = E X^2 per variable.
double rosenthal_sum_bound(long long n, double q, double mu_q, double sigma2,
                           double c = 1.0);

// Burkholder bound for the diagonal part sum_j a_jj (X_j^2 - 1):
//   ((q - 1) nu_q^2 sum_j a_jj^2)^{q/2}.
double burkholder_diag_bound(const std::vector<double>& diag,
                             const MomentProfile& prof);

// Both main bounds side by side with their structural ratio
// theorem1/bai_silverstein (0/0 reported as 1).
struct CompareReport {
  BoundBreakdown theorem1;
  BoundBreakdown bai_silverstein;
  double ratio = 1.0;
};
CompareReport compare_bounds(const SymmetricMatrix& a,
                             const MomentProfile& prof);

}  // namespace qforma
