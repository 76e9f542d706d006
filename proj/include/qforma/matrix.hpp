#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qforma {

// Hard cap on matrix dimension; all bound computations are O(p^2)-O(p^3).
inline constexpr int kMaxDim = 4096;

// Dense symmetric p x p matrix, row-major, immutable after construction.
// Construction validates the symmetry tolerance
//   |a_jk - a_kj| <= 1e-12 * max(1, max|a_uv|)
// and rejects non-finite entries. Non-symmetric input is rejected rather
// than symmetrized.
class SymmetricMatrix {
 public:
  SymmetricMatrix(int p, std::vector<double> entries);

  int dim() const { return p_; }
  double operator()(int j, int k) const { return entries_[index(j, k)]; }
  std::span<const double> row(int j) const {
    return {entries_.data() + static_cast<std::size_t>(j) * p_,
            static_cast<std::size_t>(p_)};
  }
  std::span<const double> entries() const { return entries_; }

  double trace() const;
  double max_abs_entry() const;
  SymmetricMatrix scaled(double factor) const;

  friend bool operator==(const SymmetricMatrix&, const SymmetricMatrix&) =
      default;

 private:
  std::size_t index(int j, int k) const {
    return static_cast<std::size_t>(j) * p_ + k;
  }
  int p_;
  std::vector<double> entries_;
};

// Named generators.
SymmetricMatrix gen_identity(int p);
SymmetricMatrix gen_zero(int p);
SymmetricMatrix gen_ones(int p);
// Block diagonal with m blocks of the all-ones k x k matrix; p = m*k.
SymmetricMatrix gen_block_ones(int m, int k);

// Frobenius norm, sqrt of the sum of squared entries (Kahan-compensated,
// row-major order).
double frobenius_norm(const SymmetricMatrix& a);
double frobenius_norm_squared(const SymmetricMatrix& a);

// File formats.
//
// Dense CSV: first line "p", then p rows of p comma-separated decimals.
// Sparse triplet: first line "p nnz", then nnz lines "i j value" with
// 1-based indices, upper triangle only (i <= j), mirrored on load.
// Writers emit 17 significant digits.
SymmetricMatrix read_matrix(const std::string& path);  // sniffs the format
SymmetricMatrix read_matrix_csv(const std::string& path);
SymmetricMatrix read_matrix_triplet(const std::string& path);
void write_matrix_csv(const std::string& path, const SymmetricMatrix& a);
void write_matrix_triplet(const std::string& path, const SymmetricMatrix& a);

}  // namespace qforma
