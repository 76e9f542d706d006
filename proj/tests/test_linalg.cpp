#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "qforma/eigensolve.hpp"
#include "qforma/error.hpp"
#include "qforma/matrix.hpp"
#include "qforma/rng.hpp"
#include "qforma/sparse_class.hpp"

using namespace qforma;

namespace {

SymmetricMatrix random_symmetric(int p, CounterRng& rng, double scale = 1.0) {
  std::vector<double> e(static_cast<std::size_t>(p) * p);
  for (int j = 0; j < p; ++j)
    for (int k = j; k < p; ++k) {
      const double v = (2.0 * rng.uniform01() - 1.0) * scale;
      e[static_cast<std::size_t>(j) * p + k] = v;
      e[static_cast<std::size_t>(k) * p + j] = v;
    }
  return SymmetricMatrix(p, std::move(e));
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("symmetric matrix construction and validation") {
  SymmetricMatrix a(2, {1.0, 2.0, 2.0, 5.0});
  CHECK(a.dim() == 2);
  CHECK(a(0, 1) == 2.0);
  CHECK(a.trace() == 6.0);

  CHECK_THROWS_AS(SymmetricMatrix(2, {1.0, 2.0, 2.0001, 5.0}), Error);
  CHECK_THROWS_AS(SymmetricMatrix(2, {1.0, 2.0, 2.0}), Error);
  CHECK_THROWS_AS(SymmetricMatrix(0, {}), Error);
  CHECK_THROWS_AS(SymmetricMatrix(2, {1.0, 2.0, 2.0, std::nan("")}), Error);

  // Tolerance is relative to the largest entry.
  const double big = 1e6;
  SymmetricMatrix b(2, {big, big + 1e-7, big, big});  // |skew| within 1e-12*big
  CHECK(b(0, 1) == big + 1e-7);

  // Scaling by a constant is entrywise.
  SymmetricMatrix s = a.scaled(-2.0);
  CHECK(s(0, 0) == -2.0);
  CHECK(s(1, 1) == -10.0);
}

TEST_CASE("generators") {
  const SymmetricMatrix id = gen_identity(3);
  CHECK(id(0, 0) == 1.0);
  CHECK(id(0, 1) == 0.0);
  CHECK(id.trace() == 3.0);

  CHECK(gen_ones(1)(0, 0) == 1.0);
  CHECK(gen_zero(4).max_abs_entry() == 0.0);

  // gen_block_ones(2,2) = diag(ones_2x2, ones_2x2)
  const SymmetricMatrix blk = gen_block_ones(2, 2);
  CHECK(blk.dim() == 4);
  CHECK(blk(0, 1) == 1.0);
  CHECK(blk(1, 2) == 0.0);
  CHECK(blk(2, 3) == 1.0);

  // k = 1 degenerates to the identity.
  const SymmetricMatrix deg = gen_block_ones(5, 1);
  CHECK(deg == gen_identity(5));

  CHECK_THROWS_AS(gen_identity(kMaxDim + 1), Error);
  CHECK_THROWS_AS(gen_block_ones(0, 3), Error);
}

TEST_CASE("frobenius norm") {
  CHECK(frobenius_norm(gen_ones(2)) == 2.0);
  CHECK(frobenius_norm_squared(gen_identity(7)) == 7.0);
  // block(m,k): m k^2 unit entries, so |A|_F = k sqrt(m)
  CHECK(frobenius_norm(gen_block_ones(4, 4)) == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(frobenius_norm(gen_zero(3)) == 0.0);
}

TEST_CASE("dense csv round trip") {
  CounterRng rng(11);
  const SymmetricMatrix a = random_symmetric(5, rng, 3.0);
  const std::string path = temp_path("qforma_rt.csv");
  write_matrix_csv(path, a);
  const SymmetricMatrix back = read_matrix_csv(path);
  CHECK(back == a);  // 17 significant digits round-trip exactly
  // Format sniffing picks the dense reader from the 1-token header.
  CHECK(read_matrix(path) == a);
  std::filesystem::remove(path);
}

TEST_CASE("triplet round trip") {
  // Upper-triangle triplets mirror on load.
  const std::string path = temp_path("qforma_rt.tri");
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("3 2\n1 2 0.5\n3 3 -1.25\n", f);
    std::fclose(f);
  }
  const SymmetricMatrix a = read_matrix(path);  // sniffed as triplet
  CHECK(a(0, 1) == 0.5);
  CHECK(a(1, 0) == 0.5);
  CHECK(a(2, 2) == -1.25);
  CHECK(a(0, 0) == 0.0);

  const std::string out = temp_path("qforma_rt2.tri");
  write_matrix_triplet(out, a);
  CHECK(read_matrix_triplet(out) == a);
  std::filesystem::remove(path);
  std::filesystem::remove(out);
}

TEST_CASE("malformed matrix files are rejected") {
  const std::string path = temp_path("qforma_bad.txt");
  const auto write_and_expect_throw = [&](const char* content) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs(content, f);
    std::fclose(f);
    CHECK_THROWS_AS(read_matrix(path), Error);
  };
  write_and_expect_throw("2\n1,0\n0\n");            // short row
  write_and_expect_throw("2\n1,0\n");               // missing row
  write_and_expect_throw("2\n1,x\n0,1\n");          // bad token
  write_and_expect_throw("2 1\n2 1 0.5\n");         // lower-triangle triplet
  write_and_expect_throw("2 1\n1 5 0.5\n");         // index out of range
  write_and_expect_throw("0\n");                    // dimension out of range
  CHECK_THROWS_AS(read_matrix(temp_path("qforma_missing_file.csv")), Error);
  std::filesystem::remove(path);
}

TEST_CASE("eigendecomposition oracles") {
  // [[2,1],[1,2]] has eigenvalues 3 and 1.
  const SymmetricMatrix a(2, {2.0, 1.0, 1.0, 2.0});
  const auto sv = singular_values(a);
  CHECK(sv[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sv[1] == doctest::Approx(1.0).epsilon(1e-12));

  // Diagonal input short-circuits with exact values.
  const auto id_sv = singular_values(gen_identity(6));
  for (double s : id_sv) CHECK(s == 1.0);

  CHECK(spectral_radius(gen_ones(4)) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("block matrices have m singular values equal to k") {
  for (const auto [m, k] : {std::pair{2, 3}, {4, 4}, {3, 5}}) {
    const auto sv = singular_values(gen_block_ones(m, k));
    REQUIRE(static_cast<int>(sv.size()) == m * k);
    for (int i = 0; i < m; ++i)
      CHECK(std::fabs(sv[i] - k) < 1e-9);
    for (std::size_t i = m; i < sv.size(); ++i)
      CHECK(std::fabs(sv[i]) < 1e-9);
  }
}

TEST_CASE("eigendecomposition reconstructs the matrix") {
  CounterRng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 15);
    const SymmetricMatrix a = random_symmetric(p, rng, 2.0);
    const EigenDecomposition ed = eigendecompose(a);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) {
        double s = 0.0;
        for (int l = 0; l < p; ++l)
          s += ed.vec(i, l) * ed.values[l] * ed.vec(j, l);
        CHECK(std::fabs(s - a(i, j)) < 1e-9 * std::max(1.0, a.max_abs_entry()));
      }
    // Columns are orthonormal.
    for (int c1 = 0; c1 < p; ++c1)
      for (int c2 = c1; c2 < p; ++c2) {
        double dot = 0.0;
        for (int l = 0; l < p; ++l) dot += ed.vec(l, c1) * ed.vec(l, c2);
        CHECK(std::fabs(dot - (c1 == c2 ? 1.0 : 0.0)) < 1e-10);
      }
  }
}

TEST_CASE("schatten-2 identity and norm ordering") {
  CounterRng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 10);
    const SymmetricMatrix a = random_symmetric(p, rng);
    const SpectralSummary spec(a);
    const double f2 = frobenius_norm_squared(a);
    CHECK(spec.norm_pow(2.0) ==
          doctest::Approx(f2).epsilon(1e-9));
    // Schatten norms decrease in the exponent.
    const double s4 = spec.lp_norm(4.0);
    for (double q : {2.5, 3.0, 4.0})
      CHECK(s4 <= spec.lp_norm(q) * (1.0 + 1e-12));
    for (double q : {5.0, 8.0, 16.0})
      CHECK(s4 >= spec.lp_norm(q) * (1.0 - 1e-12));
  }
}

TEST_CASE("inverse square root") {
  const SymmetricMatrix a(2, {4.0, 0.0, 0.0, 9.0});
  const SymmetricMatrix r = inverse_sqrt(a);
  CHECK(r(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(r(0, 1) == doctest::Approx(0.0).epsilon(1e-14));

  // R * A * R = Id for a dense PD matrix.
  const SymmetricMatrix pd(2, {2.0, 1.0, 1.0, 2.0});
  const SymmetricMatrix root = inverse_sqrt(pd);
  double check00 = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      check00 += root(0, i) * pd(i, j) * root(j, 0);
  CHECK(check00 == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(inverse_sqrt(SymmetricMatrix(2, {1.0, 0.0, 0.0, 0.0})),
                  Error);
  CHECK_THROWS_AS(inverse_sqrt(SymmetricMatrix(1, {-1.0})), Error);
}

TEST_CASE("log determinant") {
  CHECK(log_det_pd(SymmetricMatrix(2, {4.0, 0.0, 0.0, 9.0})) ==
        doctest::Approx(std::log(36.0)).epsilon(1e-14));
  CHECK(log_det_pd(gen_identity(5)) == 0.0);
  CHECK_THROWS_AS(log_det_pd(gen_zero(2)), Error);
}

TEST_CASE("sparse class membership") {
  // Identity: rho = 1, every column mass 1^r = 1.
  CHECK(is_in_sparse_class(gen_identity(6), 0.5, 1.0, 1.0).member);
  CHECK(is_in_sparse_class(gen_identity(6), 0.0, 1.0, 1.0).member);

  // ones_4: spectral radius 4 violates C0 = 1.
  const SparseClassResult res = is_in_sparse_class(gen_ones(4), 0.5, 4.0, 1.0);
  CHECK_FALSE(res.member);
  CHECK_FALSE(res.spectral_ok);
  CHECK(res.spectral_radius == doctest::Approx(4.0).epsilon(1e-9));

  // Column mass witness: r = 0 counts nonzeros.
  const SparseClassResult cnt =
      is_in_sparse_class(gen_ones(4), 0.0, 3.0, 5.0);
  CHECK_FALSE(cnt.member);
  CHECK(cnt.spectral_ok);
  CHECK_FALSE(cnt.budget_ok);
  CHECK(cnt.worst_column_mass == 4.0);

  CHECK_THROWS_AS(is_in_sparse_class(gen_identity(2), 1.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(is_in_sparse_class(gen_identity(2), -0.1, 1.0, 1.0), Error);
}

TEST_CASE("sparse member generator") {
  // Pinned feasible case.
  const SymmetricMatrix a = gen_sparse_member(8, 0.5, 8.0, 2.0, 1);
  CHECK(is_in_sparse_class(a, 0.5, 8.0, 2.0).member);

  // Deterministic in the seed.
  CHECK(gen_sparse_member(8, 0.5, 8.0, 2.0, 1) == a);
  CHECK_FALSE(gen_sparse_member(8, 0.5, 8.0, 2.0, 2) == a);

  // p = 1: single entry bounded by C0 = 1.
  const SymmetricMatrix one = gen_sparse_member(1, 0.0, 1.0, 1.0, 9);
  CHECK(std::fabs(one(0, 0)) <= 1.0);

  // Budget below the diagonal footprint is infeasible.
  CHECK_THROWS_AS(gen_sparse_member(4, 0.5, 0.5, 1.0, 1), Error);
  try {
    gen_sparse_member(4, 0.5, 0.5, 1.0, 1);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::infeasible_class);
  }

  // Per-entry bound: max |a_jk| <= rho(A) <= C0 for generated members.
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const SymmetricMatrix g = gen_sparse_member(12, 0.3, 4.0, 1.5, seed);
    const double rho = spectral_radius(g);
    CHECK(g.max_abs_entry() <= rho * (1.0 + 1e-9));
    CHECK(rho <= 1.5 * (1.0 + 1e-9));
  }
}
