#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qforma/bounds.hpp"
#include "qforma/error.hpp"
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

}  // namespace

TEST_CASE("theorem-style bound on the 2x2 identity") {
  const BoundBreakdown b = theorem1_bound(gen_identity(2), unit_profile(4.0));
  CHECK(b.method == "theorem1");
  CHECK_FALSE(b.log_scale);
  CHECK(b.term("T1") == 4.0);   // (sum a_jj^2)^{q/2} = 2^2
  CHECK(b.term("T2") == 0.0);
  CHECK(b.term("T3") == 0.0);
  CHECK(b.term("T4") == 2.0);   // |s|_4^4 = 1 + 1
  CHECK(b.structural_total == 6.0);
  CHECK(b.cq == 1.0);
}

TEST_CASE("theorem-style bound on the 2x2 ones matrix") {
  const BoundBreakdown b = theorem1_bound(gen_ones(2), unit_profile(4.0));
  const double root2 = std::sqrt(2.0);
  CHECK(b.term("T1") == 4.0);
  CHECK(b.term("T2") == doctest::Approx(root2).epsilon(1e-14));
  CHECK(b.term("T3") == doctest::Approx(root2).epsilon(1e-14));
  // s = (2, 0): |s|_4^4 = 16
  CHECK(b.term("T4") == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(b.structural_total ==
        doctest::Approx(20.0 + 2.0 * root2).epsilon(1e-12));
}

TEST_CASE("zero matrix gives zero bounds") {
  const BoundBreakdown t = theorem1_bound(gen_zero(5), unit_profile(3.5));
  for (const auto& [name, value] : t.terms) CHECK(value == 0.0);
  CHECK(t.structural_total == 0.0);
  const BoundBreakdown b =
      bai_silverstein_bound(gen_zero(5), unit_profile(3.5));
  CHECK(b.structural_total == 0.0);
}

TEST_CASE("frobenius-scale bound oracles") {
  const BoundBreakdown id2 =
      bai_silverstein_bound(gen_identity(2), unit_profile(4.0));
  CHECK(id2.method == "bai_silverstein");
  CHECK(id2.term("S1") == 4.0);  // |A|_F^4 = 2^2
  CHECK(id2.term("S2") == 2.0);  // |s|_4^4
  CHECK(id2.structural_total == 6.0);

  const BoundBreakdown ones2 =
      bai_silverstein_bound(gen_ones(2), unit_profile(4.0));
  CHECK(ones2.term("S1") == doctest::Approx(16.0).epsilon(1e-14));
  CHECK(ones2.term("S2") == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(ones2.structural_total == doctest::Approx(32.0).epsilon(1e-12));
}

TEST_CASE("moment profile validation") {
  CHECK_THROWS_AS(unit_profile(2.0), Error);
  MomentProfile bad;
  bad.q = 4.0;
  bad.kappa2 = 2.0;  // violates kappa2 <= kappa4
  CHECK_THROWS_AS(bad.validate(), Error);
  MomentProfile neg;
  neg.q = 4.0;
  neg.nu_q = -1.0;
  CHECK_THROWS_AS(neg.validate(), Error);
  CHECK_THROWS_AS(theorem1_bound(gen_identity(2), unit_profile(4.0), -1.0),
                  Error);
}

TEST_CASE("corollary bound oracles") {
  const Corollary1Bound b = corollary1_bound(100, 4.0, 0.5, 10.0, 1.0);
  CHECK(b.raw.term("p_term") == 10000.0);
  CHECK(b.raw.term("sparse_term") == 1000.0);
  CHECK(b.raw.structural_total == 11000.0);

  const Corollary1Bound unit = corollary1_bound(1, 4.0, 0.5, 1.0, 1.0);
  CHECK(unit.raw.structural_total == 2.0);

  // Constant-tracked T4 = C0^q p^{q/4}.
  const Corollary1Bound t4 = corollary1_bound(16, 4.0, 0.5, 1.0, 1.0);
  CHECK(t4.tracked.term("T4") == 16.0);

  // C0 scaling of the tracked terms.
  const Corollary1Bound c2 = corollary1_bound(16, 4.0, 0.0, 4.0, 2.0);
  CHECK(c2.tracked.term("T1") ==
        doctest::Approx(16.0 * 256.0).epsilon(1e-12));  // 2^4 * 16^2
  CHECK(c2.tracked.term("T4") ==
        doctest::Approx(16.0 * 16.0).epsilon(1e-12));   // 2^4 * 16

  CHECK_THROWS_AS(corollary1_bound(10, 2.0, 0.5, 1.0, 1.0), Error);
  CHECK_THROWS_AS(corollary1_bound(10, 4.0, 1.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(corollary1_bound(10, 4.0, 0.5, 0.0, 1.0), Error);
  CHECK_THROWS_AS(corollary1_bound(0, 4.0, 0.5, 1.0, 1.0), Error);
}

TEST_CASE("rosenthal sum bound") {
  CHECK(rosenthal_sum_bound(4, 4.0, 3.0, 1.0) == 3328.0);
  CHECK(rosenthal_sum_bound(0, 4.0, 3.0, 1.0) == 0.0);
  CHECK(rosenthal_sum_bound(1, 4.0, 1.0, 1.0) == 272.0);
  // The numeric constant enters as C^q.
  CHECK(rosenthal_sum_bound(1, 4.0, 1.0, 1.0, 2.0) == 16.0 * 272.0);
  CHECK_THROWS_AS(rosenthal_sum_bound(4, 4.0, -1.0, 1.0), Error);
  CHECK_THROWS_AS(rosenthal_sum_bound(4, 1.5, 1.0, 1.0), Error);
  CHECK_THROWS_AS(rosenthal_sum_bound(-1, 4.0, 1.0, 1.0), Error);
}

TEST_CASE("burkholder diagonal bound") {
  MomentProfile prof = unit_profile(4.0);
  prof.nu_q = 1.0;
  CHECK(burkholder_diag_bound({1.0, 1.0}, prof) == 36.0);  // (3*2)^2
  CHECK(burkholder_diag_bound({}, prof) == 0.0);
  prof.nu_q = 0.0;  // X^2 == 1 case
  CHECK(burkholder_diag_bound({5.0, -2.0, 1.0}, prof) == 0.0);
}

TEST_CASE("bound comparison report") {
  const CompareReport id2 = compare_bounds(gen_identity(2), unit_profile(4.0));
  CHECK(id2.ratio == 1.0);  // both 6

  const CompareReport zero = compare_bounds(gen_zero(3), unit_profile(4.0));
  CHECK(zero.ratio == 1.0);  // zero/zero convention

  // Block matrix with m = k = 4: hand-computed term values.
  const CompareReport blk =
      compare_bounds(gen_block_ones(4, 4), unit_profile(4.0));
  CHECK(blk.theorem1.term("T1") == doctest::Approx(256.0).epsilon(1e-12));
  CHECK(blk.theorem1.term("T2") ==
        doctest::Approx(std::sqrt(48.0)).epsilon(1e-12));
  CHECK(blk.theorem1.term("T3") == doctest::Approx(36.0).epsilon(1e-12));
  CHECK(blk.theorem1.term("T4") == doctest::Approx(1024.0).epsilon(1e-10));
  CHECK(blk.bai_silverstein.term("S1") ==
        doctest::Approx(4096.0).epsilon(1e-12));
  CHECK(blk.bai_silverstein.term("S2") ==
        doctest::Approx(1024.0).epsilon(1e-10));
  const double expect =
      (256.0 + std::sqrt(48.0) + 36.0 + 1024.0) / 5120.0;
  CHECK(blk.ratio == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("frobenius domination of the base terms") {
  CounterRng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 31);
    const SymmetricMatrix a = random_symmetric(p, rng, 2.0);
    const double frob = frobenius_norm(a);
    for (double q : {2.5, 4.0, 7.0}) {
      const BoundBreakdown b = theorem1_bound(a, unit_profile(q));
      const double base3 = b.term("T1") + b.term("T2") + b.term("T3");
      CHECK(base3 <= 2.0 * std::pow(frob, q) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("scale equivariance") {
  CounterRng rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 10);
    const SymmetricMatrix a = random_symmetric(p, rng);
    for (double c : {-2.0, 0.5, 3.0}) {
      for (double q : {3.0, 4.5}) {
        const BoundBreakdown base = theorem1_bound(a, unit_profile(q));
        const BoundBreakdown scaled =
            theorem1_bound(a.scaled(c), unit_profile(q));
        const double factor = std::pow(std::fabs(c), q);
        for (std::size_t i = 0; i < base.terms.size(); ++i)
          CHECK(scaled.terms[i].second ==
                doctest::Approx(base.terms[i].second * factor)
                    .epsilon(1e-11));
        const BoundBreakdown bs_base =
            bai_silverstein_bound(a, unit_profile(q));
        const BoundBreakdown bs_scaled =
            bai_silverstein_bound(a.scaled(c), unit_profile(q));
        CHECK(bs_scaled.structural_total ==
              doctest::Approx(bs_base.structural_total * factor)
                  .epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("permutation invariance") {
  CounterRng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 3 + static_cast<int>(rng.next_u64() % 10);
    const SymmetricMatrix a = random_symmetric(p, rng);
    std::vector<int> perm(p);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = p - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.next_u64() % (i + 1)]);
    std::vector<double> e(static_cast<std::size_t>(p) * p);
    for (int j = 0; j < p; ++j)
      for (int k = 0; k < p; ++k)
        e[static_cast<std::size_t>(j) * p + k] = a(perm[j], perm[k]);
    const SymmetricMatrix pa(p, std::move(e));
    const BoundBreakdown t1 = theorem1_bound(a, unit_profile(4.0));
    const BoundBreakdown t2 = theorem1_bound(pa, unit_profile(4.0));
    CHECK(t1.structural_total ==
          doctest::Approx(t2.structural_total).epsilon(1e-10));
    const BoundBreakdown b1 = bai_silverstein_bound(a, unit_profile(4.0));
    const BoundBreakdown b2 = bai_silverstein_bound(pa, unit_profile(4.0));
    CHECK(b1.structural_total ==
          doctest::Approx(b2.structural_total).epsilon(1e-10));
  }
}

TEST_CASE("corollary consistency for generated sparse members") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (double r : {0.0, 0.4}) {
      const double m_p = 6.0, c0 = 1.5;
      const SymmetricMatrix a = gen_sparse_member(24, r, m_p, c0, seed);
      REQUIRE(is_in_sparse_class(a, r, m_p, c0).member);
      const double total =
          theorem1_bound(a, unit_profile(4.0)).structural_total;
      const double tracked =
          corollary1_bound(24, 4.0, r, m_p, c0).tracked.structural_total;
      CHECK(total <= tracked * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("log-scale overflow path") {
  const SymmetricMatrix huge = gen_identity(4).scaled(1e200);
  const BoundBreakdown b = theorem1_bound(huge, unit_profile(4.0));
  CHECK(b.log_scale);
  const double ln10 = std::log(10.0);
  const double t1_log = 2.0 * (std::log(4.0) + 400.0 * ln10);
  const double t4_log = std::log(4.0) + 800.0 * ln10;
  CHECK(b.term("T1") == doctest::Approx(t1_log).epsilon(1e-12));
  CHECK(b.term("T4") == doctest::Approx(t4_log).epsilon(1e-12));
  const double expect_total =
      t1_log + std::log1p(std::exp(t4_log - t1_log));
  CHECK(b.structural_total == doctest::Approx(expect_total).epsilon(1e-12));

  // The two bounds stay comparable through the log-scale path.
  const CompareReport rep = compare_bounds(huge, unit_profile(4.0));
  CHECK(rep.theorem1.log_scale);
  CHECK(rep.bai_silverstein.log_scale);
  CHECK(rep.ratio == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(b.term("nope"), Error);
}
