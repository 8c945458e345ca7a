#include <doctest.h>

#include <cmath>

#include <switchid/presets.hpp>
#include <switchid/sparsity.hpp>

#include "support.hpp"

using namespace switchid;
using testing::make_regs;

namespace {
const Matrix kSmall{{1.0, 0.0, 1.0}, {0.0, 1.0, 1.0}};
}

TEST_CASE("projector of a square full-rank X is zero") {
  const Projector p = projector(make_regs(Matrix::Identity(2, 2), Vector::Ones(2)));
  CHECK(p.full.isZero(1e-14));
  CHECK(p.basis.rows() == 0);
}

TEST_CASE("projector of X = [1 1]") {
  const Projector p = projector(make_regs(Matrix{{1.0, 1.0}}, Vector{{1.0, 3.0}}));
  const Matrix expected = 0.5 * Matrix{{1.0, -1.0}, {-1.0, 1.0}};
  CHECK((p.full - expected).norm() <= 1e-14);
  REQUIRE(p.basis.rows() == 1);
  CHECK((p.basis.transpose() * p.basis - expected).norm() <= 1e-14);
  CHECK(std::abs(p.b(0)) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("projector is idempotent and annihilates the regressors") {
  testing::Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const Index n = testing::uniform(rng, 1, 4);
    const Index N = testing::uniform(rng, n, n + 25);
    const RegressorMatrix r = make_regs(testing::gaussian(rng, n, N), testing::gaussian(rng, N));
    const Projector p = projector(r);
    CHECK((p.full * p.full - p.full).norm() <= 1e-10);
    CHECK((p.full * r.X.transpose()).norm() <= 1e-10 * r.X.norm());
    CHECK((p.basis * p.basis.transpose() - Matrix::Identity(N - n, N - n)).norm() <= 1e-10);
    CHECK((p.basis.transpose() * p.basis - p.full).norm() <= 1e-10);
  }
}

TEST_CASE("rank-deficient regressors have no projector") {
  CHECK_THROWS_AS(projector(make_regs(Matrix{{1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}}, Vector::Ones(3))), Error);
}

TEST_CASE("spark") {
  CHECK(spark(kSmall) == 3);
  CHECK(spark(Matrix{{1.0, 0.0, 2.0}, {1.0, 0.0, 1.0}}) == 1);
  CHECK(spark(Matrix{{1.0, 2.0, 0.3}, {1.0, 2.0, -0.4}}) == 2);
  CHECK(spark(Matrix::Identity(3, 3)) == kInfinity);
}

TEST_CASE("mutual coherence") {
  CHECK(mutual_coherence(Matrix::Identity(3, 3)) == 0.0);
  CHECK(mutual_coherence(Matrix{{1.0, 2.0, 0.3}, {1.0, 2.0, -0.4}}) == doctest::Approx(1.0));
  CHECK(mutual_coherence(kSmall) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(mutual_coherence(Matrix{{1.0, 0.0}, {1.0, 0.0}}), Error);
}

TEST_CASE("tau") {
  CHECK(tau(Matrix{{1.0, 1.0}}) == doctest::Approx(1.0));
  CHECK(hat_matrix(Matrix{{1.0, 1.0}}).isApprox(Matrix::Constant(2, 2, 0.5)));
  try {
    tau(Matrix::Identity(2, 2));
    FAIL("expected leverage one");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::leverage_one);
  }
}

TEST_CASE("genericity index") {
  CHECK(genericity_index(kSmall, 0) == 0);
  CHECK(genericity_index(kSmall, 2) == 2);
  CHECK(genericity_index(kSmall, 1) == 1);
  CHECK(genericity_index(kSmall, 3) == kInfinity);
  const Matrix low{{1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}};
  CHECK(genericity_index(low, 2) == kInfinity);
}

TEST_CASE("exhaustive certificates refuse large inputs") {
  CHECK_THROWS_AS(spark(Matrix::Random(3, kMaxExhaustiveColumns + 1)), Error);
}

TEST_CASE("nu") {
  const Matrix cols{{1.0, 3.0}, {0.0, 0.0}};
  CHECK(nu(cols) == doctest::Approx(2.0));
  CHECK(nu(Vector{{-2.0, 2.0, 2.0, -2.0}}) == doctest::Approx(2.0));
  CHECK(nu(Matrix{{3.0}, {4.0}}) == doctest::Approx(5.0));
  CHECK_THROWS_AS(nu(Matrix(0, 0)), Error);
}

TEST_CASE("extraction chain") {
  CHECK(check_extraction_chain({10}, {}).holds);
  CHECK(check_extraction_chain({10}, {}).stages.empty());
  const ExtractionBound b = check_extraction_chain({8, 2}, {3.0});
  REQUIRE(b.stages.size() == 1);
  CHECK(b.stages[0].remaining == 10);
  CHECK(b.stages[0].holds);
  CHECK_FALSE(check_extraction_chain({6, 4}, {3.0}).holds);
  CHECK_FALSE(check_extraction_chain({8, 2}, {11.0}).holds);
}

TEST_CASE("periodic preset certificates are frozen") {
  Experiment e = paper_periodic(1, 30.0);
  const RegressorMatrix r = build_regressors(e.generate()).slice(0, 798);
  const double t = tau(r.X);
  CHECK(t == doctest::Approx(0.0244370820).epsilon(1e-8));
  const std::vector<Vector>& thetas = e.truth.thetas;
  // Extraction order: the mode with most samples first.
  const auto b = to_regressor_boundaries(e.truth.boundaries, r.offset, 798);
  std::vector<std::vector<Index>> groups(thetas.size());
  for (std::size_t m = 0; m + 1 < b.size(); ++m)
    for (Index c = b[m]; c < b[m + 1]; ++c)
      groups[static_cast<std::size_t>(e.truth.modes[m])].push_back(c);
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& c) { return a.size() > c.size(); });
  const ExtractionBound bound = extraction_bound(r, groups);
  REQUIRE(bound.stages.size() == 2);
  // 397 samples of the largest mode against 798 - 20.96: the sequential
  // uniqueness chain does not hold on this data.
  CHECK(bound.stages[0].group_size == 397);
  CHECK(bound.stages[0].theta_bound == doctest::Approx(20.9607).epsilon(1e-4));
  CHECK(bound.stages[1].remaining == 401);
  CHECK(bound.stages[1].theta_bound == doctest::Approx(16.6229).epsilon(1e-4));
  CHECK_FALSE(bound.holds);
}

TEST_CASE("coherence bound on spark") {
  testing::Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const Index rows = testing::uniform(rng, 2, 5);
    const Matrix A = testing::gaussian(rng, rows, testing::uniform(rng, rows + 1, 8));
    const Index s = spark(A);
    CHECK(static_cast<double>(s) >= 1.0 + 1.0 / mutual_coherence(A) - 1e-9);
  }
}

TEST_CASE("planted sparse solutions below spark/2 are unique") {
  testing::Rng rng(9);
  for (int t = 0; t < 30; ++t) {
    const Index rows = testing::uniform(rng, 3, 5);
    const Index cols = testing::uniform(rng, rows + 1, 8);
    const Matrix A = testing::gaussian(rng, rows, cols);
    const Index s = spark(A);
    const Index k = (s - 1) / 2;  // strictly below spark/2
    if (k < 1) continue;
    Vector z0 = Vector::Zero(cols);
    for (Index i = 0; i < k; ++i) z0(i) = testing::uniform_real(rng, 1.0, 2.0);
    const Vector b = A * z0;
    // Every support of size <= k other than z0's leaves a residual.
    std::vector<bool> mask(static_cast<std::size_t>(cols), false);
    std::fill(mask.begin(), mask.begin() + k, true);
    do {
      std::vector<Index> idx;
      for (Index i = 0; i < cols; ++i)
        if (mask[static_cast<std::size_t>(i)]) idx.push_back(i);
      bool planted = true;
      for (Index i : idx) planted = planted && i < k;
      if (planted) continue;
      Matrix sub(rows, k);
      for (Index i = 0; i < k; ++i) sub.col(i) = A.col(idx[static_cast<std::size_t>(i)]);
      const Vector z = sub.colPivHouseholderQr().solve(b);
      CHECK((sub * z - b).norm() > 1e-8 * b.norm());
    } while (std::prev_permutation(mask.begin(), mask.end()));
  }
}

TEST_CASE("summary of a small regressor set") {
  testing::Rng rng(4);
  const RegressorMatrix r = make_regs(testing::gaussian(rng, 2, 8), testing::gaussian(rng, 8));
  const SparsitySummary s = summarize(r);
  REQUIRE(s.mu);
  REQUIRE(s.spark);
  CHECK(*s.mu == doctest::Approx(s.tau).epsilon(1e-8));
  CHECK(*s.spark == testing::brute_spark(projector(r).basis));
  CHECK(s.genericity.at(2) == testing::brute_genericity(r.X, 2));
}
