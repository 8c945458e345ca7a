#include <doctest.h>

#include "support.hpp"

using namespace switchid::testing;

TEST_CASE("dynamic programme equals exhaustive segmentation") {
  const PropertyReport r = dp_matches_exhaustive(50, 1);
  CHECK(r.trials == 50);
  CHECK(r.failures == 0);
}

TEST_CASE("recursive and batch least squares agree") {
  const PropertyReport r = rls_matches_batch(1000, 2);
  CHECK(r.failures == 0);
  CHECK(r.worst <= 1e-6);
}

TEST_CASE("spark, coherence and genericity match enumeration") {
  CHECK(certificates_match_enumeration(100, 3).failures == 0);
}

TEST_CASE("coherence of the complement basis equals tau") {
  const PropertyReport r = coherence_equals_tau(100, 4);
  CHECK(r.failures == 0);
  CHECK(r.worst <= 1e-8);
}

TEST_CASE("greedy pursuit recovers planted supports") {
  CHECK(omp_recovers_planted_support(100, 5).failures == 0);
}
