#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <switchid/dataset.hpp>
#include <switchid/pipeline.hpp>

namespace switchid::testing {

using Rng = std::mt19937_64;

Matrix gaussian(Rng& rng, Index rows, Index cols);
Vector gaussian(Rng& rng, Index size);
Index uniform(Rng& rng, Index lo, Index hi);  ///< inclusive
double uniform_real(Rng& rng, double lo, double hi);

/// Regressor set with the given columns and outputs and offset 0.
RegressorMatrix make_regs(Matrix X, Vector y);

/// Stable ARX parameters [a; b] with real poles inside (-0.8, 0.8).
Vector stable_theta(Rng& rng, const SystemOrder& order);

/// Random switched system: segment gaps in [min_gap, max_gap], consecutive
/// modes distinct, every mode used at least once.
TrueSystem random_system(Rng& rng, const SystemOrder& order, int modes, Index segments,
                         Index min_gap, Index max_gap);

// Brute-force oracles.
Index rank_svd(const Matrix& A, double scale);
Index brute_spark(const Matrix& A);
double brute_coherence(const Matrix& A);
Index brute_genericity(const Matrix& A, Index k);
/// Best total cost over all segmentations into `segments` pieces of at
/// least `dwell` columns, and the boundaries achieving it.
double brute_segmentation(const RegressorMatrix& regs, Index segments, Index dwell, double ridge,
                          std::vector<Index>* best = nullptr);

/// Outcome of one property suite: draws tried, draws failing, worst error.
struct PropertyReport {
  int trials = 0;
  int failures = 0;
  double worst = 0.0;
  bool ok() const { return trials > 0 && failures == 0; }
};

PropertyReport dp_matches_exhaustive(int draws, std::uint64_t seed);
PropertyReport rls_matches_batch(int segments, std::uint64_t seed);
PropertyReport certificates_match_enumeration(int matrices, std::uint64_t seed);
PropertyReport coherence_equals_tau(int draws, std::uint64_t seed);
PropertyReport omp_recovers_planted_support(int trials, std::uint64_t seed);
/// Noiseless systems with n <= 4, S <= 3 and dwell >= 3n: identify must find
/// S and every theta to 1e-6.
PropertyReport noiseless_end_to_end(int systems, std::uint64_t seed, Extractor extractor = Extractor::l1);

}  // namespace switchid::testing
