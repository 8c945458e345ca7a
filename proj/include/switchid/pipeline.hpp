#pragma once

#include <optional>
#include <string>
#include <vector>

#include "switchid/extraction.hpp"
#include "switchid/segmentation.hpp"
#include "switchid/sparsity.hpp"

namespace switchid {

enum class Extractor { l1, l0 };

std::string to_string(Extractor e);
Extractor extractor_from_string(const std::string& s);

struct IdentifyConfig {
  Index dwell = 10;
  Index max_segments = 15;
  Index fixed_segments = 0;
  Extractor extractor = Extractor::l1;
  ExtractionConfig extraction;
  double merge_tolerance = 1e-3;  ///< relative distance below which thetas merge
  /// First `split` raw samples train; the rest are predicted and scored.
  /// Zero or >= N trains on everything.
  Index split = 0;
  /// Runs the segmentation over the whole series instead of the training
  /// part; extraction still sees only the training part of each segment.
  bool segment_all = false;
  bool sparsity_diagnostics = true;
  Index pe_window = 0;  ///< o_e for the windowed bound; 0 uses the dwell

  void validate() const;
};

struct SubmodelSet {
  std::vector<Vector> thetas;
  std::vector<int> segment_labels;  ///< one per segment, 0-based
  std::vector<int> sample_labels;   ///< one per training regressor column
  std::vector<bool> flagged;        ///< per theta: produced by the stall path

  Index size() const noexcept { return static_cast<Index>(thetas.size()); }
};

struct ExtractionRound {
  Index remaining = 0;               ///< blocks available at the start
  std::vector<Index> segments;       ///< segments taken by this round
  Vector theta;
  int iterations = 0;
  bool converged = false;
  double threshold = 0.0;
  std::vector<double> residual_profile;
  std::vector<Index> support;
  std::optional<SparsitySummary> sparsity;
  bool stalled = false;
  std::string stall_reason;
};

struct PeDiagnostics {
  double min_theta_distance = 0.0;  ///< +inf with fewer than two thetas
  bool distinct_ok = true;
  std::vector<double> gram_min_eigenvalue;
  std::vector<bool> gram_ok;
  std::vector<bool> witness_ok;
  Index window = 0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  bool verdict = false;
  std::vector<std::string> reasons;
};

struct Prediction {
  Vector yhat;
  std::vector<int> labels;
};

struct IdentificationResult {
  SystemOrder order;
  Index samples = 0;  ///< raw length of the input series
  Index split = 0;    ///< raw index where the test part starts (== samples without one)
  Index offset = 0;   ///< raw time of regressor column 0
  InstantResult instants;    ///< over the training part, or everything with segment_all
  Segmentation segmentation; ///< training segments the submodels are labelled on
  SubmodelSet submodels;
  std::vector<ExtractionRound> rounds;
  bool stalled = false;
  PeDiagnostics diagnostics;
  Prediction train;
  double fit_train = 0.0;
  std::optional<Prediction> test;
  std::optional<double> fit_test;
  /// Fit of the free-run simulation over the test labels, for comparison.
  std::optional<double> fit_test_simulated;
  IdentifyConfig config;

  Index S() const noexcept { return submodels.size(); }
  /// Segment boundaries of `instants` in raw time.
  std::vector<Index> raw_instants() const;
};

/// Segments the series, extracts submodels round by round from the training
/// segments, merges duplicates, labels, and scores.
IdentificationResult identify(const TimeSeries& ts, const IdentifyConfig& cfg);

/// 100 (1 - ||yhat - y|| / ||y - mean(y)||).
double fit_score(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& yhat);

/// One-step prediction with given per-column labels.
Prediction predict_with_labels(const std::vector<Vector>& thetas, const RegressorMatrix& regs,
                               const std::vector<int>& labels);

/// One-step prediction with labels from a segmentation over the fixed theta
/// set: minimises the total squared residual over segmentations whose
/// segments are at least `dwell` columns long, each segment taking its best
/// theta. Series shorter than the dwell get a single label.
Prediction predict_dp_assign(const std::vector<Vector>& thetas, const RegressorMatrix& regs,
                             Index dwell);

/// Free-run output: output lags come from earlier predictions, except those
/// reaching before column 0, which keep their measured values. `na` is the
/// number of output lags at the top of each regressor.
Vector simulate_with_labels(const std::vector<Vector>& thetas, const RegressorMatrix& regs,
                            const std::vector<int>& labels, int na);

enum class ModePolicy { dp_assign, oracle };

Prediction predict(const IdentificationResult& result, const RegressorMatrix& regs,
                   ModePolicy policy, const std::vector<int>* oracle_labels = nullptr);

PeDiagnostics pe_diagnostics(const IdentificationResult& result, const RegressorMatrix& train,
                             Index window);

/// Fraction of samples whose per-sample normalised residual is within eps
/// under both thetas, for every pair. Entry (i, i) is the fraction fitted by
/// theta i alone.
Matrix kernel_overlap(const std::vector<Vector>& thetas, const RegressorMatrix& regs, double eps);

/// Regressors of the training part and of the test part of `ts`. Test
/// columns keep the lags that reach back into the training part.
std::pair<RegressorMatrix, std::optional<RegressorMatrix>> split_regressors(const TimeSeries& ts,
                                                                            Index split);

}  // namespace switchid
