#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "switchid/error.hpp"

namespace switchid {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Output and input lag counts of an ARX model.
struct SystemOrder {
  int na = 0;
  int nb = 0;

  int n() const noexcept { return na + nb; }
  int max_lag() const noexcept { return na > nb ? na : nb; }
  void validate() const;
};

/// Raw input/output samples. Index 0 is the first sample.
struct TimeSeries {
  Vector u;
  Vector y;
  SystemOrder order;

  Index size() const noexcept { return y.size(); }
  /// Samples [begin, end), keeping the order.
  TimeSeries slice(Index begin, Index end) const;
};

/// Lag-stacked regressors. Column c holds
/// [y(k-1) .. y(k-na), u(k-1) .. u(k-nb)] for raw time k = offset + c,
/// and y(c) is the matching output y_k.
struct RegressorMatrix {
  Matrix X;
  Vector y;
  Index offset = 0;

  Index rows() const noexcept { return X.rows(); }
  Index cols() const noexcept { return X.cols(); }
  /// Columns [begin, end) as a standalone regressor set.
  RegressorMatrix slice(Index begin, Index end) const;
  /// Columns listed in `columns`, in that order.
  RegressorMatrix gather(const std::vector<Index>& columns) const;
};

/// Ground truth of a switched ARX system. `boundaries` holds the raw-time
/// segment starts plus the series end: 0 = b_0 < b_1 < ... < b_M = N, and
/// segment m spans [b_m, b_{m+1}) with submodel `modes[m]` (0-based).
struct TrueSystem {
  std::vector<Vector> thetas;
  std::vector<Index> boundaries;
  std::vector<int> modes;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  Index segments() const noexcept { return static_cast<Index>(modes.size()); }
  Index length() const noexcept { return boundaries.empty() ? 0 : boundaries.back(); }
  /// Per-sample submodel index over raw time [0, N).
  std::vector<int> sample_modes() const;
  void validate(const SystemOrder& order) const;
};

struct InputSpec {
  double mean = 0.0;
  double stddev = 1.0;
};

struct SimulationOptions {
  double overflow_bound = 1e8;
};

RegressorMatrix build_regressors(const TimeSeries& ts);

/// y_k = theta_{lambda_k}' x_k + e_k with zero initial lags. The input and the
/// noise draw from separate streams seeded by `sys.seed`, so changing the
/// noise level leaves the input sequence untouched.
TimeSeries simulate(const TrueSystem& sys, const SystemOrder& order, const InputSpec& input,
                    Index n_samples, const SimulationOptions& opts = {});

/// Simulates noiselessly, derives the noise level giving `snr_db` against the
/// noiseless output, then simulates again with that level. An infinite SNR
/// yields the noiseless series. The chosen sigma is written to `sys.noise_sigma`.
TimeSeries simulate_at_snr(TrueSystem& sys, const SystemOrder& order, const InputSpec& input,
                           Index n_samples, double snr_db, const SimulationOptions& opts = {});

/// Noise standard deviation that puts `noiseless_y` at `snr_db` decibels.
template <typename Derived>
double sigma_for_snr(const Eigen::DenseBase<Derived>& noiseless_y, double snr_db) {
  const auto& y = noiseless_y.derived();
  if (y.size() < 2) throw Error(Errc::degenerate_signal, "need at least two samples");
  const double mean = y.mean();
  const double var = (y.array() - mean).square().sum() / static_cast<double>(y.size());
  if (!(var > 0.0)) throw Error(Errc::degenerate_signal, "signal variance is zero");
  return std::sqrt(var) * std::pow(10.0, -snr_db / 20.0);
}

/// Maps raw-time boundaries onto regressor columns, clamping instants inside
/// the burn-in window to the first usable column and dropping duplicates.
std::vector<Index> to_regressor_boundaries(const std::vector<Index>& raw_boundaries, Index offset,
                                           Index n_columns);

}  // namespace switchid
