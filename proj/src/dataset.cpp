#include "switchid/dataset.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <string>

namespace switchid {

void SystemOrder::validate() const {
  if (na < 0 || nb < 0 || na + nb < 1)
    throw Error(Errc::invalid_argument, "order needs na >= 0, nb >= 0 and na + nb >= 1");
}

TimeSeries TimeSeries::slice(Index begin, Index end) const {
  if (begin < 0 || end > size() || begin > end)
    throw Error(Errc::invalid_argument, "slice out of range");
  return TimeSeries{u.segment(begin, end - begin), y.segment(begin, end - begin), order};
}

RegressorMatrix RegressorMatrix::slice(Index begin, Index end) const {
  return RegressorMatrix{X.middleCols(begin, end - begin), y.segment(begin, end - begin),
                         offset + begin};
}

RegressorMatrix RegressorMatrix::gather(const std::vector<Index>& columns) const {
  RegressorMatrix out{Matrix(X.rows(), static_cast<Index>(columns.size())),
                      Vector(static_cast<Index>(columns.size())), offset};
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out.X.col(static_cast<Index>(i)) = X.col(columns[i]);
    out.y(static_cast<Index>(i)) = y(columns[i]);
  }
  return out;
}

std::vector<int> TrueSystem::sample_modes() const {
  std::vector<int> out(static_cast<std::size_t>(length()));
  for (std::size_t m = 0; m < modes.size(); ++m)
    std::fill(out.begin() + boundaries[m], out.begin() + boundaries[m + 1], modes[m]);
  return out;
}

void TrueSystem::validate(const SystemOrder& order) const {
  order.validate();
  if (thetas.empty()) throw Error(Errc::invalid_argument, "no submodels");
  for (const auto& t : thetas)
    if (t.size() != order.n())
      throw Error(Errc::invalid_argument, "theta dimension does not match the order");
  if (modes.empty() || boundaries.size() != modes.size() + 1)
    throw Error(Errc::invalid_argument, "need one more boundary than segment modes");
  if (boundaries.front() != 0) throw Error(Errc::invalid_argument, "first boundary must be 0");
  for (std::size_t m = 0; m + 1 < boundaries.size(); ++m)
    if (boundaries[m + 1] <= boundaries[m])
      throw Error(Errc::invalid_argument, "boundaries must increase strictly");
  for (int mode : modes)
    if (mode < 0 || mode >= static_cast<int>(thetas.size()))
      throw Error(Errc::invalid_argument, "segment mode out of range");
  if (!(noise_sigma >= 0.0)) throw Error(Errc::invalid_argument, "noise sigma must be >= 0");
}

RegressorMatrix build_regressors(const TimeSeries& ts) {
  ts.order.validate();
  if (ts.u.size() != ts.y.size())
    throw Error(Errc::invalid_argument, "u and y differ in length");
  const Index lag = ts.order.max_lag();
  const Index n_samples = ts.size();
  if (n_samples <= lag)
    throw Error(Errc::series_too_short,
                "series of " + std::to_string(n_samples) + " samples, max lag " + std::to_string(lag));

  const Index cols = n_samples - lag;
  RegressorMatrix out{Matrix(ts.order.n(), cols), ts.y.tail(cols), lag};
  for (Index c = 0; c < cols; ++c) {
    const Index k = lag + c;
    for (int i = 0; i < ts.order.na; ++i) out.X(i, c) = ts.y(k - 1 - i);
    for (int i = 0; i < ts.order.nb; ++i) out.X(ts.order.na + i, c) = ts.u(k - 1 - i);
  }
  return out;
}

namespace {

constexpr std::uint64_t kNoiseStream = 0x9e3779b97f4a7c15ULL;

}  // namespace

TimeSeries simulate(const TrueSystem& sys, const SystemOrder& order, const InputSpec& input,
                    Index n_samples, const SimulationOptions& opts) {
  sys.validate(order);
  if (n_samples < sys.length())
    throw Error(Errc::invalid_argument, "fewer samples than the switching schedule covers");

  std::mt19937_64 input_rng(sys.seed);
  std::mt19937_64 noise_rng(sys.seed ^ kNoiseStream);
  std::normal_distribution<double> input_dist(input.mean, input.stddev);
  std::normal_distribution<double> noise_dist(0.0, 1.0);

  TimeSeries ts{Vector(n_samples), Vector::Zero(n_samples), order};
  for (Index k = 0; k < n_samples; ++k) ts.u(k) = input_dist(input_rng);

  const auto lambda = sys.sample_modes();
  Vector x(order.n());
  for (Index k = 0; k < n_samples; ++k) {
    for (int i = 0; i < order.na; ++i) x(i) = k - 1 - i >= 0 ? ts.y(k - 1 - i) : 0.0;
    for (int i = 0; i < order.nb; ++i) x(order.na + i) = k - 1 - i >= 0 ? ts.u(k - 1 - i) : 0.0;
    // Samples past the schedule keep the last segment's mode.
    const int mode = k < static_cast<Index>(lambda.size()) ? lambda[static_cast<std::size_t>(k)]
                                                          : sys.modes.back();
    const double e = noise_dist(noise_rng);
    ts.y(k) = sys.thetas[static_cast<std::size_t>(mode)].dot(x) + sys.noise_sigma * e;
    if (!std::isfinite(ts.y(k)) || std::abs(ts.y(k)) > opts.overflow_bound)
      throw Error(Errc::divergent_trajectory, "output left the overflow bound at sample " +
                                                  std::to_string(k));
  }
  return ts;
}

TimeSeries simulate_at_snr(TrueSystem& sys, const SystemOrder& order, const InputSpec& input,
                           Index n_samples, double snr_db, const SimulationOptions& opts) {
  sys.noise_sigma = 0.0;
  TimeSeries clean = simulate(sys, order, input, n_samples, opts);
  if (std::isinf(snr_db) && snr_db > 0) return clean;
  sys.noise_sigma = sigma_for_snr(clean.y, snr_db);
  return simulate(sys, order, input, n_samples, opts);
}

std::vector<Index> to_regressor_boundaries(const std::vector<Index>& raw_boundaries, Index offset,
                                           Index n_columns) {
  std::vector<Index> out;
  out.reserve(raw_boundaries.size());
  for (Index b : raw_boundaries) {
    const Index c = std::clamp<Index>(b - offset, 0, n_columns);
    if (out.empty() || c > out.back()) out.push_back(c);
  }
  if (out.empty() || out.front() != 0) out.insert(out.begin(), 0);
  if (out.back() != n_columns) out.push_back(n_columns);
  return out;
}

}  // namespace switchid
