#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "switchid/pipeline.hpp"
#include "switchid/presets.hpp"

namespace switchid {

struct RunRecord {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  Index S = 0;
  double fit_train = 0.0;
  double fit_test = 0.0;
  double fit_test_simulated = 0.0;
  std::vector<Vector> thetas;
  std::vector<Index> instants;       ///< identified, raw time
  std::vector<Index> true_instants;  ///< raw time
  double seconds = 0.0;
};

/// Per true theta: statistics of the estimates whose nearest true theta it is.
struct ThetaStats {
  Vector truth;
  Index matched = 0;
  Vector mean;
  Vector stddev;              ///< population deviation; zero with one estimate
  Vector mean_abs_error;
};

struct MonteCarloSummary {
  std::vector<RunRecord> runs;
  std::vector<ThetaStats> thetas;
  std::vector<std::uint64_t> failed;
  double mean_fit = 0.0;
  double median_fit = 0.0;
  double seconds = 0.0;
};

/// Worker count: SWITCHID_THREADS when set and positive, else `requested`
/// when positive, else the hardware concurrency.
unsigned worker_count(unsigned requested = 0);

using ExperimentFactory = std::function<Experiment(std::uint64_t seed)>;
using ConfigFactory = std::function<IdentifyConfig(const Experiment&)>;

/// Identifies `runs` replications with seeds base_seed, base_seed+1, ... on a
/// worker pool. Records come back in seed order whatever the scheduling.
MonteCarloSummary run_montecarlo(const ExperimentFactory& make, const ConfigFactory& configure,
                                 std::uint64_t base_seed, int runs, unsigned threads = 0);

/// Nearest-truth alignment of estimated thetas and the per-theta table.
std::vector<ThetaStats> align_thetas(const std::vector<Vector>& truth,
                                     const std::vector<std::vector<Vector>>& estimates);

double median(std::vector<double> values);

}  // namespace switchid
