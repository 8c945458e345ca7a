#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "switchid/dataset.hpp"
#include "switchid/pipeline.hpp"

namespace switchid {

/// A reproducible simulation setup: system, excitation, noise and the
/// identification settings that go with it.
struct Experiment {
  std::string name;
  SystemOrder order;
  TrueSystem truth;
  InputSpec input;
  Index samples = 1000;
  double snr_db = 30.0;
  Index split = 800;  ///< first `split` samples train, the rest test
  Index dwell = 10;
  Index max_segments = 15;
  Index fixed_segments = 0;  ///< known segment count, 0 when it is selected
  bool segment_all = false;  ///< instants are sought over train and test together

  /// Simulates the series; writes the realised noise level into `truth`.
  TimeSeries generate();
  /// Identification settings of the experiment with library defaults elsewhere.
  IdentifyConfig config() const;
};

/// Three order-(2,2) submodels, ten segments switching every 100 samples.
Experiment paper_periodic(std::uint64_t seed, double snr_db = 30.0);

/// Two order-(2,2) submodels alternating over fifteen segments. The
/// noiseless variant uses one reported schedule and any finite SNR the other.
Experiment paper_random(std::uint64_t seed, double snr_db = std::numeric_limits<double>::infinity());

/// Same two submodels with 14 interior instants drawn from `seed`, at least
/// `min_gap` samples apart.
Experiment paper_random_drawn(std::uint64_t seed, double snr_db, Index min_gap = 20);

std::optional<Experiment> preset_by_name(const std::string& name, std::uint64_t seed,
                                         std::optional<double> snr_db = std::nullopt);

std::vector<std::string> preset_names();

}  // namespace switchid
