#include "switchid/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

namespace switchid {

unsigned worker_count(unsigned requested) {
  if (const char* env = std::getenv("SWITCHID_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t h = values.size() / 2;
  return values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
}

std::vector<ThetaStats> align_thetas(const std::vector<Vector>& truth,
                                     const std::vector<std::vector<Vector>>& estimates) {
  std::vector<std::vector<Vector>> bins(truth.size());
  for (const auto& run : estimates)
    for (const Vector& est : run) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < truth.size(); ++i)
        if ((est - truth[i]).norm() < (est - truth[best]).norm()) best = i;
      if (!truth.empty()) bins[best].push_back(est);
    }

  std::vector<ThetaStats> out;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ThetaStats s;
    s.truth = truth[i];
    const Index n = truth[i].size();
    s.matched = static_cast<Index>(bins[i].size());
    s.mean = Vector::Zero(n);
    s.stddev = Vector::Zero(n);
    s.mean_abs_error = Vector::Zero(n);
    if (!bins[i].empty()) {
      for (const Vector& e : bins[i]) {
        s.mean += e;
        s.mean_abs_error += (e - truth[i]).cwiseAbs();
      }
      s.mean /= static_cast<double>(s.matched);
      s.mean_abs_error /= static_cast<double>(s.matched);
      for (const Vector& e : bins[i]) s.stddev += (e - s.mean).cwiseAbs2();
      s.stddev = (s.stddev / static_cast<double>(s.matched)).cwiseSqrt();
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

RunRecord run_one(const ExperimentFactory& make, const ConfigFactory& configure, std::uint64_t seed) {
  RunRecord r;
  r.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Experiment e = make(seed);
    const TimeSeries ts = e.generate();
    r.true_instants = e.truth.boundaries;
    const IdentificationResult res = identify(ts, configure(e));
    r.S = res.S();
    r.fit_train = res.fit_train;
    r.fit_test = res.fit_test.value_or(res.fit_train);
    r.fit_test_simulated = res.fit_test_simulated.value_or(0.0);
    r.thetas = res.submodels.thetas;
    r.instants = res.raw_instants();
    r.ok = true;
  } catch (const std::exception& ex) {
    r.error = ex.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

MonteCarloSummary run_montecarlo(const ExperimentFactory& make, const ConfigFactory& configure,
                                 std::uint64_t base_seed, int runs, unsigned threads) {
  if (runs < 1) throw Error(Errc::invalid_argument, "need at least one run");
  MonteCarloSummary out;
  out.runs.resize(static_cast<std::size_t>(runs));
  const auto t0 = std::chrono::steady_clock::now();

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < runs; i = next++)
      out.runs[static_cast<std::size_t>(i)] = run_one(make, configure, base_seed + static_cast<std::uint64_t>(i));
  };
  const unsigned n = std::min<unsigned>(worker_count(threads), static_cast<unsigned>(runs));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::vector<double> fits;
  std::vector<std::vector<Vector>> estimates;
  for (const auto& r : out.runs) {
    if (!r.ok) {
      out.failed.push_back(r.seed);
      continue;
    }
    fits.push_back(r.fit_test);
    estimates.push_back(r.thetas);
  }
  if (!fits.empty()) {
    double sum = 0.0;
    for (double f : fits) sum += f;
    out.mean_fit = sum / static_cast<double>(fits.size());
    out.median_fit = median(fits);
  }
  out.thetas = align_thetas(make(base_seed).truth.thetas, estimates);
  return out;
}

}  // namespace switchid
