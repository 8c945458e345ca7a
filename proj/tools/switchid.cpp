// switchid: simulate, segment and identify switched ARX systems.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "switchid/io.hpp"
#include "switchid/montecarlo.hpp"
#include "switchid/presets.hpp"

namespace fs = std::filesystem;
using namespace switchid;

namespace {

struct Options {
  std::string preset;
  std::string input;
  std::string truth;
  std::string system;
  std::string thetas;
  std::string out_dir = ".";
  std::string extractor = "l1";
  std::string snr;
  int na = 2;
  int nb = 2;
  Index dwell = 0;
  Index mmax = 0;
  Index segments = 0;
  Index split = 0;
  double eps0 = 0.0;
  double eps_thres = 0.0;
  double alpha = 0.0;
  double eta = 0.0;
  double v0 = 0.0;
  std::uint64_t seed = 1;
  int runs = 100;
  unsigned threads = 0;
};

// Options only count when given on the command line.
struct Given {
  CLI::Option* na = nullptr;
  CLI::Option* nb = nullptr;
  CLI::Option* dwell = nullptr;
  CLI::Option* mmax = nullptr;
  CLI::Option* segments = nullptr;
  CLI::Option* split = nullptr;
  CLI::Option* eps0 = nullptr;
  CLI::Option* eps_thres = nullptr;
  CLI::Option* alpha = nullptr;
  CLI::Option* eta = nullptr;
  CLI::Option* v0 = nullptr;
  CLI::Option* snr = nullptr;
  CLI::Option* extractor = nullptr;
};

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

std::optional<double> snr_value(const Options& o, const Given& g) {
  if (!given(g.snr)) return std::nullopt;
  try {
    return std::stod(o.snr);
  } catch (const std::exception&) {
    throw Error(Errc::invalid_argument, "bad --snr value '" + o.snr + "'");
  }
}

Experiment preset(const Options& o, const Given& g, std::uint64_t seed) {
  auto e = preset_by_name(o.preset, seed, snr_value(o, g));
  if (!e) {
    std::string names;
    for (const auto& n : preset_names()) names += " " + n;
    throw Error(Errc::invalid_argument, "unknown preset '" + o.preset + "'; known:" + names);
  }
  return *e;
}

void apply_overrides(IdentifyConfig& c, const Options& o, const Given& g) {
  if (given(g.dwell)) c.dwell = o.dwell;
  if (given(g.mmax)) c.max_segments = o.mmax;
  if (given(g.segments)) c.fixed_segments = o.segments;
  if (given(g.split)) c.split = o.split;
  if (given(g.extractor)) c.extractor = extractor_from_string(o.extractor);
  if (given(g.eps0)) c.extraction.eps0 = o.eps0;
  if (given(g.eps_thres)) c.extraction.eps_thres = o.eps_thres;
  if (given(g.alpha)) c.extraction.alpha = o.alpha;
  if (given(g.eta)) c.extraction.eta = o.eta;
  if (given(g.v0)) c.extraction.v0 = o.v0;
  c.validate();
}

struct Loaded {
  TimeSeries ts;
  std::optional<TrueSystem> truth;
  IdentifyConfig cfg;
  std::string stem;
};

Loaded load(const Options& o, const Given& g) {
  Loaded l;
  if (!o.preset.empty()) {
    Experiment e = preset(o, g, o.seed);
    l.ts = e.generate();
    l.truth = e.truth;
    l.cfg = e.config();
    l.stem = o.preset;
  } else if (!o.input.empty()) {
    SystemOrder order{o.na, o.nb};
    fs::path sidecar = o.truth;
    if (sidecar.empty()) {
      fs::path guess = fs::path(o.input).replace_extension(".truth.json");
      if (fs::exists(guess)) sidecar = guess;
    }
    if (!sidecar.empty()) {
      SystemOrder from_file;
      l.truth = true_system_from_json(read_json(sidecar), &from_file);
      if (!given(g.na) && !given(g.nb)) order = from_file;
    }
    l.ts = read_series_csv(o.input, order);
    l.stem = fs::path(o.input).stem().string();
  } else {
    throw Error(Errc::invalid_argument, "need --input or --preset");
  }
  apply_overrides(l.cfg, o, g);
  return l;
}

void print_deviations(const std::vector<Index>& truth, const std::vector<Index>& found) {
  std::printf("%4s %8s %11s %10s\n", "m", "true", "identified", "deviation");
  for (std::size_t m = 1; m + 1 < truth.size(); ++m) {
    if (!found.empty() && truth[m] >= found.back()) {
      std::printf("%4zu %8ld %11s %10s\n", m, static_cast<long>(truth[m]), "(test)", "-");
      continue;
    }
    Index best = -1;
    if (found.size() == truth.size()) {
      best = found[m];
    } else {
      for (std::size_t i = 1; i + 1 < found.size(); ++i)
        if (best < 0 || std::abs(found[i] - truth[m]) < std::abs(best - truth[m])) best = found[i];
    }
    if (best < 0)
      std::printf("%4zu %8ld %11s %10s\n", m, static_cast<long>(truth[m]), "-", "-");
    else
      std::printf("%4zu %8ld %11ld %10ld\n", m, static_cast<long>(truth[m]), static_cast<long>(best),
                  static_cast<long>(best - truth[m]));
  }
}

void print_instants(const std::vector<Index>& b) {
  std::printf("instants:");
  for (Index x : b) std::printf(" %ld", static_cast<long>(x));
  std::printf("\n");
}

int cmd_simulate(const Options& o, const Given& g) {
  fs::path out(o.out_dir);
  TrueSystem sys;
  SystemOrder order;
  TimeSeries ts;
  std::string name;
  if (!o.preset.empty()) {
    Experiment e = preset(o, g, o.seed);
    ts = e.generate();
    sys = e.truth;
    order = e.order;
    name = o.preset;
  } else if (!o.system.empty()) {
    sys = true_system_from_json(read_json(o.system), &order);
    sys.seed = o.seed;
    const auto snr = snr_value(o, g);
    ts = snr ? simulate_at_snr(sys, order, {}, sys.length(), *snr) : simulate(sys, order, {}, sys.length());
    name = fs::path(o.system).stem().string();
  } else {
    throw Error(Errc::invalid_argument, "simulate needs --preset or --system");
  }
  write_series_csv(out / (name + ".csv"), ts);
  write_json(out / (name + ".truth.json"), to_json(sys, order));
  std::printf("wrote %s (%ld samples, %ld segments, sigma %s)\n", (out / (name + ".csv")).string().c_str(),
              static_cast<long>(ts.size()), static_cast<long>(sys.segments()),
              format_double(sys.noise_sigma).c_str());
  return 0;
}

int cmd_segment(const Options& o, const Given& g) {
  Loaded l = load(o, g);
  const RegressorMatrix regs = build_regressors(l.ts);
  const InstantResult r = identify_instants(regs, {l.cfg.dwell, l.cfg.max_segments, l.cfg.fixed_segments});
  fs::path out(o.out_dir);
  Json j = to_json(r, regs.offset);
  j = Json{{"schema_version", kSchemaVersion}, {"segmentation", j}};
  write_json(out / (l.stem + ".segmentation.json"), j);
  write_text(out / (l.stem + ".criterion.csv"), criterion_csv(r.choice));
  std::printf("M = %ld%s\n", static_cast<long>(r.segmentation.segments()),
              r.choice.degenerate ? " (degenerate: one linear model fits exactly)" : "");
  std::vector<Index> raw;
  for (Index b : r.segmentation.boundaries) raw.push_back(b + regs.offset);
  print_instants(raw);
  if (l.truth) print_deviations(l.truth->boundaries, raw);
  return 0;
}

int cmd_identify(const Options& o, const Given& g) {
  Loaded l = load(o, g);
  const IdentificationResult r = identify(l.ts, l.cfg);
  fs::path out(o.out_dir);
  const std::string tag = l.stem + "." + to_string(l.cfg.extractor);
  write_json(out / (tag + ".result.json"), to_json(r));
  write_text(out / (tag + ".prediction.csv"), prediction_csv(r, l.ts));
  write_text(out / (tag + ".criterion.csv"), criterion_csv(r.instants.choice));

  std::printf("S = %ld%s\n", static_cast<long>(r.S()), r.stalled ? " (stalled: singleton submodels flagged)" : "");
  for (std::size_t i = 0; i < r.submodels.thetas.size(); ++i) {
    std::printf("theta%zu =", i + 1);
    for (Index c = 0; c < r.submodels.thetas[i].size(); ++c) std::printf(" %.4f", r.submodels.thetas[i](c));
    std::printf("\n");
  }
  std::printf("fit train = %.2f %%", r.fit_train);
  if (r.fit_test) std::printf(", test = %.2f %% (free-run %.2f %%)", *r.fit_test, *r.fit_test_simulated);
  std::printf("\n");
  print_instants(r.raw_instants());
  std::printf("PE diagnostics: %s\n", r.diagnostics.verdict ? "pass" : "fail");
  for (const auto& reason : r.diagnostics.reasons) std::printf("  %s\n", reason.c_str());
  if (l.truth) print_deviations(l.truth->boundaries, r.raw_instants());
  return 0;
}

int cmd_montecarlo(const Options& o, const Given& g) {
  if (o.preset.empty()) throw Error(Errc::invalid_argument, "montecarlo needs --preset");
  if (o.runs < 1) throw Error(Errc::invalid_argument, "--runs must be at least 1");
  auto make = [&](std::uint64_t seed) { return preset(o, g, seed); };
  auto configure = [&](const Experiment& e) {
    IdentifyConfig c = e.config();
    apply_overrides(c, o, g);
    return c;
  };
  const MonteCarloSummary s = run_montecarlo(make, configure, o.seed, o.runs, o.threads);
  fs::path out(o.out_dir);
  const std::string tag = o.preset + "." + (given(g.extractor) ? o.extractor : std::string("l1"));
  write_text(out / (tag + ".montecarlo.csv"), montecarlo_csv(s));
  write_json(out / (tag + ".montecarlo.json"), to_json(s));
  std::printf("%d runs in %.1f s: mean fit %.2f %%, median %.2f %%\n", o.runs, s.seconds, s.mean_fit,
              s.median_fit);
  std::fputs(theta_table(s).c_str(), stdout);
  if (!s.failed.empty()) {
    std::printf("failed seeds:");
    for (auto seed : s.failed) std::printf(" %lu", static_cast<unsigned long>(seed));
    std::printf("\n");
    for (const auto& r : s.runs)
      if (!r.ok) std::printf("  seed %lu: %s\n", static_cast<unsigned long>(r.seed), r.error.c_str());
  }
  return 10 * s.failed.size() > static_cast<std::size_t>(o.runs) ? 3 : 0;
}

std::vector<Vector> read_thetas(const fs::path& path) {
  const Json j = read_json(path);
  const Json* list = &j;
  if (j.is_object() && j.contains("submodels")) list = &j["submodels"]["thetas"];
  else if (j.is_object() && j.contains("thetas")) list = &j["thetas"];
  std::vector<Vector> out;
  try {
    for (const auto& t : *list) {
      const auto v = t.get<std::vector<double>>();
      out.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io, path.string() + ": " + e.what());
  }
  return out;
}

int cmd_metrics(const Options& o, const Given& g) {
  Loaded l = load(o, g);
  const RegressorMatrix regs = build_regressors(l.ts);
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["samples"] = l.ts.size();
  j["sparsity"] = to_json(summarize(regs));
  std::printf("tau = %.6f, theta bound = %.4f\n", summarize(regs, {0, false}).tau,
              summarize(regs, {0, false}).theta_bound);

  std::vector<Vector> thetas;
  if (!o.thetas.empty()) thetas = read_thetas(o.thetas);
  else if (!o.preset.empty() && l.truth) thetas = l.truth->thetas;
  if (!thetas.empty()) {
    const double eps = l.cfg.extraction.eps_thres;
    const Matrix ov = kernel_overlap(thetas, regs, eps);
    Json pairs = Json::array();
    for (Index a = 0; a < ov.rows(); ++a)
      for (Index b = a + 1; b < ov.cols(); ++b) {
        pairs.push_back({{"i", a + 1}, {"j", b + 1}, {"fraction", ov(a, b)}});
        std::printf("|I(theta%ld) & I(theta%ld)|/N = %.1f%%\n", static_cast<long>(a + 1),
                    static_cast<long>(b + 1), 100.0 * ov(a, b));
      }
    j["overlap"] = {{"eps", eps}, {"pairs", pairs}};

    // Labels for the diagnostics come from the dwell-constrained assignment.
    IdentificationResult r;
    r.submodels.thetas = thetas;
    const Prediction p = predict_dp_assign(thetas, regs, l.cfg.dwell);
    std::vector<Index> b{0};
    for (Index k = 1; k < regs.cols(); ++k)
      if (p.labels[static_cast<std::size_t>(k)] != p.labels[static_cast<std::size_t>(k - 1)]) b.push_back(k);
    b.push_back(regs.cols());
    for (std::size_t m = 0; m + 1 < b.size(); ++m) r.submodels.segment_labels.push_back(p.labels[static_cast<std::size_t>(b[m])]);
    r.segmentation = segmentation_from_boundaries(regs, b);
    const PeDiagnostics d = pe_diagnostics(r, regs, l.cfg.dwell);
    j["pe"] = to_json(d);
    std::printf("PE diagnostics: %s\n", d.verdict ? "pass" : "fail");
  }
  write_json(fs::path(o.out_dir) / (l.stem + ".metrics.json"), j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identification of switched ARX systems"};
  app.require_subcommand(1);
  Options o;

  auto data_options = [&](CLI::App* c, Given& g) {
    c->add_option("--preset", o.preset, "paper-periodic, paper-random or paper-random-drawn");
    c->add_option("--input", o.input, "CSV with header u,y");
    c->add_option("--truth", o.truth, "ground-truth JSON (default: <input>.truth.json when present)");
    c->add_option("--seed", o.seed, "seed of the simulated data");
    g.snr = c->add_option("--snr", o.snr, "signal-to-noise ratio in dB, or inf");
    g.na = c->add_option("--order-na", o.na, "output lags")->check(CLI::NonNegativeNumber);
    g.nb = c->add_option("--order-nb", o.nb, "input lags")->check(CLI::NonNegativeNumber);
    c->add_option("--out-dir", o.out_dir, "directory for output files");
  };
  auto segment_options = [&](CLI::App* c, Given& g) {
    g.dwell = c->add_option("--dwell", o.dwell, "minimum segment length")->check(CLI::PositiveNumber);
    g.mmax = c->add_option("--mmax", o.mmax, "largest segment count tried")->check(CLI::PositiveNumber);
    g.segments = c->add_option("--segments", o.segments, "known segment count (skips the selection)");
  };
  auto model_options = [&](CLI::App* c, Given& g) {
    segment_options(c, g);
    g.split = c->add_option("--split", o.split, "first sample of the test part");
    g.extractor = c->add_option("--extractor", o.extractor, "l1 (reweighted) or l0 (block OMP)")
                      ->check(CLI::IsMember({"l0", "l1"}));
    g.eps0 = c->add_option("--eps0", o.eps0, "convergence tolerance");
    g.eps_thres = c->add_option("--eps-thres", o.eps_thres, "assignment threshold");
    g.alpha = c->add_option("--alpha", o.alpha, "momentum decay");
    g.eta = c->add_option("--eta", o.eta, "momentum step");
    g.v0 = c->add_option("--v0", o.v0, "initial momentum");
  };

  Given g_sim, g_seg, g_id, g_mc, g_met;
  auto* sim = app.add_subcommand("simulate", "write a simulated series and its ground truth");
  sim->add_option("--preset", o.preset, "paper-periodic, paper-random or paper-random-drawn");
  sim->add_option("--system", o.system, "ground-truth JSON to simulate");
  sim->add_option("--seed", o.seed, "seed");
  g_sim.snr = sim->add_option("--snr", o.snr, "signal-to-noise ratio in dB, or inf");
  sim->add_option("--out-dir", o.out_dir, "directory for output files");

  auto* seg = app.add_subcommand("segment", "detect switching instants only");
  data_options(seg, g_seg);
  segment_options(seg, g_seg);

  auto* id = app.add_subcommand("identify", "segment, extract submodels and score");
  data_options(id, g_id);
  model_options(id, g_id);

  auto* mc = app.add_subcommand("montecarlo", "repeat identify over seeded replications");
  data_options(mc, g_mc);
  model_options(mc, g_mc);
  mc->add_option("--runs", o.runs, "number of replications");
  mc->add_option("--threads", o.threads, "worker count (SWITCHID_THREADS overrides)");

  auto* met = app.add_subcommand("metrics", "sparsity certificates, kernel overlaps and PE diagnostics");
  data_options(met, g_met);
  g_met.dwell = met->add_option("--dwell", o.dwell, "minimum segment length")->check(CLI::PositiveNumber);
  g_met.eps_thres = met->add_option("--eps-thres", o.eps_thres, "overlap threshold");
  met->add_option("--thetas", o.thetas, "JSON with thetas (a result file, ground truth or a plain array)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(o, g_sim);
    if (*seg) return cmd_segment(o, g_seg);
    if (*id) return cmd_identify(o, g_id);
    if (*mc) return cmd_montecarlo(o, g_mc);
    if (*met) return cmd_metrics(o, g_met);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
