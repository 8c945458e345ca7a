#include "switchid/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace switchid {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

namespace {

double parse_double(const std::string& field, Index line) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = field.data() + field.size();
  while (begin < end && (*begin == ' ' || *begin == '+')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\r')) --end;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw Error(Errc::io, "line " + std::to_string(line) + ": bad number '" + field + "'");
  return v;
}

// Non-finite values have no JSON spelling; they become null.
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vec(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

Json count(Index v) { return v == kInfinity ? Json(nullptr) : Json(v); }

template <typename T>
Json list(const std::vector<T>& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(x);
  return a;
}

Json doubles(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

Json raw(const std::vector<Index>& boundaries, Index offset) {
  Json a = Json::array();
  for (Index b : boundaries) a.push_back(b + offset);
  return a;
}

}  // namespace

TimeSeries read_series_csv(const std::filesystem::path& path, const SystemOrder& order) {
  order.validate();
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::io, path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "u,y") throw Error(Errc::io, path.string() + ": expected header 'u,y'");
  std::vector<double> u, y;
  Index lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw Error(Errc::io, "line " + std::to_string(lineno) + ": expected two columns");
    u.push_back(parse_double(line.substr(0, comma), lineno));
    y.push_back(parse_double(line.substr(comma + 1), lineno));
  }
  TimeSeries ts;
  ts.order = order;
  ts.u = Eigen::Map<const Vector>(u.data(), static_cast<Index>(u.size()));
  ts.y = Eigen::Map<const Vector>(y.data(), static_cast<Index>(y.size()));
  if (ts.size() <= order.max_lag())
    throw Error(Errc::series_too_short, path.string() + " has too few samples for the order");
  return ts;
}

void write_series_csv(const std::filesystem::path& path, const TimeSeries& ts) {
  std::string out = "u,y\n";
  for (Index k = 0; k < ts.size(); ++k) out += format_double(ts.u(k)) + "," + format_double(ts.y(k)) + "\n";
  write_text(path, out);
}

Json to_json(const TrueSystem& sys, const SystemOrder& order) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["order"] = {{"na", order.na}, {"nb", order.nb}};
  Json thetas = Json::array();
  for (const auto& t : sys.thetas) thetas.push_back(vec(t));
  j["thetas"] = thetas;
  j["instants"] = list(sys.boundaries);
  j["modes"] = list(sys.modes);
  j["sigma"] = sys.noise_sigma;
  j["seed"] = sys.seed;
  return j;
}

TrueSystem true_system_from_json(const Json& j, SystemOrder* order) {
  try {
    TrueSystem sys;
    for (const auto& t : j.at("thetas")) {
      const auto v = t.get<std::vector<double>>();
      sys.thetas.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
    }
    sys.boundaries = j.at("instants").get<std::vector<Index>>();
    sys.modes = j.at("modes").get<std::vector<int>>();
    sys.noise_sigma = j.value("sigma", 0.0);
    sys.seed = j.value("seed", std::uint64_t{0});
    SystemOrder o;
    if (j.contains("order")) {
      o.na = j["order"].at("na").get<int>();
      o.nb = j["order"].at("nb").get<int>();
    } else if (!sys.thetas.empty()) {
      throw Error(Errc::invalid_argument, "ground truth lacks the model order");
    }
    sys.validate(o);
    if (order) *order = o;
    return sys;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io, std::string("ground truth: ") + e.what());
  }
}

Json to_json(const SparsitySummary& s) {
  Json j;
  j["tau"] = num(s.tau);
  j["theta_bound"] = num(s.theta_bound);
  j["mu"] = s.mu ? num(*s.mu) : Json(nullptr);
  j["spark"] = s.spark ? count(*s.spark) : Json(nullptr);
  Json g = Json::object();
  for (const auto& [k, v] : s.genericity) g[std::to_string(k)] = count(v);
  j["genericity"] = g;
  return j;
}

Json to_json(const PeDiagnostics& d) {
  Json j;
  j["verdict"] = d.verdict ? "pass" : "fail";
  j["min_theta_distance"] = num(d.min_theta_distance);
  j["distinct_ok"] = d.distinct_ok;
  j["gram_min_eigenvalue"] = doubles(d.gram_min_eigenvalue);
  j["gram_ok"] = list(std::vector<bool>(d.gram_ok.begin(), d.gram_ok.end()));
  j["witness_ok"] = list(std::vector<bool>(d.witness_ok.begin(), d.witness_ok.end()));
  j["window"] = d.window;
  j["rho1"] = num(d.rho1);
  j["rho2"] = num(d.rho2);
  j["reasons"] = list(d.reasons);
  return j;
}

Json to_json(const InstantResult& r, Index offset) {
  const Segmentation& s = r.segmentation;
  Json j;
  j["segments"] = s.segments();
  j["degenerate"] = r.choice.degenerate;
  j["instants"] = raw(s.boundaries, offset);
  Json betas = Json::array();
  for (const auto& b : s.betas) betas.push_back(vec(b));
  j["betas"] = betas;
  j["costs"] = doubles(s.costs);
  j["total_cost"] = num(s.total_cost);
  Json crit = Json::array();
  for (const auto& row : r.choice.criterion)
    crit.push_back({{"segments", row.segments}, {"total_cost", num(row.total_cost)}, {"log_ratio", num(row.log_ratio)}});
  j["criterion"] = crit;
  return j;
}

Json to_json(const IdentificationResult& r) {
  const IdentifyConfig& c = r.config;
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["order"] = {{"na", r.order.na}, {"nb", r.order.nb}};
  j["samples"] = r.samples;
  j["split"] = r.split;
  j["offset"] = r.offset;
  j["config"] = {{"dwell", c.dwell},
                 {"mmax", c.max_segments},
                 {"fixed_segments", c.fixed_segments},
                 {"segment_all", c.segment_all},
                 {"extractor", to_string(c.extractor)},
                 {"eps0", c.extraction.eps0},
                 {"eps_thres", c.extraction.eps_thres},
                 {"alpha", c.extraction.alpha},
                 {"eta", c.extraction.eta},
                 {"v0", c.extraction.v0},
                 {"max_iters", c.extraction.max_iters},
                 {"weight_floor", c.extraction.weight_floor},
                 {"residual_floor", c.extraction.residual_floor},
                 {"relax_factor", c.extraction.relax_factor},
                 {"merge_tolerance", c.merge_tolerance}};

  Json seg = to_json(r.instants, r.offset);
  seg["selected_by_criterion"] = c.fixed_segments == 0;
  j["segmentation"] = seg;
  j["training_instants"] = raw(r.segmentation.boundaries, r.offset);

  Json sub;
  sub["S"] = r.S();
  Json thetas = Json::array();
  for (const auto& t : r.submodels.thetas) thetas.push_back(vec(t));
  sub["thetas"] = thetas;
  sub["flagged"] = list(std::vector<bool>(r.submodels.flagged.begin(), r.submodels.flagged.end()));
  sub["segment_labels"] = list(r.submodels.segment_labels);
  j["submodels"] = sub;

  Json rounds = Json::array();
  for (const auto& rd : r.rounds) {
    Json o;
    o["remaining"] = rd.remaining;
    o["segments"] = list(rd.segments);
    o["stalled"] = rd.stalled;
    if (rd.stalled) {
      o["reason"] = rd.stall_reason;
    } else {
      o["theta"] = vec(rd.theta);
      o["iterations"] = rd.iterations;
      o["converged"] = rd.converged;
      o["threshold"] = num(rd.threshold);
      o["residual_profile"] = doubles(rd.residual_profile);
      o["support"] = list(rd.support);
    }
    o["sparsity"] = rd.sparsity ? to_json(*rd.sparsity) : Json(nullptr);
    rounds.push_back(o);
  }
  j["rounds"] = rounds;
  j["stalled"] = r.stalled;
  j["diagnostics"] = to_json(r.diagnostics);
  j["fit"] = {{"train", num(r.fit_train)},
              {"test", r.fit_test ? num(*r.fit_test) : Json(nullptr)},
              {"test_simulated", r.fit_test_simulated ? num(*r.fit_test_simulated) : Json(nullptr)}};
  return j;
}

Json to_json(const MonteCarloSummary& s) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["runs"] = s.runs.size();
  j["failed"] = list(s.failed);
  j["mean_fit"] = num(s.mean_fit);
  j["median_fit"] = num(s.median_fit);
  Json thetas = Json::array();
  for (const auto& t : s.thetas)
    thetas.push_back({{"truth", vec(t.truth)},
                      {"matched", t.matched},
                      {"mean", vec(t.mean)},
                      {"std", vec(t.stddev)},
                      {"mean_abs_error", vec(t.mean_abs_error)}});
  j["thetas"] = thetas;
  return j;
}

std::string prediction_csv(const IdentificationResult& r, const TimeSeries& ts) {
  std::string out = "k,part,y,yhat,label\n";
  auto emit = [&](const Prediction& p, Index first, const char* part) {
    for (Index i = 0; i < p.yhat.size(); ++i) {
      const Index k = first + i;
      out += std::to_string(k) + "," + part + "," + format_double(ts.y(k)) + "," +
             format_double(p.yhat(i)) + "," + std::to_string(p.labels[static_cast<std::size_t>(i)]) + "\n";
    }
  };
  emit(r.train, r.offset, "train");
  if (r.test) emit(*r.test, r.split, "test");
  return out;
}

std::string criterion_csv(const SegmentCountChoice& choice) {
  std::string out = "segments,total_cost,log_ratio\n";
  for (const auto& row : choice.criterion)
    out += std::to_string(row.segments) + "," + format_double(row.total_cost) + "," +
           (std::isfinite(row.log_ratio) ? format_double(row.log_ratio) : std::string()) + "\n";
  return out;
}

std::string montecarlo_csv(const MonteCarloSummary& s) {
  std::string out = "seed,ok,S,fit_train,fit_test,fit_test_simulated,seconds\n";
  for (const auto& r : s.runs)
    out += std::to_string(r.seed) + "," + (r.ok ? "1" : "0") + "," + std::to_string(r.S) + "," +
           format_double(r.fit_train) + "," + format_double(r.fit_test) + "," +
           format_double(r.fit_test_simulated) + "," + format_double(r.seconds) + "\n";
  return out;
}

std::string theta_table(const MonteCarloSummary& s) {
  std::string out;
  char cell[64];
  for (std::size_t i = 0; i < s.thetas.size(); ++i) {
    const ThetaStats& t = s.thetas[i];
    out += "theta" + std::to_string(i + 1) + " true ";
    for (Index c = 0; c < t.truth.size(); ++c) {
      std::snprintf(cell, sizeof cell, " %16.3f", t.truth(c));
      out += cell;
    }
    out += "\n       est  ";
    for (Index c = 0; c < t.mean.size(); ++c) {
      std::snprintf(cell, sizeof cell, " %7.3f +- %5.3f", t.mean(c), t.stddev(c));
      out += cell;
    }
    out += "   (" + std::to_string(t.matched) + " matched)\n";
  }
  return out;
}

}  // namespace switchid
