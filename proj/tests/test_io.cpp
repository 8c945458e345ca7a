#include <doctest.h>

#include <cmath>
#include <filesystem>

#include <switchid/io.hpp>
#include <switchid/presets.hpp>

using namespace switchid;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path p = fs::temp_directory_path() / "switchid-test-io";
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("doubles print in shortest round-trip form") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e22, 123456.789, 0.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("series CSV round trip") {
  Experiment e = paper_periodic(1, 30.0);
  const TimeSeries ts = e.generate();
  const fs::path p = scratch_dir() / "series.csv";
  write_series_csv(p, ts);
  const TimeSeries back = read_series_csv(p, e.order);
  CHECK(back.u == ts.u);
  CHECK(back.y == ts.y);
  CHECK(read_text(p).rfind("u,y\n", 0) == 0);
}

TEST_CASE("malformed CSV is an io error") {
  const fs::path p = scratch_dir() / "bad.csv";
  write_text(p, "u,y\n1,2\n3,abc\n");
  try {
    read_series_csv(p, {1, 1});
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io);
  }
  CHECK_THROWS_AS(read_series_csv(scratch_dir() / "missing.csv", {1, 1}), Error);
}

TEST_CASE("true system JSON round trip") {
  Experiment e = paper_random(3, 10.0);
  e.generate();
  const Json j = to_json(e.truth, e.order);
  CHECK(j["schema_version"] == kSchemaVersion);
  SystemOrder order;
  const TrueSystem back = true_system_from_json(Json::parse(j.dump()), &order);
  CHECK(order.na == 2);
  CHECK(order.nb == 2);
  CHECK(back.boundaries == e.truth.boundaries);
  CHECK(back.modes == e.truth.modes);
  CHECK(back.noise_sigma == e.truth.noise_sigma);
  CHECK(back.seed == e.truth.seed);
  for (std::size_t i = 0; i < back.thetas.size(); ++i) CHECK(back.thetas[i] == e.truth.thetas[i]);
  CHECK(to_json(back, order).dump() == j.dump());
}

TEST_CASE("result JSON re-serialises byte for byte") {
  for (auto ex : {Extractor::l1, Extractor::l0}) {
    Experiment e = paper_periodic(2, 30.0);
    IdentifyConfig cfg = e.config();
    cfg.extractor = ex;
    const IdentificationResult r = identify(e.generate(), cfg);
    const fs::path p = scratch_dir() / "result.json";
    write_json(p, to_json(r));
    const std::string first = read_text(p);
    write_json(p, read_json(p));
    CHECK(read_text(p) == first);
    const Json j = read_json(p);
    CHECK(j["schema_version"] == kSchemaVersion);
    CHECK(j["submodels"]["thetas"].size() == static_cast<std::size_t>(r.S()));
  }
}

TEST_CASE("non-finite values serialise as null") {
  PeDiagnostics d;
  d.min_theta_distance = std::numeric_limits<double>::infinity();
  const Json j = to_json(d);
  CHECK(j["min_theta_distance"].is_null());
  CHECK(Json::parse(j.dump()).dump() == j.dump());
}

TEST_CASE("prediction CSV covers train and test") {
  Experiment e = paper_periodic(3, 30.0);
  const TimeSeries ts = e.generate();
  const IdentificationResult r = identify(ts, e.config());
  const std::string csv = prediction_csv(r, ts);
  CHECK(csv.rfind("k,part,y,yhat,label\n", 0) == 0);
  const auto rows = std::count(csv.begin(), csv.end(), '\n') - 1;
  CHECK(rows == ts.size() - r.offset);
  CHECK(csv.find(",test,") != std::string::npos);
}

TEST_CASE("criterion CSV has one row per segment count") {
  Experiment e = paper_periodic(4, 30.0);
  const IdentificationResult r = identify(e.generate(), e.config());
  const std::string csv = criterion_csv(r.instants.choice);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(r.instants.choice.criterion.size()));
}
