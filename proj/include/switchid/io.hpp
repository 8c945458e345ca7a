#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "switchid/montecarlo.hpp"
#include "switchid/pipeline.hpp"

namespace switchid {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Two columns `u,y` under a one-line header.
TimeSeries read_series_csv(const std::filesystem::path& path, const SystemOrder& order);
void write_series_csv(const std::filesystem::path& path, const TimeSeries& ts);

/// Ground-truth descriptor. `instants` are the raw segment boundaries,
/// 0 first and N last.
Json to_json(const TrueSystem& sys, const SystemOrder& order);
TrueSystem true_system_from_json(const Json& j, SystemOrder* order = nullptr);

Json to_json(const SparsitySummary& s);
Json to_json(const PeDiagnostics& d);
/// Instants in raw time (column index plus `offset`), betas, costs and the
/// segment-count criterion.
Json to_json(const InstantResult& r, Index offset);
Json to_json(const IdentificationResult& r);
Json to_json(const MonteCarloSummary& s);

/// Per-sample rows k,part,y,yhat,label over the training and test parts.
std::string prediction_csv(const IdentificationResult& r, const TimeSeries& ts);
/// Rows segments,total_cost,log_ratio.
std::string criterion_csv(const SegmentCountChoice& choice);
/// Rows seed,ok,S,fit_train,fit_test,fit_test_simulated,seconds.
std::string montecarlo_csv(const MonteCarloSummary& s);
/// Per true theta: mean and deviation of each coordinate.
std::string theta_table(const MonteCarloSummary& s);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

}  // namespace switchid
