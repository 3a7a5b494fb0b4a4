#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "marketnet/marketnet.hpp"
#include "run_config.hpp"

namespace marketnet::cli {

struct WindowInfo {
  std::size_t index = 0;
  std::string start;
  std::string end;
  std::size_t rows = 0;
  double rho = 0.0;
  bool rho_fallback = false;
  StockGraph graph;
  NetworkSnapshot snapshot;
};

struct NetworkRun {
  std::vector<std::string> tickers;
  std::vector<std::string> sectors;  // per ticker
  std::vector<std::string> dropped;
  std::size_t discarded_rows = 0;
  std::size_t window_len = 0;  // 0 for calendar-year windows
  std::vector<WindowInfo> windows;
  FeatureSeries series;
};

// ingest -> returns -> graph -> metrics for every window of a cleaned panel.
NetworkRun run_network(const CleanResult& cleaned, const RunConfig& config);
NetworkRun run_network(const RunConfig& config);

struct GrangerRun {
  std::size_t max_lag = 0;
  std::size_t n_obs = 0;
  std::vector<GrangerResult> results;
};

// Every network variable against the market log-return.
GrangerRun run_granger(const std::vector<GlobalFeatures>& global, const RunConfig& config);

struct ModelInfo {
  std::string name;
  EnsembleModel model;
  std::optional<double> validation_r2;
};

struct ForecastRun {
  std::size_t smoothing_window = 0;
  std::size_t nlag = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::size_t fit_rows = 0;         // training rows used before the validation slice
  std::size_t validation_rows = 0;
  StockSplit split;
  std::vector<std::string> tickers;
  std::vector<RankedFeature> ranking;
  double selection_threshold = 0.0;
  std::vector<std::string> selected;
  std::vector<ModelInfo> models;  // RFR, LRbase, GBR, wA, RFRbase
  AverageWeights wa_weights;
  std::vector<StockScore> scores;
  ForecastSummary summary;
};

inline const std::vector<std::string>& model_order() {
  static const std::vector<std::string> order{"RFR", "LRbase", "GBR", "wA", "RFRbase"};
  return order;
}

// Smooth, lag, split, select, fit the five models and score the test stocks.
ForecastRun run_forecast(const FeatureSeries& series, const RunConfig& config);

// Artifact serialization. Every artifact embeds the config and tool version.
using Artifacts = std::map<std::string, std::string>;  // relative path -> contents

std::string csv_preamble(const RunConfig& config);
Artifacts network_artifacts(const NetworkRun& run, const RunConfig& config);
nlohmann::ordered_json graph_json(const NetworkRun& run, std::size_t window, const RunConfig& config);
Artifacts granger_artifacts(const GrangerRun& run, const RunConfig& config);
Artifacts forecast_artifacts(const ForecastRun& run, const RunConfig& config);

// Writes every artifact to a temporary sibling first and renames them into
// place once all writes succeeded.
void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts);

// Rebuilds the feature series from features.csv and node_metrics.csv.
FeatureSeries read_feature_series(const std::filesystem::path& features_csv,
                                  const std::filesystem::path& node_metrics_csv);

// %.17g formatting; round-trips through strtod.
std::string format_double(double value);

}  // namespace marketnet::cli
