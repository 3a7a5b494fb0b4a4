#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "marketnet/models.hpp"

namespace marketnet::cli {

enum class Mode { kLong, kShort };

// Every knob of a pipeline run. Unset optionals resolve to mode defaults:
// long = 30 equal windows, Nlag 5, max lag 5; short = 14-row windows,
// Nlag 12, max lag 12.
struct RunConfig {
  std::filesystem::path prices;
  std::optional<std::filesystem::path> sectors;
  std::optional<std::filesystem::path> features;  // existing features.csv
  std::filesystem::path out = "marketnet_out";
  Mode mode = Mode::kLong;
  std::optional<std::size_t> window_len;
  bool calendar_years = false;
  std::optional<double> rho;  // nullopt = auto selection
  double resilience_f = 0.1;
  std::uint64_t split_seed = 0;
  std::uint64_t model_seed = 42;
  std::optional<std::size_t> smooth_w;
  std::optional<std::size_t> nlag;
  std::optional<std::size_t> max_lag;
  double test_frac = 0.15;
  double validation_frac = 0.2;
  double selection_percentile = 65.0;
  bool export_graphs = false;
  std::optional<std::size_t> export_window;
  ForestParams forest;
  BoostingParams boosting;

  std::size_t resolved_nlag() const;
  std::size_t resolved_max_lag() const;
};

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

// Effective configuration; embedded verbatim in every artifact.
nlohmann::ordered_json to_json(const RunConfig& config);

// Version string of the tool.
const char* tool_version();

}  // namespace marketnet::cli
