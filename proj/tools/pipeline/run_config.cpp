#include "run_config.hpp"

#include "marketnet/error.hpp"

#ifndef MARKETNET_VERSION
#define MARKETNET_VERSION "0.0.0"
#endif

namespace marketnet::cli {

std::size_t RunConfig::resolved_nlag() const { return nlag.value_or(mode == Mode::kLong ? 5 : 12); }

std::size_t RunConfig::resolved_max_lag() const { return max_lag.value_or(mode == Mode::kLong ? 5 : 12); }

std::string to_string(Mode mode) { return mode == Mode::kLong ? "long" : "short"; }

Mode parse_mode(const std::string& text) {
  if (text == "long") return Mode::kLong;
  if (text == "short") return Mode::kShort;
  throw InputError("mode must be 'long' or 'short', got '" + text + "'");
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  using nlohmann::ordered_json;
  auto optional = [](const auto& v) -> ordered_json { return v ? ordered_json(*v) : ordered_json(nullptr); };
  ordered_json j;
  j["prices"] = c.prices.generic_string();
  j["sectors"] = c.sectors ? ordered_json(c.sectors->generic_string()) : ordered_json(nullptr);
  j["features"] = c.features ? ordered_json(c.features->generic_string()) : ordered_json(nullptr);
  j["out"] = c.out.generic_string();
  j["mode"] = to_string(c.mode);
  j["window_len"] = optional(c.window_len);
  j["calendar_years"] = c.calendar_years;
  j["rho"] = c.rho ? ordered_json(*c.rho) : ordered_json("auto");
  j["resilience_f"] = c.resilience_f;
  j["split_seed"] = c.split_seed;
  j["model_seed"] = c.model_seed;
  j["louvain_seed"] = c.model_seed;
  j["smooth_w"] = optional(c.smooth_w);
  j["nlag"] = c.resolved_nlag();
  j["max_lag"] = c.resolved_max_lag();
  j["test_frac"] = c.test_frac;
  j["validation_frac"] = c.validation_frac;
  j["selection_percentile"] = c.selection_percentile;
  j["forest"] = {{"n_trees", c.forest.n_trees},
                 {"min_samples_leaf", c.forest.min_samples_leaf},
                 {"max_features", c.forest.max_features == 0 ? ordered_json("ceil(sqrt(d))")
                                                             : ordered_json(c.forest.max_features)},
                 {"max_depth", c.forest.max_depth == 0 ? ordered_json(nullptr) : ordered_json(c.forest.max_depth)}};
  j["boosting"] = {{"n_stages", c.boosting.n_stages},
                   {"learning_rate", c.boosting.learning_rate},
                   {"max_depth", c.boosting.max_depth},
                   {"min_samples_leaf", c.boosting.min_samples_leaf}};
  return j;
}

const char* tool_version() { return MARKETNET_VERSION; }

}  // namespace marketnet::cli
