#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace marketnet {

// Coefficient of determination; nullopt when y_true has zero variance.
std::optional<double> r2_score(std::span<const double> y_true, std::span<const double> y_pred);

double mae(std::span<const double> y_true, std::span<const double> y_pred);

struct StockScore {
  std::string ticker;
  std::string model;
  std::optional<double> r2;  // nullopt: excluded (constant truth)
  double mae = 0.0;
};

struct Histogram {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::size_t> counts;  // equal-width bins over [lower, upper]
};

Histogram histogram(std::span<const double> values, std::size_t bins);

struct ModelSummary {
  std::string model;
  std::size_t scored = 0;
  std::size_t excluded = 0;  // stocks without a defined R²
  double median_r2 = 0.0;
  double min_r2 = 0.0;
  double max_r2 = 0.0;
  double median_mae = 0.0;
  double min_mae = 0.0;
  double max_mae = 0.0;
  Histogram r2_histogram;
  Histogram mae_histogram;
  // median_r2 / baseline median R² - 1; nullopt for baselines or when the
  // baseline median is not positive.
  std::optional<double> improvement;
};

struct ForecastSummary {
  std::vector<ModelSummary> models;  // in `model_order`
  std::string baseline_model;        // better-scoring baseline
  double baseline_median_r2 = 0.0;
};

// Per-model medians (mean of the middle pair for even counts), histograms,
// and improvement ratios against the better of `baselines`. Every model in
// model_order must have at least one score with a defined R².
ForecastSummary summarize(std::span<const StockScore> scores, std::span<const std::string> model_order,
                          std::span<const std::string> baselines, std::size_t histogram_bins = 20);

}  // namespace marketnet
