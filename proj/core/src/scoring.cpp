#include "marketnet/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "marketnet/error.hpp"
#include "marketnet/stats.hpp"

namespace marketnet {

std::optional<double> r2_score(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty()) throw InputError("r2_score: lengths must match and be non-zero");
  const double mean = stats::mean(y_true);
  double residual = 0.0, total = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    residual += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    total += (y_true[i] - mean) * (y_true[i] - mean);
  }
  const auto [lo, hi] = std::minmax_element(y_true.begin(), y_true.end());
  if (*lo == *hi || total <= 0.0) return std::nullopt;
  return 1.0 - residual / total;
}

double mae(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty()) throw InputError("mae: lengths must match and be non-zero");
  double sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) sum += std::abs(y_true[i] - y_pred[i]);
  return sum / static_cast<double>(y_true.size());
}

Histogram histogram(std::span<const double> values, std::size_t bins) {
  Histogram h;
  if (bins == 0) throw InputError("histogram needs at least one bin");
  h.counts.assign(bins, 0);
  if (values.empty()) return h;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  h.lower = *lo;
  h.upper = *hi;
  const double width = (h.upper - h.lower) / static_cast<double>(bins);
  for (double v : values) {
    std::size_t b = width > 0.0 ? static_cast<std::size_t>((v - h.lower) / width) : 0;
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

ForecastSummary summarize(std::span<const StockScore> scores, std::span<const std::string> model_order,
                          std::span<const std::string> baselines, std::size_t histogram_bins) {
  std::map<std::string, std::vector<double>> r2_by_model;
  std::map<std::string, std::vector<double>> mae_by_model;
  std::map<std::string, std::size_t> excluded;
  for (const StockScore& s : scores) {
    if (s.r2) {
      r2_by_model[s.model].push_back(*s.r2);
    } else {
      ++excluded[s.model];
    }
    mae_by_model[s.model].push_back(s.mae);
  }

  ForecastSummary summary;
  for (const std::string& model : model_order) {
    const auto& r2 = r2_by_model[model];
    const auto& errors = mae_by_model[model];
    if (r2.empty()) throw InputError("summarize: model '" + model + "' has no scored stock");
    ModelSummary m;
    m.model = model;
    m.scored = r2.size();
    m.excluded = excluded[model];
    m.median_r2 = stats::median(r2);
    m.min_r2 = *std::min_element(r2.begin(), r2.end());
    m.max_r2 = *std::max_element(r2.begin(), r2.end());
    m.median_mae = stats::median(errors);
    m.min_mae = *std::min_element(errors.begin(), errors.end());
    m.max_mae = *std::max_element(errors.begin(), errors.end());
    m.r2_histogram = histogram(r2, histogram_bins);
    m.mae_histogram = histogram(errors, histogram_bins);
    summary.models.push_back(std::move(m));
  }

  bool have_baseline = false;
  for (const ModelSummary& m : summary.models) {
    if (std::find(baselines.begin(), baselines.end(), m.model) == baselines.end()) continue;
    if (!have_baseline || m.median_r2 > summary.baseline_median_r2) {
      summary.baseline_model = m.model;
      summary.baseline_median_r2 = m.median_r2;
      have_baseline = true;
    }
  }
  if (have_baseline && summary.baseline_median_r2 > 0.0) {
    for (ModelSummary& m : summary.models) {
      if (std::find(baselines.begin(), baselines.end(), m.model) != baselines.end()) continue;
      m.improvement = m.median_r2 / summary.baseline_median_r2 - 1.0;
    }
  }
  return summary;
}

}  // namespace marketnet
