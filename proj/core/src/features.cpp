#include "marketnet/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "marketnet/error.hpp"
#include "marketnet/rng.hpp"
#include "marketnet/stats.hpp"

namespace marketnet {

const std::array<std::string_view, kStockVariableCount>& FeatureSeries::stock_keys() {
  static const std::array<std::string_view, kStockVariableCount> keys = {
      "log_return", "degree_centrality", "closeness", "betweenness", "eigenvector", "clustering"};
  return keys;
}

const std::array<std::string_view, kStockVariableCount>& FeatureSeries::stock_display_names() {
  static const std::array<std::string_view, kStockVariableCount> names = {
      "Log Return",  "Degree Centrality",      "Closeness Centrality",
      "Betweenness Centrality", "Eigenvector Centrality", "Clustering"};
  return names;
}

void FeatureSeries::validate() const {
  const auto windows = static_cast<Eigen::Index>(window_count());
  const auto stocks = static_cast<Eigen::Index>(stock_count());
  for (const auto& m : stock) {
    if (m.rows() != windows || m.cols() != stocks) {
      throw InputError("feature series: per-stock matrices must be windows x stocks");
    }
  }
}

std::vector<std::string> forecast_variable_names() {
  std::vector<std::string> names;
  for (auto name : FeatureSeries::stock_display_names()) names.emplace_back(name);
  for (auto name : GlobalFeatures::display_names()) names.emplace_back(name);
  return names;
}

std::vector<double> rolling_mean(std::span<const double> series, std::size_t window) {
  if (window < 1) throw InputError("rolling mean window must be at least 1");
  if (window > series.size()) {
    throw InputError("rolling mean window " + std::to_string(window) + " exceeds series length " +
                     std::to_string(series.size()));
  }
  std::vector<double> out(series.size() - window + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < window; ++i) sum += series[k + i];
    out[k] = sum / static_cast<double>(window);
  }
  return out;
}

std::size_t choose_window(std::size_t n_obs) {
  if (n_obs < 10) throw InputError("choose_window needs at least 10 observations");
  return std::max<std::size_t>(1, n_obs / 10);
}

std::vector<std::size_t> ForecastDataset::rows_with(SplitTag tag) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < rows(); ++r) {
    if (stock_split.at(row_stock[r]) == tag) out.push_back(r);
  }
  return out;
}

std::vector<std::size_t> ForecastDataset::rows_of_stock(std::size_t stock) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < rows(); ++r) {
    if (row_stock[r] == stock) out.push_back(r);
  }
  return out;
}

std::size_t ForecastDataset::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].name == name) return c;
  }
  throw InputError("dataset has no column '" + name + "'");
}

ForecastDataset ForecastDataset::with_columns(std::span<const std::size_t> keep) const {
  ForecastDataset out = *this;
  out.X.resize(X.rows(), static_cast<Eigen::Index>(keep.size()));
  out.columns.clear();
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.X.col(static_cast<Eigen::Index>(k)) = X.col(static_cast<Eigen::Index>(keep[k]));
    out.columns.push_back(columns.at(keep[k]));
  }
  return out;
}

ForecastDataset make_lagged(const FeatureSeries& fs, std::size_t smoothing_window, std::size_t nlag,
                            std::span<const std::string> variables) {
  fs.validate();
  if (nlag < 1) throw InputError("nlag must be at least 1");
  if (smoothing_window < 1) throw InputError("smoothing window must be at least 1");
  const std::size_t windows = fs.window_count();
  if (windows < smoothing_window - 1 + nlag + 2) {
    throw InputError("make_lagged: window_count - (W - 1) - nlag must be at least 2 (windows=" +
                     std::to_string(windows) + ", W=" + std::to_string(smoothing_window) +
                     ", nlag=" + std::to_string(nlag) + ")");
  }

  const std::vector<std::string> all_names = forecast_variable_names();
  std::vector<std::size_t> chosen;
  if (variables.empty()) {
    chosen.resize(all_names.size());
    std::iota(chosen.begin(), chosen.end(), 0);
  } else {
    for (const std::string& name : variables) {
      auto it = std::find(all_names.begin(), all_names.end(), name);
      if (it == all_names.end()) throw InputError("unknown forecast variable '" + name + "'");
      chosen.push_back(static_cast<std::size_t>(it - all_names.begin()));
    }
  }

  // Smoothed global series, shared by all stocks.
  std::vector<std::vector<double>> global_smoothed(GlobalFeatures::kNetworkVariables);
  for (std::size_t v = 0; v < GlobalFeatures::kNetworkVariables; ++v) {
    std::vector<double> raw(windows);
    for (std::size_t w = 0; w < windows; ++w) raw[w] = fs.global[w].network_values()[v];
    global_smoothed[v] = rolling_mean(raw, smoothing_window);
  }

  ForecastDataset ds;
  ds.tickers = fs.tickers;
  ds.smoothing_window = smoothing_window;
  ds.nlag = nlag;
  ds.stock_split.assign(fs.stock_count(), SplitTag::kUnassigned);
  for (std::size_t v = 0; v < chosen.size(); ++v) {
    ds.variables.push_back(all_names[chosen[v]]);
    for (std::size_t k = 1; k <= nlag; ++k) {
      ds.columns.push_back({all_names[chosen[v]] + "_" + std::to_string(k), v, k});
    }
  }

  const std::size_t smoothed_len = windows - smoothing_window + 1;
  const std::size_t per_stock = smoothed_len - nlag;
  const std::size_t total_rows = per_stock * fs.stock_count();
  ds.X.resize(static_cast<Eigen::Index>(total_rows), static_cast<Eigen::Index>(ds.columns.size()));
  ds.y.resize(static_cast<Eigen::Index>(total_rows));
  ds.row_stock.resize(total_rows);
  ds.row_time.resize(total_rows);

  std::vector<std::vector<double>> smoothed(chosen.size());
  for (std::size_t s = 0; s < fs.stock_count(); ++s) {
    auto stock_series = [&](std::size_t variable) {
      const Eigen::VectorXd column = fs.stock[variable].col(static_cast<Eigen::Index>(s));
      return rolling_mean(std::span<const double>(column.data(), windows), smoothing_window);
    };
    for (std::size_t v = 0; v < chosen.size(); ++v) {
      smoothed[v] = chosen[v] < kStockVariableCount ? stock_series(chosen[v])
                                                    : global_smoothed[chosen[v] - kStockVariableCount];
    }
    const std::vector<double> target = stock_series(static_cast<std::size_t>(StockVariable::kLogReturn));
    for (std::size_t k = 0; k < per_stock; ++k) {
      const std::size_t t = k + nlag;  // index into the smoothed series
      const auto row = static_cast<Eigen::Index>(s * per_stock + k);
      ds.y[row] = target[t];
      ds.row_stock[static_cast<std::size_t>(row)] = s;
      ds.row_time[static_cast<std::size_t>(row)] = t + smoothing_window - 1;
      for (std::size_t c = 0; c < ds.columns.size(); ++c) {
        ds.X(row, static_cast<Eigen::Index>(c)) = smoothed[ds.columns[c].variable][t - ds.columns[c].lag];
      }
    }
  }
  return ds;
}

StockSplit split_stocks(std::size_t stock_count, double test_fraction, std::uint64_t seed) {
  if (stock_count < 2) throw InputError("split_stocks needs at least two stocks");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InputError("test fraction must lie in (0, 1)");
  std::size_t test_count = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(stock_count)));
  test_count = std::clamp<std::size_t>(test_count, 1, stock_count - 1);

  std::vector<std::size_t> order(stock_count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  StockSplit split;
  split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_count));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(test_count), order.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

void assign_split(ForecastDataset& ds, const StockSplit& split) {
  ds.stock_split.assign(ds.tickers.size(), SplitTag::kUnassigned);
  for (std::size_t s : split.train) ds.stock_split.at(s) = SplitTag::kTrain;
  for (std::size_t s : split.test) {
    if (ds.stock_split.at(s) == SplitTag::kTrain) throw InputError("stock assigned to both train and test");
    ds.stock_split.at(s) = SplitTag::kTest;
  }
  if (std::count(ds.stock_split.begin(), ds.stock_split.end(), SplitTag::kUnassigned) != 0) {
    throw InputError("split does not cover every stock");
  }
}

FeatureSelection select_features(const ForecastDataset& ds, double percentile) {
  const std::vector<std::size_t> train = ds.rows_with(SplitTag::kTrain);
  if (train.size() < 2) throw InputError("feature selection needs training rows");
  if (ds.columns.empty()) throw InputError("feature selection needs at least one column");

  std::vector<double> target(train.size());
  for (std::size_t r = 0; r < train.size(); ++r) target[r] = ds.y[static_cast<Eigen::Index>(train[r])];

  std::vector<double> scores(ds.columns.size());
  std::vector<double> column(train.size());
  for (std::size_t c = 0; c < ds.columns.size(); ++c) {
    for (std::size_t r = 0; r < train.size(); ++r) {
      column[r] = ds.X(static_cast<Eigen::Index>(train[r]), static_cast<Eigen::Index>(c));
    }
    scores[c] = std::abs(stats::pearson(column, target));
  }

  FeatureSelection out;
  out.threshold = stats::percentile(scores, percentile);
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    if (scores[c] > out.threshold) keep.push_back(c);
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t c = order[k];
    out.ranking.push_back({k + 1, ds.columns[c].name, scores[c], scores[c] > out.threshold});
  }
  out.dataset = ds.with_columns(keep);
  return out;
}

}  // namespace marketnet
