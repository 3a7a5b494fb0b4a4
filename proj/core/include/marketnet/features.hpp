#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "marketnet/metrics.hpp"

namespace marketnet {

// Per-stock variables in dataset column order.
enum class StockVariable : std::size_t {
  kLogReturn = 0,
  kDegreeCentrality,
  kCloseness,
  kBetweenness,
  kEigenvector,
  kClustering,
};
inline constexpr std::size_t kStockVariableCount = 6;

// Time-aligned per-window panel: per-stock values plus shared global features.
struct FeatureSeries {
  std::vector<std::string> tickers;
  // One [windows x stocks] matrix per StockVariable.
  std::array<Eigen::MatrixXd, kStockVariableCount> stock;
  std::vector<GlobalFeatures> global;

  std::size_t window_count() const { return global.size(); }
  std::size_t stock_count() const { return tickers.size(); }
  const Eigen::MatrixXd& values(StockVariable v) const { return stock[static_cast<std::size_t>(v)]; }
  Eigen::MatrixXd& values(StockVariable v) { return stock[static_cast<std::size_t>(v)]; }

  static const std::array<std::string_view, kStockVariableCount>& stock_keys();
  static const std::array<std::string_view, kStockVariableCount>& stock_display_names();

  // Throws InputError when matrix shapes disagree with tickers/windows.
  void validate() const;
};

// Trailing mean over W samples; output[k] covers input[k .. k + W - 1], so
// the result has len - W + 1 entries.
std::vector<double> rolling_mean(std::span<const double> series, std::size_t window);

// W = max(1, floor(0.1 * n_obs)). Requires n_obs >= 10.
std::size_t choose_window(std::size_t n_obs);

struct ForecastColumn {
  std::string name;         // e.g. "Log Return_1"
  std::size_t variable = 0; // index into the dataset's variable list
  std::size_t lag = 0;
};

enum class SplitTag { kUnassigned, kTrain, kTest };

struct ForecastDataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;                 // smoothed log return at the row's time
  std::vector<ForecastColumn> columns;
  std::vector<std::string> variables;  // display names, in column-block order
  std::vector<std::string> tickers;
  std::vector<std::size_t> row_stock;  // stock index per row
  std::vector<std::size_t> row_time;   // window index of the target
  std::vector<SplitTag> stock_split;   // per stock
  std::size_t smoothing_window = 1;
  std::size_t nlag = 1;
  std::uint64_t split_seed = 0;

  std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
  std::vector<std::size_t> rows_with(SplitTag tag) const;
  std::vector<std::size_t> rows_of_stock(std::size_t stock) const;
  // Column index by name; throws InputError when absent.
  std::size_t column(const std::string& name) const;
  // Dataset restricted to the given column indices (order preserved).
  ForecastDataset with_columns(std::span<const std::size_t> keep) const;
};

// Smooths every variable (target included) with rolling_mean(W), builds
// `<name>_k` columns for k = 1..nlag and pools the stocks in ticker order.
// Each stock contributes window_count - (W - 1) - nlag rows; at least two
// are required. `variables` restricts the lagged columns to the named
// variables (display names); empty means all fifteen.
ForecastDataset make_lagged(const FeatureSeries& fs, std::size_t smoothing_window, std::size_t nlag,
                            std::span<const std::string> variables = {});

// Display names of every dataset variable: the six per-stock variables then
// the nine global network variables.
std::vector<std::string> forecast_variable_names();

struct StockSplit {
  std::vector<std::size_t> train;  // ascending stock indices
  std::vector<std::size_t> test;
};

// Seeded shuffle; max(1, round(test_fraction * n)) test stocks, leaving at
// least one for training. Requires n >= 2.
StockSplit split_stocks(std::size_t stock_count, double test_fraction, std::uint64_t seed);

void assign_split(ForecastDataset& ds, const StockSplit& split);

struct RankedFeature {
  std::size_t rank = 0;  // 1-based, by decreasing |correlation|
  std::string name;
  double abs_correlation = 0.0;
  bool selected = false;
};

struct FeatureSelection {
  ForecastDataset dataset;       // selected columns only
  std::vector<RankedFeature> ranking;  // every candidate column
  double threshold = 0.0;        // percentile of |correlation|
};

// Keeps the columns whose |Pearson correlation| with the target over the
// training rows is strictly above the given percentile (linear
// interpolation) of all candidates' |correlation| values.
FeatureSelection select_features(const ForecastDataset& ds, double percentile = 65.0);

}  // namespace marketnet
