#include <random>

#include <benchmark/benchmark.h>

#include "marketnet/marketnet.hpp"

using namespace marketnet;

namespace {

// Returns with one common factor, so thresholding gives a non-trivial graph.
ReturnMatrix factor_returns(Eigen::Index rows, Eigen::Index stocks, std::uint64_t seed = 1) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  ReturnMatrix r;
  r.values.resize(rows, stocks);
  for (Eigen::Index t = 0; t < rows; ++t) {
    const double m = z(gen);
    for (Eigen::Index s = 0; s < stocks; ++s) r.values(t, s) = (0.5 + 0.5 * (s % 3)) * m + z(gen);
  }
  for (Eigen::Index s = 0; s < stocks; ++s) r.tickers.push_back("S" + std::to_string(s));
  return r;
}

StockGraph market_graph(Eigen::Index stocks) {
  return threshold_adjacency(correlation_matrix(factor_returns(250, stocks)), 0.5);
}

void BM_Correlation(benchmark::State& state) {
  const ReturnMatrix r = factor_returns(250, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(correlation_matrix(r));
}
BENCHMARK(BM_Correlation)->Arg(100)->Arg(250)->Arg(500);

void BM_SelectThreshold(benchmark::State& state) {
  const CorrelationMatrix c = correlation_matrix(factor_returns(250, state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(select_threshold(c));
}
BENCHMARK(BM_SelectThreshold)->Arg(100)->Arg(250);

void BM_Betweenness(benchmark::State& state) {
  const StockGraph g = market_graph(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(betweenness(g));
  state.counters["edges"] = static_cast<double>(g.edge_count());
}
BENCHMARK(BM_Betweenness)->Arg(100)->Arg(250)->Arg(500);

void BM_Louvain(benchmark::State& state) {
  const StockGraph g = market_graph(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(louvain_partition(g, 42));
  state.counters["edges"] = static_cast<double>(g.edge_count());
}
BENCHMARK(BM_Louvain)->Arg(100)->Arg(250)->Arg(500);

void BM_RandomForestFit(benchmark::State& state) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  const Eigen::Index rows = state.range(0);
  Eigen::MatrixXd X(rows, 30);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < 30; ++j) X(i, j) = z(gen);
    y(i) = X(i, 0) - 0.5 * X(i, 1) * X(i, 2) + 0.1 * z(gen);
  }
  ForestParams params;
  params.n_trees = 50;
  for (auto _ : state) benchmark::DoNotOptimize(fit_random_forest(X, y, params, 42));
}
BENCHMARK(BM_RandomForestFit)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
