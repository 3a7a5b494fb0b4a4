// Acceptance checks. Prints one PASS/FAIL/SKIP line per criterion and exits
// non-zero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/exp_sinh.hpp>

#include "marketnet/marketnet.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"
#include "synthetic.hpp"

using namespace marketnet;

namespace {

struct Outcome {
  enum Status { kPass, kFail, kSkip } status = kPass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, format, args...);
  return buffer;
}

// Spanning tree plus Erdos-Renyi extras, so the Perron vector is unique.
StockGraph connected_graph(std::uint64_t seed, std::size_t n, double p) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<bool>> has(n, std::vector<bool>(n, false));
  std::vector<Edge> edges;
  auto add = [&](std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    if (a == b || has[a][b]) return;
    has[a][b] = true;
    edges.push_back({a, b, 0.5 + 0.5 * u(gen)});
  };
  for (std::size_t i = 1; i < n; ++i) add(i, std::uniform_int_distribution<std::size_t>(0, i - 1)(gen));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (u(gen) < p) add(i, j);
  return StockGraph::from_edges(n, edges);
}

CorrelationMatrix random_correlation(std::uint64_t seed, Eigen::Index n) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  const Eigen::Index rows = 30 + static_cast<Eigen::Index>(seed % 40);
  const double market = 0.2 + 0.1 * static_cast<double>(seed % 10);
  ReturnMatrix r;
  r.values.resize(rows, n);
  for (Eigen::Index t = 0; t < rows; ++t) {
    const double m = z(gen);
    for (Eigen::Index c = 0; c < n; ++c) r.values(t, c) = market * m + z(gen);
  }
  for (Eigen::Index c = 0; c < n; ++c) r.tickers.push_back("S" + std::to_string(c));
  return correlation_matrix(r);
}

Outcome metric_oracles() {
  const auto start = Clock::now();
  std::size_t mismatches = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t n = 2 + seed % 11;
    const double p = 0.1 + 0.1 * static_cast<double>(seed % 7);
    const StockGraph g = oracle::random_graph(1000 + seed, n, p);
    const oracle::Dense d = oracle::dense(g);
    auto ratio = [&](double a, double b) { mismatches += std::abs(a - b) <= 1e-9 ? 0 : 1; };

    const auto k = degree(g);
    for (std::size_t i = 0; i < n; ++i) {
      int row = 0;
      for (int a : d.a[i]) row += a;
      mismatches += static_cast<int>(k[i]) == row ? 0 : 1;
    }
    const auto cl = closeness(g);
    const auto cl_ref = oracle::closeness(d);
    const auto bc = betweenness(g);
    const auto bc_ref = oracle::betweenness(d);
    const auto wc = weighted_clustering(g);
    const auto wc_ref = oracle::barrat_clustering(d);
    for (std::size_t i = 0; i < n; ++i) {
      ratio(cl[i], cl_ref[i]);
      ratio(bc[i], bc_ref[i]);
      ratio(wc[i], wc_ref[i]);
    }
    if (g.edge_count() > 0) {
      const Partition part = louvain_partition(g, seed);
      ratio(modularity(g, part), oracle::modularity(d, part.community));
      std::mt19937_64 gen(seed);
      Partition random_part;
      random_part.count = std::min<std::size_t>(3, n);
      for (std::size_t i = 0; i < n; ++i) random_part.community.push_back(i % random_part.count);
      std::shuffle(random_part.community.begin(), random_part.community.end(), gen);
      ratio(modularity(g, random_part), oracle::modularity(d, random_part.community));
    }
    mismatches += largest_component(g) == oracle::largest_component(d, std::vector<bool>(n, true)) ? 0 : 1;
    for (double f : {0.1, 0.25, 0.5}) ratio(resilience(g, f), oracle::resilience(d, f));
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  o.status = mismatches == 0 && elapsed < 30.0 ? Outcome::kPass : Outcome::kFail;
  o.detail = fmt("200 graphs, %zu mismatches, %.2f s (limit 30 s)", mismatches, elapsed);
  return o;
}

Outcome eigen_suite() {
  double worst_vector = 0.0, worst_lambda = 0.0;
  std::size_t out_of_range = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t n = 2 + seed % 19;
    const StockGraph g = connected_graph(seed, n, 0.05 * static_cast<double>(seed % 8));
    const Eigen::MatrixXd a = oracle::adjacency_matrix(oracle::dense(g));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const Eigen::VectorXd top = es.eigenvectors().col(static_cast<Eigen::Index>(n) - 1).cwiseAbs();
    const auto ec = eigenvector_centrality(g);
    for (std::size_t i = 0; i < n; ++i)
      worst_vector = std::max(worst_vector, std::abs(ec.values[i] - top(static_cast<Eigen::Index>(i))));
    worst_vector = std::max(worst_vector, std::abs(ec.eigenvalue - es.eigenvalues()(static_cast<Eigen::Index>(n) - 1)));
  }
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(seed % 19);
    const CorrelationMatrix c = random_correlation(500 + seed, n);
    const double lambda = max_eigenvalue(c);
    const double ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c.values).eigenvalues().maxCoeff();
    worst_lambda = std::max(worst_lambda, std::abs(lambda - ref));
    if (lambda < 1.0 - 1e-9 || lambda > static_cast<double>(n) + 1e-9) ++out_of_range;
  }
  Outcome o;
  o.status = worst_vector <= 1e-7 && worst_lambda <= 1e-7 && out_of_range == 0 ? Outcome::kPass : Outcome::kFail;
  o.detail = fmt("max |centrality error| %.2e, max |lambda error| %.2e (tol 1e-7), %zu lambdas outside [1, n]",
                 worst_vector, worst_lambda, out_of_range);
  return o;
}

std::vector<double> gaussian(std::mt19937_64& gen, std::size_t n) {
  std::normal_distribution<double> z;
  std::vector<double> v(n);
  for (double& x : v) x = z(gen);
  return v;
}

Outcome granger_calibration() {
  std::size_t false_positives = 0, detected = 0;
  double worst_f = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 gen(seed);
    const auto x = gaussian(gen, 200);
    const auto y = gaussian(gen, 200);
    const GrangerResult r = granger_test(x, y, 5);
    if (r.lags[0].p < 0.05) ++false_positives;
    for (std::size_t q = 1; q <= 5; ++q) {
      const double ref = oracle::granger_f(x, y, q);
      worst_f = std::max(worst_f, std::abs(r.lags[q - 1].f - ref) / std::max(1.0, std::abs(ref)));
    }
  }
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 gen(10'000 + seed);
    const auto x = gaussian(gen, 200);
    auto y = gaussian(gen, 200);
    for (std::size_t t = 199; t >= 1; --t) y[t] = 0.9 * x[t - 1] + y[t];
    const GrangerResult r = granger_test(x, y, 5);
    if (r.lags[0].p < 1e-6) ++detected;
    for (std::size_t q = 1; q <= 5; ++q) {
      const double ref = oracle::granger_f(x, y, q);
      worst_f = std::max(worst_f, std::abs(r.lags[q - 1].f - ref) / std::max(1.0, std::abs(ref)));
    }
  }
  Outcome o;
  o.status = false_positives <= 10 && detected >= 99 && worst_f <= 1e-8 ? Outcome::kPass : Outcome::kFail;
  o.detail = fmt("noise: %zu/100 with p<0.05 (max 10); planted: %zu/100 with p<1e-6 (min 99); "
                 "max F deviation from QR reference %.2e (tol 1e-8)",
                 false_positives, detected, worst_f);
  return o;
}

double f_tail_quadrature(double f, double d1, double d2) {
  const double log_beta = std::lgamma(d1 / 2) + std::lgamma(d2 / 2) - std::lgamma((d1 + d2) / 2);
  auto pdf = [&](double x) {
    if (x <= 0.0) return 0.0;
    const double log_pdf = 0.5 * (d1 * std::log(d1 * x) + d2 * std::log(d2) - (d1 + d2) * std::log(d1 * x + d2)) -
                           std::log(x) - log_beta;
    return std::exp(log_pdf);
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([&](double t) { return pdf(f + t); }, 0.0, std::numeric_limits<double>::infinity());
}

Outcome f_distribution() {
  std::vector<int> d2_grid;
  for (int d2 = 5; d2 <= 30; ++d2) d2_grid.push_back(d2);
  for (int d2 = 35; d2 <= 200; d2 += 5) d2_grid.push_back(d2);
  double worst = 0.0;
  std::size_t points = 0;
  for (int step = 1; step <= 100; ++step)
    for (int d1 = 1; d1 <= 12; ++d1)
      for (int d2 : d2_grid) {
        const double f = 0.1 * step;
        worst = std::max(worst, std::abs(f_pvalue(f, d1, d2) - f_tail_quadrature(f, d1, d2)));
        ++points;
      }
  Outcome o;
  o.status = worst <= 1e-6 ? Outcome::kPass : Outcome::kFail;
  o.detail = fmt("%zu grid points, max |p error| %.2e (tol 1e-6)", points, worst);
  return o;
}

Outcome threshold_selector() {
  std::size_t recovered = 0, fallbacks = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const synthetic::PlantedNetwork planted = synthetic::planted_preferential_attachment(seed);
    const ThresholdSelection sel = select_threshold(planted.corr);
    fallbacks += sel.fallback ? 1 : 0;
    const StockGraph g = threshold_adjacency(planted.corr, sel.rho);
    if (synthetic::top_degree_set(degree(g)) == planted.hubs) ++recovered;
  }
  Outcome o;
  o.status = recovered >= 90 ? Outcome::kPass : Outcome::kFail;
  o.detail = fmt("hub set recovered in %zu/100 seeds (min 90), %zu fallbacks", recovered, fallbacks);
  return o;
}

struct PlantedForecasts {
  double seconds = 0.0;
  std::vector<cli::ForecastRun> runs;
  std::string error;
};

const PlantedForecasts& planted_forecasts() {
  static const PlantedForecasts result = [] {
    PlantedForecasts out;
    const auto start = Clock::now();
    try {
      const synthetic::SignalPanelOptions options;
      const PricePanel panel = synthetic::planted_signal_panel(7, options);
      cli::RunConfig config;
      config.window_len = options.rows_per_window;
      config.rho = options.rho;
      const cli::NetworkRun network = cli::run_network(clean_and_align(panel), config);
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        config.split_seed = seed;
        out.runs.push_back(cli::run_forecast(network.series, config));
      }
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    out.seconds = seconds_since(start);
    return out;
  }();
  return result;
}

const ModelSummary* find_model(const ForecastSummary& s, const std::string& name) {
  for (const auto& m : s.models)
    if (m.model == name) return &m;
  return nullptr;
}

Outcome planted_forecast() {
  const PlantedForecasts& pf = planted_forecasts();
  if (!pf.error.empty()) return {Outcome::kFail, "pipeline error: " + pf.error};
  std::size_t wins = 0;
  for (const auto& run : pf.runs) {
    const ModelSummary* rfr = find_model(run.summary, "RFR");
    const ModelSummary* base = find_model(run.summary, "RFRbase");
    if (rfr && base && rfr->median_r2 > base->median_r2 && rfr->improvement && *rfr->improvement > 0.0) ++wins;
  }
  Outcome o;
  o.status = wins >= 9 && pf.seconds < 300.0 ? Outcome::kPass : Outcome::kFail;
  o.detail = fmt("RFR beats RFRbase with positive improvement in %zu/10 split seeds (min 9), %.1f s (limit 300 s)",
                 wins, pf.seconds);
  return o;
}

Outcome selection_shape() {
  const PlantedForecasts& pf = planted_forecasts();
  if (!pf.error.empty()) return {Outcome::kFail, "pipeline error: " + pf.error};
  std::size_t first = 0;
  for (const auto& run : pf.runs)
    if (!run.ranking.empty() && run.ranking.front().name == "Log Return_1") ++first;
  Outcome o;
  o.status = first >= 9 ? Outcome::kPass : Outcome::kFail;
  o.detail = fmt("Log Return_1 ranked first in %zu/10 split seeds (min 9)", first);
  return o;
}

Outcome reproducibility() {
  synthetic::SignalPanelOptions options;
  options.stocks = 30;
  options.windows = 40;
  const PricePanel panel = synthetic::planted_signal_panel(3, options);
  cli::RunConfig config;
  config.window_len = options.rows_per_window;
  config.rho = options.rho;
  config.split_seed = 5;
  config.forest.n_trees = 50;
  auto render = [&] {
    const cli::NetworkRun network = cli::run_network(clean_and_align(panel), config);
    return cli::forecast_artifacts(cli::run_forecast(network.series, config), config);
  };
  const cli::Artifacts first = render();
  const cli::Artifacts second = render();
  std::size_t differing = 0;
  for (const auto& [path, contents] : first) {
    const auto it = second.find(path);
    if (it == second.end() || it->second != contents) ++differing;
  }
  if (first.size() != second.size()) ++differing;
  Outcome o;
  o.status = differing == 0 && !first.empty() ? Outcome::kPass : Outcome::kFail;
  o.detail = fmt("%zu report files compared, %zu differ", first.size(), differing);
  return o;
}

Outcome real_data() {
  const char* path = std::getenv("MARKETNET_SP500_CSV");
  if (path == nullptr || *path == '\0') return {Outcome::kSkip, "set MARKETNET_SP500_CSV to a daily close CSV"};
  try {
    cli::RunConfig config;
    config.prices = path;
    const cli::NetworkRun run = cli::run_network(config);
    std::size_t in_band = 0;
    std::vector<double> clustering, market;
    for (const auto& w : run.windows) {
      if (w.rho >= 0.85 && w.rho <= 0.95) ++in_band;
      clustering.push_back(w.snapshot.global.mean_clustering);
      market.push_back(w.snapshot.global.market_log_return);
    }
    const std::size_t windows = run.windows.size();
    const double r = windows > 2 ? stats::pearson(clustering, market) : 0.0;
    const bool ok = windows >= 28 && windows <= 32 && 2 * in_band > windows && r < 0.0;
    return {ok ? Outcome::kPass : Outcome::kFail,
            fmt("%zu windows (about 30), %zu with rho in [0.85, 0.95], corr(clustering, market) = %.3f", windows,
                in_band, r)};
  } catch (const std::exception& e) {
    return {Outcome::kFail, std::string("pipeline error: ") + e.what()};
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"metric oracle suite", metric_oracles},
      {"eigen suite", eigen_suite},
      {"granger calibration", granger_calibration},
      {"F-distribution accuracy", f_distribution},
      {"threshold selector hub recovery", threshold_selector},
      {"planted-signal forecast", planted_forecast},
      {"selection table shape", selection_shape},
      {"byte-identical forecast reports", reproducibility},
      {"real S&P 500 data", real_data},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    const char* status = o.status == Outcome::kPass ? "PASS" : o.status == Outcome::kFail ? "FAIL" : "SKIP";
    if (o.status == Outcome::kFail) ++failures;
    std::printf("%s criterion %zu: %s: %s\n", status, i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
