#include "pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace marketnet::cli {

namespace {

using nlohmann::ordered_json;

ordered_json header_json(const RunConfig& config) {
  ordered_json j;
  j["tool"] = "marketnet";
  j["tool_version"] = tool_version();
  j["config"] = to_json(config);
  return j;
}

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json optional_number(const std::optional<double>& v) {
  return v ? number_or_null(*v) : ordered_json(nullptr);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const std::string& source) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError(source + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv_line(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
    } else {
      if (cells.size() != table.header.size()) {
        throw InputError(path.string() + ": row " + std::to_string(table.rows.size() + 1) + " has " +
                         std::to_string(cells.size()) + " cells, expected " +
                         std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(cells));
    }
  }
  if (table.header.empty()) throw InputError(path.string() + ": empty file");
  return table;
}

double parse_double(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw InputError(context + ": not a number '" + text + "'");
  }
}

Eigen::VectorXd entries_of(const Eigen::VectorXd& y, std::span<const std::size_t> rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Eigen::Index>(r)) = y(static_cast<Eigen::Index>(rows[r]));
  return out;
}

std::optional<double> r2_of(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred) {
  return r2_score(std::span<const double>(truth.data(), static_cast<std::size_t>(truth.size())),
                  std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())));
}

// Runs `fn`, prefixing any failure with the stage name.
template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw Error(name + ": " + e.what());
  }
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

NetworkRun run_network(const RunConfig& config) {
  const PricePanel raw = stage("ingest", [&] { return load_prices(config.prices, config.sectors); });
  const CleanResult cleaned = stage("ingest", [&] { return clean_and_align(raw); });
  return run_network(cleaned, config);
}

NetworkRun run_network(const CleanResult& cleaned, const RunConfig& config) {
  const PricePanel& panel = cleaned.panel;
  NetworkRun run;
  run.tickers = panel.tickers;
  for (const auto& t : panel.tickers) run.sectors.push_back(panel.sector(t));
  run.dropped = cleaned.dropped;

  WindowSplit split = stage("ingest", [&] {
    if (config.calendar_years) return split_calendar_years(panel);
    const std::size_t len =
        config.window_len.value_or(config.mode == Mode::kLong ? period_window_length(panel.rows(), 30) : 14);
    run.window_len = len;
    return split_windows(panel, len);
  });
  run.discarded_rows = split.discarded_rows;
  if (split.windows.empty()) throw Error("ingest: no complete window");
  if (!config.rho && panel.cols() < 10) {
    throw InputError("graph: automatic threshold selection needs at least 10 stocks; pass --rho");
  }

  const std::size_t n_windows = split.windows.size();
  run.windows.resize(n_windows);
  GlobalFeatureOptions options;
  options.louvain_seed = config.model_seed;
  options.resilience_fraction = config.resilience_f;

  std::vector<Eigen::VectorXd> window_returns(n_windows);
  parallel_for(n_windows, [&](std::size_t k) {
    const PricePanel& w = split.windows[k];
    WindowInfo& info = run.windows[k];
    try {
      info.index = k;
      info.start = w.timestamps.front().text;
      info.end = w.timestamps.back().text;
      info.rows = w.rows();
      const ReturnMatrix returns = log_returns(w);
      const CorrelationMatrix corr = correlation_matrix(returns);
      if (config.rho) {
        info.rho = *config.rho;
      } else {
        const ThresholdSelection selection = select_threshold(corr);
        info.rho = selection.rho;
        info.rho_fallback = selection.fallback;
      }
      info.graph = threshold_adjacency(corr, info.rho);
      info.snapshot = analyze_network(info.graph, corr, returns, options);
      window_returns[k] = mean_log_returns(returns);
    } catch (const std::exception& e) {
      throw Error("network: window " + std::to_string(k) + " (" + info.start + " .. " + info.end + "): " + e.what());
    }
  });

  FeatureSeries& fs = run.series;
  fs.tickers = run.tickers;
  const auto n = static_cast<Eigen::Index>(run.tickers.size());
  for (auto& m : fs.stock) m.resize(static_cast<Eigen::Index>(n_windows), n);
  for (std::size_t k = 0; k < n_windows; ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    const NodeMetrics& nodes = run.windows[k].snapshot.nodes;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      fs.values(StockVariable::kLogReturn)(row, i) = window_returns[k](i);
      fs.values(StockVariable::kDegreeCentrality)(row, i) = nodes.degree_centrality[u];
      fs.values(StockVariable::kCloseness)(row, i) = nodes.closeness[u];
      fs.values(StockVariable::kBetweenness)(row, i) = nodes.betweenness[u];
      fs.values(StockVariable::kEigenvector)(row, i) = nodes.eigenvector[u];
      fs.values(StockVariable::kClustering)(row, i) = nodes.clustering[u];
    }
    fs.global.push_back(run.windows[k].snapshot.global);
  }
  return run;
}

GrangerRun run_granger(const std::vector<GlobalFeatures>& global, const RunConfig& config) {
  GrangerRun run;
  run.max_lag = config.resolved_max_lag();
  run.n_obs = global.size();
  std::vector<double> target;
  for (const auto& g : global) target.push_back(g.market_log_return);
  const auto& names = GlobalFeatures::display_names();
  for (std::size_t v = 0; v < GlobalFeatures::kNetworkVariables; ++v) {
    std::vector<double> x;
    for (const auto& g : global) x.push_back(g.network_values()[v]);
    run.results.push_back(stage("granger", [&] {
      return granger_test(x, target, run.max_lag, std::string(names[v]));
    }));
  }
  return run;
}

ForecastRun run_forecast(const FeatureSeries& series, const RunConfig& config) {
  ForecastRun run;
  run.tickers = series.tickers;
  run.nlag = config.resolved_nlag();
  run.smoothing_window = stage("features", [&] {
    return config.smooth_w.value_or(choose_window(series.window_count()));
  });

  ForecastDataset ds = stage("features", [&] { return make_lagged(series, run.smoothing_window, run.nlag); });
  run.split = stage("features", [&] { return split_stocks(series.stock_count(), config.test_frac, config.split_seed); });
  assign_split(ds, run.split);
  ds.split_seed = config.split_seed;

  const FeatureSelection selection =
      stage("features", [&] { return select_features(ds, config.selection_percentile); });
  run.ranking = selection.ranking;
  run.selection_threshold = selection.threshold;
  for (const auto& c : selection.dataset.columns) run.selected.push_back(c.name);
  if (run.selected.empty()) throw Error("features: no column passed the selection threshold");

  const std::vector<std::size_t> train = ds.rows_with(SplitTag::kTrain);
  const std::vector<std::size_t> test = ds.rows_with(SplitTag::kTest);
  run.train_rows = train.size();
  run.test_rows = test.size();
  const auto n_validation = static_cast<std::size_t>(std::floor(config.validation_frac * static_cast<double>(train.size())));
  run.validation_rows = std::clamp<std::size_t>(n_validation, 1, train.size() > 2 ? train.size() - 2 : 1);
  run.fit_rows = train.size() - run.validation_rows;
  const std::span<const std::size_t> fit_part(train.data(), run.fit_rows);
  const std::span<const std::size_t> validation_part(train.data() + run.fit_rows, run.validation_rows);

  const std::string lag1 = std::string(FeatureSeries::stock_display_names()[0]) + "_1";
  std::vector<std::size_t> baseline_lr{ds.column(lag1)};
  std::vector<std::size_t> selected_idx;
  std::vector<std::size_t> selected_returns;
  for (const auto& name : run.selected) {
    const std::size_t c = ds.column(name);
    selected_idx.push_back(c);
    if (ds.columns[c].variable == 0) selected_returns.push_back(c);
  }
  if (selected_returns.empty()) selected_returns = baseline_lr;

  const Eigen::VectorXd& y = ds.y;
  auto columns_of = [&](std::span<const std::size_t> rows, const std::vector<std::size_t>& cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < cols.size(); ++c)
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            ds.X(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[c]));
    return out;
  };
  auto names_of = [&](const std::vector<std::size_t>& cols) {
    std::vector<std::string> out;
    for (std::size_t c : cols) out.push_back(ds.columns[c].name);
    return out;
  };

  enum Member { kRfr, kLr, kGbr, kRfrBase };
  const std::vector<std::size_t>* feature_sets[] = {&selected_idx, &baseline_lr, &selected_idx, &selected_returns};
  auto fit_member = [&](Member m, std::span<const std::size_t> rows) {
    const Eigen::MatrixXd X = columns_of(rows, *feature_sets[m]);
    const Eigen::VectorXd target = entries_of(y, rows);
    EnsembleModel model;
    switch (m) {
      case kRfr:
      case kRfrBase:
        model = fit_random_forest(X, target, config.forest, config.model_seed);
        break;
      case kLr:
        model = fit_linear(X, target);
        break;
      case kGbr:
        model = fit_gradient_boosting(X, target, config.boosting, config.model_seed);
        break;
    }
    model.features = names_of(*feature_sets[m]);
    return model;
  };

  // Validation pass: fit on the leading rows, score on the trailing slice.
  const Eigen::VectorXd y_validation = entries_of(y, validation_part);
  std::array<std::optional<double>, 4> validation_r2;
  std::array<Eigen::VectorXd, 4> validation_pred;
  stage("models", [&] {
    for (Member m : {kRfr, kLr, kGbr, kRfrBase}) {
      const EnsembleModel model = fit_member(m, fit_part);
      validation_pred[m] = model.predict(columns_of(validation_part, *feature_sets[m]));
      validation_r2[m] = r2_of(y_validation, validation_pred[m]);
    }
    return 0;
  });
  run.wa_weights = average_weights(validation_r2[kGbr].value_or(0.0), validation_r2[kRfr].value_or(0.0));
  const Eigen::VectorXd wa_validation =
      run.wa_weights.a * validation_pred[kGbr] + run.wa_weights.b * validation_pred[kRfr];

  std::array<EnsembleModel, 4> final_models;
  stage("models", [&] {
    for (Member m : {kRfr, kLr, kGbr, kRfrBase}) final_models[m] = fit_member(m, train);
    return 0;
  });
  EnsembleModel wa;
  wa.kind = ModelKind::kWeightedAverage;
  wa.features = final_models[kRfr].features;
  wa.seed = config.model_seed;
  wa.forest = final_models[kRfr].forest;
  wa.boosted = final_models[kGbr].boosted;
  wa.forest_weight = run.wa_weights.b;
  wa.boosted_weight = run.wa_weights.a;

  run.models.push_back({"RFR", final_models[kRfr], validation_r2[kRfr]});
  run.models.push_back({"LRbase", final_models[kLr], validation_r2[kLr]});
  run.models.push_back({"GBR", final_models[kGbr], validation_r2[kGbr]});
  run.models.push_back({"wA", wa, r2_of(y_validation, wa_validation)});
  run.models.push_back({"RFRbase", final_models[kRfrBase], validation_r2[kRfrBase]});

  // Scoring: every model on every test stock.
  stage("scoring", [&] {
    std::vector<Eigen::VectorXd> test_pred;
    const std::vector<std::size_t>* model_features[] = {&selected_idx, &baseline_lr, &selected_idx, &selected_idx,
                                                        &selected_returns};
    for (std::size_t m = 0; m < run.models.size(); ++m)
      test_pred.push_back(run.models[m].model.predict(columns_of(test, *model_features[m])));
    std::unordered_map<std::size_t, std::size_t> position;
    for (std::size_t r = 0; r < test.size(); ++r) position[test[r]] = r;
    for (std::size_t stock : run.split.test) {
      const std::vector<std::size_t> rows = ds.rows_of_stock(stock);
      const Eigen::VectorXd truth = entries_of(y, rows);
      for (std::size_t m = 0; m < run.models.size(); ++m) {
        Eigen::VectorXd pred(truth.size());
        for (std::size_t r = 0; r < rows.size(); ++r)
          pred(static_cast<Eigen::Index>(r)) = test_pred[m](static_cast<Eigen::Index>(position.at(rows[r])));
        StockScore score;
        score.ticker = series.tickers[stock];
        score.model = run.models[m].name;
        score.r2 = r2_of(truth, pred);
        score.mae = mae(std::span<const double>(truth.data(), rows.size()),
                        std::span<const double>(pred.data(), rows.size()));
        run.scores.push_back(std::move(score));
      }
    }
    const std::vector<std::string> baselines{"LRbase", "RFRbase"};
    run.summary = summarize(run.scores, model_order(), baselines);
    return 0;
  });
  return run;
}

std::string csv_preamble(const RunConfig& config) {
  return std::string("# marketnet ") + tool_version() + " config=" + to_json(config).dump() + "\n";
}

nlohmann::ordered_json graph_json(const NetworkRun& run, std::size_t window, const RunConfig& config) {
  const WindowInfo& w = run.windows.at(window);
  ordered_json j;
  j["directed"] = false;
  j["multigraph"] = false;
  ordered_json meta = header_json(config);
  meta["window"] = w.index;
  meta["start"] = w.start;
  meta["end"] = w.end;
  meta["rho"] = w.rho;
  meta["rho_fallback"] = w.rho_fallback;
  j["graph"] = meta;
  ordered_json nodes = ordered_json::array();
  for (std::size_t i = 0; i < run.tickers.size(); ++i) {
    ordered_json node;
    node["id"] = run.tickers[i];
    node["sector"] = run.sectors[i];
    node["degree"] = w.snapshot.nodes.degree[i];
    node["eigenvector_centrality"] = w.snapshot.nodes.eigenvector[i];
    node["community_id"] = w.snapshot.partition.community[i];
    nodes.push_back(std::move(node));
  }
  j["nodes"] = std::move(nodes);
  ordered_json edges = ordered_json::array();
  for (const Edge& e : w.graph.edges()) {
    ordered_json edge;
    edge["source"] = run.tickers[e.source];
    edge["target"] = run.tickers[e.target];
    edge["weight"] = e.weight;
    edges.push_back(std::move(edge));
  }
  j["edges"] = std::move(edges);
  return j;
}

Artifacts network_artifacts(const NetworkRun& run, const RunConfig& config) {
  Artifacts out;
  const std::string preamble = csv_preamble(config);

  std::ostringstream features;
  features << preamble << "window,start,end,rows";
  for (auto key : GlobalFeatures::keys()) features << ',' << key;
  features << ",market_log_return,rho,rho_fallback,edge_count,community_count\n";
  for (const WindowInfo& w : run.windows) {
    features << w.index << ',' << csv_field(w.start) << ',' << csv_field(w.end) << ',' << w.rows;
    for (double v : w.snapshot.global.network_values()) features << ',' << format_double(v);
    features << ',' << format_double(w.snapshot.global.market_log_return) << ',' << format_double(w.rho) << ','
             << (w.rho_fallback ? 1 : 0) << ',' << w.graph.edge_count() << ',' << w.snapshot.partition.count << '\n';
  }
  out["features.csv"] = features.str();

  std::ostringstream nodes;
  nodes << preamble << "window,ticker,sector";
  for (auto key : FeatureSeries::stock_keys()) nodes << ',' << key;
  nodes << ",degree,community\n";
  for (const WindowInfo& w : run.windows) {
    const auto k = static_cast<Eigen::Index>(w.index);
    for (std::size_t i = 0; i < run.tickers.size(); ++i) {
      nodes << w.index << ',' << csv_field(run.tickers[i]) << ',' << csv_field(run.sectors[i]);
      for (const auto& m : run.series.stock) nodes << ',' << format_double(m(k, static_cast<Eigen::Index>(i)));
      nodes << ',' << w.snapshot.nodes.degree[i] << ',' << w.snapshot.partition.community[i] << '\n';
    }
  }
  out["node_metrics.csv"] = nodes.str();

  std::ostringstream dropped;
  dropped << preamble;
  write_dropped_report(dropped, run.dropped);
  out["dropped_tickers.txt"] = dropped.str();

  ordered_json summary = header_json(config);
  summary["stocks"] = run.tickers.size();
  summary["dropped_tickers"] = run.dropped.size();
  summary["window_len"] = run.window_len == 0 ? ordered_json("calendar-year") : ordered_json(run.window_len);
  summary["windows"] = run.windows.size();
  summary["discarded_rows"] = run.discarded_rows;
  std::size_t fallbacks = 0;
  std::size_t shifted = 0;
  std::size_t unconverged = 0;
  for (const WindowInfo& w : run.windows) {
    fallbacks += w.rho_fallback ? 1 : 0;
    shifted += w.snapshot.nodes.eigenvector_shifted ? 1 : 0;
    unconverged += w.snapshot.nodes.eigenvector_converged ? 0 : 1;
  }
  summary["rho_fallback_windows"] = fallbacks;
  summary["eigenvector_shifted_windows"] = shifted;
  summary["eigenvector_unconverged_windows"] = unconverged;
  out["network_summary.json"] = summary.dump(2) + "\n";

  if (config.export_graphs) {
    for (std::size_t k = 0; k < run.windows.size(); ++k) {
      char name[48];
      std::snprintf(name, sizeof name, "graphs/window_%04zu.json", k);
      out[name] = graph_json(run, k, config).dump(2) + "\n";
    }
  }
  return out;
}

Artifacts granger_artifacts(const GrangerRun& run, const RunConfig& config) {
  ordered_json j = header_json(config);
  j["target"] = "market_log_return";
  j["max_lag"] = run.max_lag;
  j["n_obs"] = run.n_obs;
  j["significance_level"] = kSignificanceLevel;
  j["df_convention"] = "F = ((SSR_r - SSR_u) / q) / (SSR_u / (n - 2q - 1)), n = len - q";
  ordered_json results = ordered_json::array();
  for (const GrangerResult& r : run.results) {
    ordered_json entry;
    entry["variable"] = r.variable;
    entry["untestable"] = r.untestable;
    if (r.untestable) {
      entry["best_lag"] = nullptr;
      entry["F"] = nullptr;
      entry["p"] = nullptr;
      entry["significant"] = false;
      entry["note"] = r.note;
    } else {
      entry["best_lag"] = r.best_lag;
      entry["F"] = number_or_null(r.best().f);
      entry["p"] = r.best().p;
      entry["significant"] = r.significant();
      ordered_json lags = ordered_json::array();
      for (const GrangerLag& l : r.lags) {
        lags.push_back({{"lag", l.lag},
                        {"F", number_or_null(l.f)},
                        {"p", l.p},
                        {"df_num", l.df_num},
                        {"df_den", l.df_den},
                        {"ssr_restricted", l.ssr_restricted},
                        {"ssr_unrestricted", l.ssr_unrestricted},
                        {"degenerate", l.degenerate}});
      }
      entry["lags"] = std::move(lags);
    }
    results.push_back(std::move(entry));
  }
  j["results"] = std::move(results);
  return {{"granger.json", j.dump(2) + "\n"}};
}

namespace {

ordered_json model_json(const ModelInfo& info, const ForecastRun& run, const RunConfig& config) {
  ordered_json j;
  j["name"] = info.name;
  j["kind"] = std::string(to_string(info.model.kind));
  j["seed"] = info.model.kind == ModelKind::kLinear ? ordered_json(nullptr) : ordered_json(info.model.seed);
  j["features"] = info.model.features;
  j["validation_r2"] = optional_number(info.validation_r2);
  ordered_json params;
  switch (info.model.kind) {
    case ModelKind::kLinear: {
      const LinearModel& lm = *info.model.linear;
      params["intercept"] = lm.intercept;
      std::vector<double> coefficients(lm.coefficients.data(), lm.coefficients.data() + lm.coefficients.size());
      params["coefficients"] = coefficients;
      std::vector<bool> flags = lm.constant_columns;
      params["constant_columns"] = flags;
      break;
    }
    case ModelKind::kForest:
      params = to_json(config)["forest"];
      params["max_features"] = info.model.forest->max_features;
      break;
    case ModelKind::kBoosted:
      params = to_json(config)["boosting"];
      break;
    case ModelKind::kWeightedAverage:
      params["members"] = {"GBR", "RFR"};
      params["weights"] = {run.wa_weights.a, run.wa_weights.b};
      params["weight_source"] = "validation R2, clamped at 0";
      break;
  }
  j["hyperparameters"] = std::move(params);
  return j;
}

}  // namespace

Artifacts forecast_artifacts(const ForecastRun& run, const RunConfig& config) {
  Artifacts out;
  const std::string preamble = csv_preamble(config);

  ordered_json j = header_json(config);
  j["conventions"] = {
      {"score", "R2, coefficient of determination"},
      {"median", "mean of the two middle values for even counts"},
      {"improvement", "median_r2(model) / median_r2(best baseline) - 1"},
      {"validation", "last validation_frac of the pooled training rows (stock-major, ticker order)"}};
  auto tickers_of = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::string> names;
    for (std::size_t i : idx) names.push_back(run.tickers[i]);
    return names;
  };
  j["dataset"] = {{"smoothing_window", run.smoothing_window},
                  {"nlag", run.nlag},
                  {"stocks", run.tickers.size()},
                  {"train_stocks", tickers_of(run.split.train)},
                  {"test_stocks", tickers_of(run.split.test)},
                  {"train_rows", run.train_rows},
                  {"fit_rows", run.fit_rows},
                  {"validation_rows", run.validation_rows},
                  {"test_rows", run.test_rows},
                  {"candidate_columns", run.ranking.size()},
                  {"selected_columns", run.selected.size()}};
  ordered_json ranking = ordered_json::array();
  for (const RankedFeature& f : run.ranking)
    ranking.push_back({{"rank", f.rank}, {"name", f.name}, {"abs_correlation", f.abs_correlation}, {"selected", f.selected}});
  j["selection"] = {{"percentile", config.selection_percentile},
                    {"threshold", run.selection_threshold},
                    {"ranking", std::move(ranking)}};
  ordered_json models = ordered_json::array();
  for (const ModelInfo& m : run.models) models.push_back(model_json(m, run, config));
  j["models"] = std::move(models);

  ordered_json summary;
  summary["baseline_model"] = run.summary.baseline_model;
  summary["baseline_median_r2"] = run.summary.baseline_median_r2;
  ordered_json per_model = ordered_json::array();
  for (const ModelSummary& m : run.summary.models) {
    per_model.push_back({{"model", m.model},
                         {"scored", m.scored},
                         {"excluded", m.excluded},
                         {"median_r2", m.median_r2},
                         {"min_r2", m.min_r2},
                         {"max_r2", m.max_r2},
                         {"median_mae", m.median_mae},
                         {"min_mae", m.min_mae},
                         {"max_mae", m.max_mae},
                         {"improvement", optional_number(m.improvement)}});
  }
  summary["models"] = std::move(per_model);
  j["summary"] = std::move(summary);

  ordered_json scores = ordered_json::array();
  for (const StockScore& s : run.scores)
    scores.push_back({{"ticker", s.ticker}, {"model", s.model}, {"r2", optional_number(s.r2)}, {"mae", s.mae}});
  j["scores"] = std::move(scores);
  out["forecast_report.json"] = j.dump(2) + "\n";

  std::ostringstream scores_csv;
  scores_csv << preamble << "ticker,model,r2,mae\n";
  for (const StockScore& s : run.scores) {
    scores_csv << csv_field(s.ticker) << ',' << s.model << ',' << (s.r2 ? format_double(*s.r2) : "") << ','
               << format_double(s.mae) << '\n';
  }
  out["scores.csv"] = scores_csv.str();

  std::ostringstream hist;
  hist << preamble << "model,metric,bin,lower,upper,count\n";
  for (const ModelSummary& m : run.summary.models) {
    for (const auto& [metric, h] : {std::pair<const char*, const Histogram*>{"r2", &m.r2_histogram},
                                    std::pair<const char*, const Histogram*>{"mae", &m.mae_histogram}}) {
      const double width = h->counts.empty() ? 0.0 : (h->upper - h->lower) / static_cast<double>(h->counts.size());
      for (std::size_t b = 0; b < h->counts.size(); ++b) {
        const double lo = h->lower + width * static_cast<double>(b);
        const double hi = b + 1 == h->counts.size() ? h->upper : lo + width;
        hist << m.model << ',' << metric << ',' << b << ',' << format_double(lo) << ',' << format_double(hi) << ','
             << h->counts[b] << '\n';
      }
    }
  }
  out["histograms.csv"] = hist.str();

  std::ostringstream selected;
  selected << preamble << "rank,column,abs_correlation,selected\n";
  for (const RankedFeature& f : run.ranking) {
    selected << f.rank << ',' << csv_field(f.name) << ',' << format_double(f.abs_correlation) << ','
             << (f.selected ? 1 : 0) << '\n';
  }
  out["selected_features.csv"] = selected.str();
  return out;
}

void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts) {
  namespace fs = std::filesystem;
  std::vector<std::pair<fs::path, fs::path>> staged;
  try {
    for (const auto& [name, contents] : artifacts) {
      const fs::path target = dir / name;
      fs::create_directories(target.parent_path());
      fs::path temp = target;
      temp += ".tmp";
      std::ofstream out(temp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write " + temp.string());
      out << contents;
      out.close();
      if (!out) throw Error("cannot write " + temp.string());
      staged.emplace_back(temp, target);
    }
  } catch (...) {
    std::error_code ignored;
    for (const auto& [temp, target] : staged) fs::remove(temp, ignored);
    throw;
  }
  for (const auto& [temp, target] : staged) fs::rename(temp, target);
}

FeatureSeries read_feature_series(const std::filesystem::path& features_csv,
                                  const std::filesystem::path& node_metrics_csv) {
  const CsvTable features = read_csv_table(features_csv);
  const CsvTable nodes = read_csv_table(node_metrics_csv);
  const std::string fsrc = features_csv.string();
  const std::string nsrc = node_metrics_csv.string();

  FeatureSeries fs;
  std::vector<std::size_t> key_cols;
  for (auto key : GlobalFeatures::keys()) key_cols.push_back(features.column(std::string(key), fsrc));
  const std::size_t market_col = features.column("market_log_return", fsrc);
  for (std::size_t r = 0; r < features.rows.size(); ++r) {
    const auto& row = features.rows[r];
    const std::string ctx = fsrc + " row " + std::to_string(r + 1);
    std::array<double, GlobalFeatures::kNetworkVariables> v{};
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = parse_double(row[key_cols[k]], ctx);
    GlobalFeatures g;
    g.p90_degree = v[0];
    g.mean_closeness = v[1];
    g.mean_betweenness = v[2];
    g.mean_eigenvector = v[3];
    g.mean_clustering = v[4];
    g.max_eigenvalue = v[5];
    g.community_stability = v[6];
    g.largest_component = v[7];
    g.resilience = v[8];
    g.market_log_return = parse_double(row[market_col], ctx);
    fs.global.push_back(g);
  }
  if (fs.global.empty()) throw InputError(fsrc + ": no feature rows");

  const std::size_t window_col = nodes.column("window", nsrc);
  const std::size_t ticker_col = nodes.column("ticker", nsrc);
  std::vector<std::size_t> var_cols;
  for (auto key : FeatureSeries::stock_keys()) var_cols.push_back(nodes.column(std::string(key), nsrc));
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& row : nodes.rows) {
    if (!index.contains(row[ticker_col])) {
      index.emplace(row[ticker_col], fs.tickers.size());
      fs.tickers.push_back(row[ticker_col]);
    }
  }
  const auto windows = static_cast<Eigen::Index>(fs.global.size());
  const auto stocks = static_cast<Eigen::Index>(fs.tickers.size());
  for (auto& m : fs.stock) m = Eigen::MatrixXd::Constant(windows, stocks, std::nan(""));
  for (std::size_t r = 0; r < nodes.rows.size(); ++r) {
    const auto& row = nodes.rows[r];
    const std::string ctx = nsrc + " row " + std::to_string(r + 1);
    const double w = parse_double(row[window_col], ctx);
    if (w < 0 || w >= static_cast<double>(windows) || w != std::floor(w)) throw InputError(ctx + ": bad window index");
    const auto s = static_cast<Eigen::Index>(index.at(row[ticker_col]));
    for (std::size_t v = 0; v < var_cols.size(); ++v)
      fs.stock[v](static_cast<Eigen::Index>(w), s) = parse_double(row[var_cols[v]], ctx);
  }
  for (const auto& m : fs.stock)
    if (m.hasNaN()) throw InputError(nsrc + ": missing (window, ticker) entries");
  fs.validate();
  return fs;
}

}  // namespace marketnet::cli
