#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pipeline.hpp"

namespace fs = std::filesystem;
using marketnet::cli::RunConfig;

namespace {

struct Options {
  RunConfig config;
  std::string mode = "long";
  std::string rho = "auto";
  std::optional<fs::path> node_metrics;
};

void add_pipeline_options(CLI::App& cmd, Options& o, bool prices_required) {
  auto* prices = cmd.add_option("--prices", o.config.prices, "Price CSV: timestamp column, then one column per ticker");
  if (prices_required) prices->required()->check(CLI::ExistingFile);
  cmd.add_option("--sectors", o.config.sectors, "Two-column ticker,sector CSV")->check(CLI::ExistingFile);
  cmd.add_option("--mode", o.mode, "long (30 equal windows, Nlag 5) or short (14-row windows, Nlag 12)")
      ->check(CLI::IsMember({"long", "short"}))
      ->capture_default_str();
  cmd.add_option("--window-len", o.config.window_len, "Rows per window (overrides the mode default)")
      ->check(CLI::Range(3, 1 << 30));
  cmd.add_flag("--calendar-years", o.config.calendar_years, "One window per calendar year");
  cmd.add_option("--rho", o.rho, "Correlation threshold in [0,1] or 'auto'")->capture_default_str();
  cmd.add_option("--resilience-f", o.config.resilience_f, "Fraction of nodes removed for resilience")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd.add_option("--seed", o.config.split_seed, "Train/test split seed")->capture_default_str();
  cmd.add_option("--model-seed", o.config.model_seed, "Model and Louvain seed")->capture_default_str();
  cmd.add_option("--out", o.config.out, "Output directory")->capture_default_str();
}

void add_forecast_options(CLI::App& cmd, Options& o) {
  cmd.add_option("--features", o.config.features, "Existing features.csv (instead of --prices)")
      ->check(CLI::ExistingFile);
  cmd.add_option("--node-metrics", o.node_metrics, "node_metrics.csv (default: next to --features)")
      ->check(CLI::ExistingFile);
  cmd.add_option("--nlag", o.config.nlag, "Number of lags (default 5 long, 12 short)")->check(CLI::PositiveNumber);
  cmd.add_option("--smooth-w", o.config.smooth_w, "Rolling-mean window (default 10% of windows)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--test-frac", o.config.test_frac, "Fraction of stocks held out")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd.add_option("--validation-frac", o.config.validation_frac, "Trailing share of training rows for wA weights")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd.add_option("--select-percentile", o.config.selection_percentile, "Feature selection percentile")
      ->check(CLI::Range(0.0, 100.0))
      ->capture_default_str();
  cmd.add_option("--trees", o.config.forest.n_trees, "Random forest size")->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--min-samples-leaf", o.config.forest.min_samples_leaf, "Random forest leaf size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--max-features", o.config.forest.max_features, "Columns tried per split (0 = ceil(sqrt(d)))")
      ->capture_default_str();
  cmd.add_option("--forest-depth", o.config.forest.max_depth, "Random forest depth limit (0 = none)")
      ->capture_default_str();
  cmd.add_option("--stages", o.config.boosting.n_stages, "Boosting stages")->capture_default_str();
  cmd.add_option("--learning-rate", o.config.boosting.learning_rate, "Boosting learning rate")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd.add_option("--boost-depth", o.config.boosting.max_depth, "Boosting tree depth")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void finalize(Options& o) {
  o.config.mode = marketnet::cli::parse_mode(o.mode);
  if (o.rho != "auto") {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(o.rho, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != o.rho.size() || !(value >= 0.0 && value <= 1.0))
      throw CLI::ValidationError("--rho", "expected a number in [0,1] or 'auto', got '" + o.rho + "'");
    o.config.rho = value;
  }
}

marketnet::FeatureSeries load_series(const Options& o) {
  if (o.config.features) {
    const fs::path nodes = o.node_metrics.value_or(o.config.features->parent_path() / "node_metrics.csv");
    return marketnet::cli::read_feature_series(*o.config.features, nodes);
  }
  if (!o.config.prices.empty()) {
    auto run = marketnet::cli::run_network(o.config);
    marketnet::cli::write_artifacts(o.config.out, marketnet::cli::network_artifacts(run, o.config));
    return std::move(run.series);
  }
  const fs::path features = o.config.out / "features.csv";
  if (!fs::exists(features)) {
    throw marketnet::InputError("no input: pass --prices, --features, or run `network` into --out first");
  }
  return marketnet::cli::read_feature_series(features, o.node_metrics.value_or(o.config.out / "node_metrics.csv"));
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

int report(const fs::path& out) {
  bool any = false;
  if (const fs::path p = out / "network_summary.json"; fs::exists(p)) {
    const auto j = read_json(p);
    std::cout << "network: " << j["windows"] << " windows, " << j["stocks"] << " stocks, " << j["dropped_tickers"]
              << " dropped, " << j["discarded_rows"] << " trailing rows discarded, " << j["rho_fallback_windows"]
              << " threshold fallbacks\n";
    any = true;
  }
  if (const fs::path p = out / "granger.json"; fs::exists(p)) {
    const auto j = read_json(p);
    std::cout << "granger (max lag " << j["max_lag"] << ", target " << j["target"].get<std::string>() << "):\n";
    for (const auto& r : j["results"]) {
      std::cout << "  " << r["variable"].get<std::string>();
      if (r["untestable"].get<bool>()) {
        std::cout << ": untestable\n";
      } else {
        std::cout << ": best lag " << r["best_lag"] << ", p = " << r["p"].get<double>()
                  << (r["significant"].get<bool>() ? " *" : "") << '\n';
      }
    }
    any = true;
  }
  if (const fs::path p = out / "forecast_report.json"; fs::exists(p)) {
    const auto j = read_json(p);
    const auto& s = j["summary"];
    std::cout << "forecast (W = " << j["dataset"]["smoothing_window"] << ", Nlag = " << j["dataset"]["nlag"]
              << ", " << j["dataset"]["selected_columns"] << " selected columns), baseline "
              << s["baseline_model"].get<std::string>() << ":\n";
    for (const auto& m : s["models"]) {
      std::cout << "  " << m["model"].get<std::string>() << ": median R2 " << m["median_r2"].get<double>()
                << ", median MAE " << m["median_mae"].get<double>();
      if (!m["improvement"].is_null()) std::cout << ", improvement " << m["improvement"].get<double>();
      std::cout << '\n';
    }
    any = true;
  }
  if (!any) {
    std::cerr << "marketnet: error: no reports found in " << out << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlation-network analysis and return forecasting for stock panels"};
  app.set_version_flag("--version", marketnet::cli::tool_version());
  app.require_subcommand(1);

  Options network_opts;
  auto* network = app.add_subcommand("network", "Build per-window graphs and write features.csv");
  add_pipeline_options(*network, network_opts, true);
  network->add_flag("--export-graphs", network_opts.config.export_graphs, "Also write node-link JSON per window");

  Options granger_opts;
  auto* granger = app.add_subcommand("granger", "Granger tests of the network variables against the market return");
  add_pipeline_options(*granger, granger_opts, false);
  add_forecast_options(*granger, granger_opts);
  granger->add_option("--max-lag", granger_opts.config.max_lag, "Largest lag tested (default 5 long, 12 short)")
      ->check(CLI::PositiveNumber);

  Options forecast_opts;
  auto* forecast = app.add_subcommand("forecast", "Fit and score the five forecasting models");
  add_pipeline_options(*forecast, forecast_opts, false);
  add_forecast_options(*forecast, forecast_opts);

  Options export_opts;
  auto* export_graph = app.add_subcommand("export-graph", "Write node-link JSON graphs");
  add_pipeline_options(*export_graph, export_opts, true);
  export_graph->add_option("--window", export_opts.config.export_window, "Only this window index");

  fs::path report_dir = "marketnet_out";
  auto* report_cmd = app.add_subcommand("report", "Summarize the reports found in an output directory");
  report_cmd->add_option("--out", report_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
    for (Options* o : {&network_opts, &granger_opts, &forecast_opts, &export_opts}) finalize(*o);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "marketnet: usage error: " << e.what() << '\n';
    return 2;
  }

  using namespace marketnet::cli;
  try {
    if (*network) {
      const auto& c = network_opts.config;
      write_artifacts(c.out, network_artifacts(run_network(c), c));
    } else if (*granger) {
      const auto series = load_series(granger_opts);
      write_artifacts(granger_opts.config.out,
                      granger_artifacts(run_granger(series.global, granger_opts.config), granger_opts.config));
    } else if (*forecast) {
      const auto series = load_series(forecast_opts);
      const auto& c = forecast_opts.config;
      write_artifacts(c.out, forecast_artifacts(run_forecast(series, c), c));
    } else if (*export_graph) {
      const auto& c = export_opts.config;
      const NetworkRun run = run_network(c);
      Artifacts artifacts;
      for (std::size_t k = 0; k < run.windows.size(); ++k) {
        if (c.export_window && *c.export_window != k) continue;
        char name[48];
        std::snprintf(name, sizeof name, "graphs/window_%04zu.json", k);
        artifacts[name] = graph_json(run, k, c).dump(2) + "\n";
      }
      if (artifacts.empty()) {
        throw marketnet::InputError("window " + std::to_string(*c.export_window) + " out of range (" +
                                    std::to_string(run.windows.size()) + " windows)");
      }
      write_artifacts(c.out, artifacts);
    } else if (*report_cmd) {
      return report(report_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "marketnet: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
