#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "marketnet/returns.hpp"

namespace marketnet {

struct Edge {
  std::size_t source = 0;  // source < target
  std::size_t target = 0;
  double weight = 0.0;     // signed correlation
};

struct Neighbor {
  std::size_t node = 0;
  double weight = 0.0;
};

// Undirected weighted graph over a fixed, ordered node set. Isolated nodes
// are kept; edges are unique unordered pairs without self-loops.
class StockGraph {
 public:
  StockGraph() = default;

  // Throws InputError on self-loops, duplicate pairs or out-of-range nodes.
  StockGraph(std::vector<std::string> tickers, std::vector<Edge> edges, double threshold);

  // Unlabelled graph ("0", "1", ...) from an edge list; handy for tests.
  static StockGraph from_edges(std::size_t node_count, std::span<const Edge> edges,
                               double threshold = 0.0);

  std::size_t node_count() const { return tickers_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<std::string>& tickers() const { return tickers_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const Neighbor> neighbors(std::size_t node) const { return adjacency_[node]; }
  std::size_t degree(std::size_t node) const { return adjacency_[node].size(); }
  bool has_edge(std::size_t a, std::size_t b) const;
  std::optional<double> weight(std::size_t a, std::size_t b) const;
  double threshold() const { return threshold_; }

  // Graph restricted to the nodes with keep[i] == true, renumbered in order.
  StockGraph induced_subgraph(const std::vector<bool>& keep) const;

 private:
  std::vector<std::string> tickers_;
  std::vector<Edge> edges_;                       // sorted by (source, target)
  std::vector<std::vector<Neighbor>> adjacency_;  // sorted by neighbor index
  double threshold_ = 0.0;
};

// Keeps (i, j), i != j, iff |C_ij| >= rho, with weight C_ij.
StockGraph threshold_adjacency(const CorrelationMatrix& corr, double rho);

// Degree histogram bin [lower, upper) with edges at powers of two.
struct LogBin {
  std::size_t lower = 1;
  std::size_t upper = 2;
  std::size_t count = 0;
  double center() const;  // geometric centre sqrt(lower * upper)
};

// Histogram of the positive degrees over power-of-two bins; only populated
// bins are returned, in increasing degree order.
std::vector<LogBin> log_binned_degrees(std::span<const std::size_t> degrees);

// Leading coefficient of the least-squares parabola through
// (ln centre, ln count) of the populated bins; nullopt with fewer than three.
std::optional<double> log_log_curvature(std::span<const LogBin> bins);

struct ThresholdScanPoint {
  double rho = 0.0;
  std::size_t populated_bins = 0;
  std::optional<double> curvature;
  bool convex = false;
};

struct ThresholdSelection {
  double rho = 0.9;
  bool fallback = false;  // no grid point qualified
  std::vector<ThresholdScanPoint> scan;
};

struct ThresholdScanOptions {
  double grid_step = 0.005;
  double lower = 0.5;
  double upper = 0.99;
  double fallback_rho = 0.9;
};

// Smallest grid threshold whose log-binned degree distribution is convex
// (curvature >= 0). Requires at least 10 nodes.
ThresholdSelection select_threshold(const CorrelationMatrix& corr,
                                    const ThresholdScanOptions& options = {});

}  // namespace marketnet
