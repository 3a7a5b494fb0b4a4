#include "marketnet/graph.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "marketnet/error.hpp"
#include "marketnet/parallel.hpp"

namespace marketnet {

StockGraph::StockGraph(std::vector<std::string> tickers, std::vector<Edge> edges, double threshold)
    : tickers_(std::move(tickers)), edges_(std::move(edges)), threshold_(threshold) {
  const std::size_t n = tickers_.size();
  for (Edge& e : edges_) {
    if (e.source >= n || e.target >= n) throw InputError("edge endpoint out of range");
    if (e.source == e.target) throw InputError("self-loop on node " + tickers_[e.source]);
    if (e.source > e.target) std::swap(e.source, e.target);
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.source != b.source ? a.source < b.source : a.target < b.target;
  });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (edges_[k].source == edges_[k - 1].source && edges_[k].target == edges_[k - 1].target) {
      throw InputError("duplicate edge " + tickers_[edges_[k].source] + "-" + tickers_[edges_[k].target]);
    }
  }
  adjacency_.assign(n, {});
  for (const Edge& e : edges_) {
    adjacency_[e.source].push_back({e.target, e.weight});
    adjacency_[e.target].push_back({e.source, e.weight});
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
  }
}

StockGraph StockGraph::from_edges(std::size_t node_count, std::span<const Edge> edges, double threshold) {
  std::vector<std::string> names;
  names.reserve(node_count);
  for (std::size_t i = 0; i < node_count; ++i) names.push_back(std::to_string(i));
  return StockGraph(std::move(names), std::vector<Edge>(edges.begin(), edges.end()), threshold);
}

bool StockGraph::has_edge(std::size_t a, std::size_t b) const { return weight(a, b).has_value(); }

std::optional<double> StockGraph::weight(std::size_t a, std::size_t b) const {
  const auto& list = adjacency_.at(a);
  auto it = std::lower_bound(list.begin(), list.end(), b,
                             [](const Neighbor& nb, std::size_t node) { return nb.node < node; });
  if (it == list.end() || it->node != b) return std::nullopt;
  return it->weight;
}

StockGraph StockGraph::induced_subgraph(const std::vector<bool>& keep) const {
  if (keep.size() != node_count()) throw InputError("induced_subgraph: mask size mismatch");
  std::vector<std::size_t> remap(node_count(), 0);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < node_count(); ++i) {
    if (keep[i]) {
      remap[i] = names.size();
      names.push_back(tickers_[i]);
    }
  }
  std::vector<Edge> kept;
  for (const Edge& e : edges_) {
    if (keep[e.source] && keep[e.target]) kept.push_back({remap[e.source], remap[e.target], e.weight});
  }
  return StockGraph(std::move(names), std::move(kept), threshold_);
}

StockGraph threshold_adjacency(const CorrelationMatrix& corr, double rho) {
  const std::size_t n = corr.size();
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = corr.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (std::abs(c) >= rho) edges.push_back({i, j, c});
    }
  }
  return StockGraph(corr.tickers, std::move(edges), rho);
}

double LogBin::center() const { return std::sqrt(static_cast<double>(lower) * static_cast<double>(upper)); }

std::vector<LogBin> log_binned_degrees(std::span<const std::size_t> degrees) {
  std::vector<LogBin> bins;
  for (std::size_t k : degrees) {
    if (k == 0) continue;
    std::size_t index = 0;
    while ((std::size_t{2} << index) <= k) ++index;
    if (bins.size() <= index) {
      for (std::size_t b = bins.size(); b <= index; ++b) bins.push_back({std::size_t{1} << b, std::size_t{2} << b, 0});
    }
    ++bins[index].count;
  }
  std::erase_if(bins, [](const LogBin& b) { return b.count == 0; });
  return bins;
}

std::optional<double> log_log_curvature(std::span<const LogBin> bins) {
  if (bins.size() < 3) return std::nullopt;
  const auto m = static_cast<Eigen::Index>(bins.size());
  Eigen::MatrixXd design(m, 3);
  Eigen::VectorXd target(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = std::log(bins[static_cast<std::size_t>(i)].center());
    design(i, 0) = 1.0;
    design(i, 1) = x;
    design(i, 2) = x * x;
    target[i] = std::log(static_cast<double>(bins[static_cast<std::size_t>(i)].count));
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(target);
  return coef[2];
}

ThresholdSelection select_threshold(const CorrelationMatrix& corr, const ThresholdScanOptions& options) {
  const std::size_t n = corr.size();
  if (n < 10) throw InputError("threshold selection needs at least 10 nodes");
  if (!(options.grid_step > 0.0)) throw InputError("threshold grid step must be positive");

  std::vector<double> grid;
  for (std::size_t k = 0;; ++k) {
    const double rho = options.lower + static_cast<double>(k) * options.grid_step;
    if (rho > options.upper + 1e-12) break;
    grid.push_back(rho);
  }

  ThresholdSelection selection;
  selection.scan.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) {
    std::vector<std::size_t> degrees(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (std::abs(corr.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) >= grid[k]) {
          ++degrees[i];
          ++degrees[j];
        }
      }
    }
    const auto bins = log_binned_degrees(degrees);
    ThresholdScanPoint& point = selection.scan[k];
    point.rho = grid[k];
    point.populated_bins = bins.size();
    point.curvature = log_log_curvature(bins);
    point.convex = point.curvature.has_value() && *point.curvature >= 0.0;
  });

  auto first = std::find_if(selection.scan.begin(), selection.scan.end(),
                            [](const ThresholdScanPoint& p) { return p.convex; });
  if (first == selection.scan.end()) {
    selection.rho = options.fallback_rho;
    selection.fallback = true;
  } else {
    selection.rho = first->rho;
  }
  return selection;
}

}  // namespace marketnet
