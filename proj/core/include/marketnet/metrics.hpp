#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "marketnet/graph.hpp"
#include "marketnet/returns.hpp"

namespace marketnet {

// k_i = number of incident edges.
std::vector<std::size_t> degree(const StockGraph& g);

// k_i / (n - 1); zero for single-node graphs.
std::vector<double> degree_centrality(const StockGraph& g);

// 1 / (sum of hop distances to the nodes reachable from u); 0 when isolated.
std::vector<double> closeness(const StockGraph& g);

// Unnormalized betweenness over unordered pairs {s, t}, hop-count geodesics
// (Brandes accumulation).
std::vector<double> betweenness(const StockGraph& g);

struct EigenvectorOptions {
  double tolerance = 1e-10;  // L2 distance between successive iterates
  std::size_t max_iterations = 1000;
  std::size_t max_shifted_iterations = 10000;
};

struct EigenvectorResult {
  std::vector<double> values;  // non-negative, unit L2 norm
  double eigenvalue = 0.0;     // Rayleigh quotient on the 0/1 adjacency
  std::size_t iterations = 0;
  bool shifted = false;        // plain iteration failed; iterated on A + I
  bool converged = false;
};

// Principal eigenvector of the 0/1 adjacency by power iteration. Throws
// InputError on an edgeless graph.
EigenvectorResult eigenvector_centrality(const StockGraph& g, const EigenvectorOptions& options = {});

// Barrat weighted clustering on |w|; nodes with fewer than two neighbours get 0.
std::vector<double> weighted_clustering(const StockGraph& g);

struct Partition {
  std::vector<std::size_t> community;  // ids 0..count-1
  std::size_t count = 0;
};

// Newman modularity on the 0/1 adjacency; 0 for an edgeless graph.
double modularity(const StockGraph& g, const Partition& p);

// Two-phase Louvain on the 0/1 adjacency. Node visit order in each local
// moving pass is shuffled with `seed`. Community ids are numbered by first
// appearance in node order.
Partition louvain_partition(const StockGraph& g, std::uint64_t seed);

// Component label per node, labels numbered by first appearance.
std::vector<std::size_t> connected_components(const StockGraph& g);

// Size of the largest connected component (1 for a non-empty edgeless graph).
std::size_t largest_component(const StockGraph& g);

// Removes floor(f * |V|) nodes in decreasing degree order (ties: lower index
// first) and returns |largest component| / original |V|.
double resilience(const StockGraph& g, double fraction);

struct NodeMetrics {
  std::vector<std::size_t> degree;
  std::vector<double> degree_centrality;
  std::vector<double> closeness;
  std::vector<double> betweenness;
  std::vector<double> eigenvector;
  std::vector<double> clustering;
  bool eigenvector_shifted = false;
  bool eigenvector_converged = true;
};

// All node-level metrics. Edgeless graphs get all-zero eigenvector scores.
NodeMetrics node_metrics(const StockGraph& g);

struct GlobalFeatures {
  double p90_degree = 0.0;
  double mean_closeness = 0.0;
  double mean_betweenness = 0.0;
  double mean_eigenvector = 0.0;
  double mean_clustering = 0.0;
  double max_eigenvalue = 0.0;
  double community_stability = 0.0;
  double largest_component = 0.0;
  double resilience = 0.0;
  double market_log_return = 0.0;

  static constexpr std::size_t kNetworkVariables = 9;
  // Column keys of the nine network variables, in CSV order.
  static const std::array<std::string_view, kNetworkVariables>& keys();
  // Human-readable names used in forecasting column names.
  static const std::array<std::string_view, kNetworkVariables>& display_names();
  std::array<double, kNetworkVariables> network_values() const;
};

struct GlobalFeatureOptions {
  std::uint64_t louvain_seed = 42;
  double resilience_fraction = 0.1;
  double degree_percentile = 90.0;
};

// Mean degree of the nodes whose degree is at or above the given percentile.
double upper_percentile_mean_degree(std::span<const std::size_t> degrees, double percentile = 90.0);

struct NetworkSnapshot {
  NodeMetrics nodes;
  Partition partition;
  GlobalFeatures global;
};

// Node metrics, Louvain partition and global features for one window.
NetworkSnapshot analyze_network(const StockGraph& g, const CorrelationMatrix& corr,
                                const ReturnMatrix& returns, const GlobalFeatureOptions& options = {});

inline GlobalFeatures global_features(const StockGraph& g, const CorrelationMatrix& corr,
                                      const ReturnMatrix& returns,
                                      const GlobalFeatureOptions& options = {}) {
  return analyze_network(g, corr, returns, options).global;
}

}  // namespace marketnet
