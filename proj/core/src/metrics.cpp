#include "marketnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "marketnet/error.hpp"
#include "marketnet/parallel.hpp"
#include "marketnet/rng.hpp"
#include "marketnet/stats.hpp"

namespace marketnet {
namespace {

constexpr std::size_t kUnreached = static_cast<std::size_t>(-1);

// Hop distances from `source`; kUnreached for other components.
std::vector<std::size_t> bfs_distances(const StockGraph& g, std::size_t source) {
  std::vector<std::size_t> dist(g.node_count(), kUnreached);
  std::queue<std::size_t> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (const Neighbor& nb : g.neighbors(u)) {
      if (dist[nb.node] == kUnreached) {
        dist[nb.node] = dist[u] + 1;
        frontier.push(nb.node);
      }
    }
  }
  return dist;
}

// Single-source Brandes dependency accumulation; delta[v] for v != source.
std::vector<double> source_dependencies(const StockGraph& g, std::size_t source) {
  const std::size_t n = g.node_count();
  std::vector<double> sigma(n, 0.0);
  std::vector<double> delta(n, 0.0);
  std::vector<std::size_t> dist(n, kUnreached);
  std::vector<std::vector<std::size_t>> preds(n);
  std::vector<std::size_t> order;
  order.reserve(n);

  std::queue<std::size_t> frontier;
  sigma[source] = 1.0;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const std::size_t v = frontier.front();
    frontier.pop();
    order.push_back(v);
    for (const Neighbor& nb : g.neighbors(v)) {
      const std::size_t w = nb.node;
      if (dist[w] == kUnreached) {
        dist[w] = dist[v] + 1;
        frontier.push(w);
      }
      if (dist[w] == dist[v] + 1) {
        sigma[w] += sigma[v];
        preds[w].push_back(v);
      }
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t w = *it;
    for (std::size_t v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
  }
  delta[source] = 0.0;
  return delta;
}

// Weighted graph used by the Louvain levels; self_loop[i] is A_ii.
struct LevelGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> neighbors;
  std::vector<double> self_loop;
  std::vector<double> degree;
  double total = 0.0;  // sum of degrees = 2m

  std::size_t size() const { return neighbors.size(); }
};

LevelGraph level_from(const StockGraph& g) {
  LevelGraph level;
  const std::size_t n = g.node_count();
  level.neighbors.resize(n);
  level.self_loop.assign(n, 0.0);
  level.degree.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const Neighbor& nb : g.neighbors(i)) level.neighbors[i].emplace_back(nb.node, 1.0);
    level.degree[i] = static_cast<double>(g.degree(i));
  }
  level.total = std::accumulate(level.degree.begin(), level.degree.end(), 0.0);
  return level;
}

// One round of local moving; returns true if any node changed community.
bool local_moves(const LevelGraph& level, std::vector<std::size_t>& community, Rng& rng) {
  const std::size_t n = level.size();
  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) tot[community[i]] += level.degree[i];

  std::vector<std::size_t> visit(n);
  std::iota(visit.begin(), visit.end(), 0);
  rng.shuffle(std::span<std::size_t>(visit));

  std::vector<double> link_weight(n, 0.0);
  std::vector<std::size_t> touched;
  constexpr double kMinGain = 1e-12;
  bool any_moved = false;
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i : visit) {
      const double k_i = level.degree[i];
      if (k_i == 0.0) continue;
      const std::size_t own = community[i];
      touched.clear();
      link_weight[own] = 0.0;
      touched.push_back(own);
      for (const auto& [j, w] : level.neighbors[i]) {
        const std::size_t c = community[j];
        if (link_weight[c] == 0.0 && std::find(touched.begin(), touched.end(), c) == touched.end()) {
          touched.push_back(c);
        }
        link_weight[c] += w;
      }
      tot[own] -= k_i;
      const double scale = k_i / level.total;
      std::size_t best = own;
      double best_gain = link_weight[own] - tot[own] * scale;
      for (std::size_t c : touched) {
        const double gain = link_weight[c] - tot[c] * scale;
        if (gain > best_gain + kMinGain) {
          best_gain = gain;
          best = c;
        }
      }
      tot[best] += k_i;
      community[i] = best;
      if (best != own) {
        improved = true;
        any_moved = true;
      }
      for (std::size_t c : touched) link_weight[c] = 0.0;
    }
  }
  return any_moved;
}

// Renumbers ids by first appearance; returns the community count.
std::size_t relabel(std::vector<std::size_t>& community) {
  std::vector<std::size_t> map(community.size(), kUnreached);
  std::size_t next = 0;
  for (std::size_t& c : community) {
    if (map[c] == kUnreached) map[c] = next++;
    c = map[c];
  }
  return next;
}

LevelGraph aggregate(const LevelGraph& level, const std::vector<std::size_t>& community, std::size_t count) {
  LevelGraph next;
  next.neighbors.resize(count);
  next.self_loop.assign(count, 0.0);
  next.degree.assign(count, 0.0);
  next.total = level.total;
  std::vector<std::vector<double>> weights(count);
  for (auto& row : weights) row.assign(count, 0.0);
  for (std::size_t i = 0; i < level.size(); ++i) {
    const std::size_t ci = community[i];
    next.degree[ci] += level.degree[i];
    next.self_loop[ci] += level.self_loop[i];
    for (const auto& [j, w] : level.neighbors[i]) weights[ci][community[j]] += w;
  }
  for (std::size_t a = 0; a < count; ++a) {
    next.self_loop[a] += weights[a][a];
    for (std::size_t b = 0; b < count; ++b) {
      if (a != b && weights[a][b] != 0.0) next.neighbors[a].emplace_back(b, weights[a][b]);
    }
  }
  return next;
}

}  // namespace

std::vector<std::size_t> degree(const StockGraph& g) {
  std::vector<std::size_t> out(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) out[i] = g.degree(i);
  return out;
}

std::vector<double> degree_centrality(const StockGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(g.degree(i)) / static_cast<double>(n - 1);
  return out;
}

std::vector<double> closeness(const StockGraph& g) {
  std::vector<double> out(g.node_count(), 0.0);
  parallel_for(g.node_count(), [&](std::size_t u) {
    const auto dist = bfs_distances(g, u);
    std::size_t total = 0;
    for (std::size_t d : dist) {
      if (d != kUnreached) total += d;
    }
    out[u] = total > 0 ? 1.0 / static_cast<double>(total) : 0.0;
  });
  return out;
}

std::vector<double> betweenness(const StockGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<double>> per_source(n);
  parallel_for(n, [&](std::size_t s) { per_source[s] = source_dependencies(g, s); });
  std::vector<double> out(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t v = 0; v < n; ++v) out[v] += per_source[s][v];
  }
  // Every unordered pair was accumulated from both endpoints.
  for (double& b : out) b *= 0.5;
  return out;
}

EigenvectorResult eigenvector_centrality(const StockGraph& g, const EigenvectorOptions& options) {
  if (g.edge_count() == 0) throw InputError("eigenvector centrality of an edgeless graph");
  const std::size_t n = g.node_count();

  auto iterate = [&](double diagonal, std::size_t max_iterations, EigenvectorResult& result) {
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> next(n);
    for (std::size_t it = 1; it <= max_iterations; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        double sum = diagonal * x[i];
        for (const Neighbor& nb : g.neighbors(i)) sum += x[nb.node];
        next[i] = sum;
      }
      double norm = 0.0;
      for (double v : next) norm += v * v;
      norm = std::sqrt(norm);
      double change = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        next[i] /= norm;
        change += (next[i] - x[i]) * (next[i] - x[i]);
      }
      x.swap(next);
      result.iterations = it;
      if (std::sqrt(change) < options.tolerance) {
        result.converged = true;
        break;
      }
    }
    result.values = std::move(x);
  };

  EigenvectorResult result;
  iterate(0.0, options.max_iterations, result);
  if (!result.converged) {
    result = EigenvectorResult{};
    result.shifted = true;
    iterate(1.0, options.max_shifted_iterations, result);
  }
  double rayleigh = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    result.values[i] = std::abs(result.values[i]);
    for (const Neighbor& nb : g.neighbors(i)) rayleigh += result.values[i] * std::abs(result.values[nb.node]);
  }
  result.eigenvalue = rayleigh;
  return result;
}

std::vector<double> weighted_clustering(const StockGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nbrs = g.neighbors(i);
    const std::size_t k = nbrs.size();
    if (k < 2) continue;
    double strength = 0.0;
    for (const Neighbor& nb : nbrs) strength += std::abs(nb.weight);
    if (strength == 0.0) continue;
    double sum = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        if (g.has_edge(nbrs[a].node, nbrs[b].node)) {
          // Ordered pairs (j, h) and (h, j) each contribute half the sum.
          sum += std::abs(nbrs[a].weight) + std::abs(nbrs[b].weight);
        }
      }
    }
    out[i] = sum / (strength * static_cast<double>(k - 1));
  }
  return out;
}

double modularity(const StockGraph& g, const Partition& p) {
  const std::size_t n = g.node_count();
  if (p.community.size() != n) throw InputError("partition does not cover the graph's nodes");
  for (std::size_t c : p.community) {
    if (c >= p.count) throw InputError("partition community id out of range");
  }
  const double m = static_cast<double>(g.edge_count());
  if (m == 0.0) return 0.0;
  std::vector<double> internal(p.count, 0.0);
  std::vector<double> degree_sum(p.count, 0.0);
  for (const Edge& e : g.edges()) {
    if (p.community[e.source] == p.community[e.target]) internal[p.community[e.source]] += 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) degree_sum[p.community[i]] += static_cast<double>(g.degree(i));
  double q = 0.0;
  for (std::size_t c = 0; c < p.count; ++c) {
    const double share = degree_sum[c] / (2.0 * m);
    q += internal[c] / m - share * share;
  }
  return q;
}

Partition louvain_partition(const StockGraph& g, std::uint64_t seed) {
  const std::size_t n = g.node_count();
  Partition result;
  result.community.resize(n);
  std::iota(result.community.begin(), result.community.end(), 0);
  result.count = n;
  if (g.edge_count() == 0) return result;

  Rng rng(seed);
  LevelGraph level = level_from(g);
  std::vector<std::size_t> node_to_level(n);
  std::iota(node_to_level.begin(), node_to_level.end(), 0);
  for (;;) {
    std::vector<std::size_t> community(level.size());
    std::iota(community.begin(), community.end(), 0);
    if (!local_moves(level, community, rng)) break;
    const std::size_t count = relabel(community);
    for (std::size_t& c : node_to_level) c = community[c];
    if (count == level.size()) break;
    level = aggregate(level, community, count);
  }
  result.community = node_to_level;
  result.count = relabel(result.community);
  return result;
}

std::vector<std::size_t> connected_components(const StockGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::size_t> label(n, kUnreached);
  std::size_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] != kUnreached) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (const Neighbor& nb : g.neighbors(u)) {
        if (label[nb.node] == kUnreached) {
          label[nb.node] = next;
          stack.push_back(nb.node);
        }
      }
    }
    ++next;
  }
  return label;
}

std::size_t largest_component(const StockGraph& g) {
  if (g.node_count() == 0) return 0;
  const auto label = connected_components(g);
  std::vector<std::size_t> sizes(*std::max_element(label.begin(), label.end()) + 1, 0);
  for (std::size_t c : label) ++sizes[c];
  return *std::max_element(sizes.begin(), sizes.end());
}

double resilience(const StockGraph& g, double fraction) {
  const std::size_t n = g.node_count();
  if (n == 0) throw InputError("resilience of an empty graph");
  if (!(fraction >= 0.0 && fraction < 1.0)) throw InputError("resilience fraction must lie in [0, 1)");
  // The small offset keeps products such as 0.29 * 100 from flooring to 28.
  const auto removed = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return g.degree(a) > g.degree(b); });
  std::vector<bool> keep(n, true);
  for (std::size_t k = 0; k < removed; ++k) keep[order[k]] = false;
  const StockGraph rest = g.induced_subgraph(keep);
  return static_cast<double>(largest_component(rest)) / static_cast<double>(n);
}

const std::array<std::string_view, GlobalFeatures::kNetworkVariables>& GlobalFeatures::keys() {
  static const std::array<std::string_view, kNetworkVariables> names = {
      "p90_degree",      "mean_closeness",      "mean_betweenness",  "mean_eigenvector", "mean_clustering",
      "max_eigenvalue", "community_stability", "largest_component", "resilience"};
  return names;
}

const std::array<std::string_view, GlobalFeatures::kNetworkVariables>& GlobalFeatures::display_names() {
  static const std::array<std::string_view, kNetworkVariables> names = {
      "90th Percentile Degree",       "Mean Closeness Centrality", "Mean Betweenness Centrality",
      "Mean Eigenvector Centrality",  "Mean Clustering",           "Max Eigenvalue Stock Returns",
      "Community Stability",          "Largest Component",         "Resilience"};
  return names;
}

std::array<double, GlobalFeatures::kNetworkVariables> GlobalFeatures::network_values() const {
  return {p90_degree,       mean_closeness,      mean_betweenness, mean_eigenvector, mean_clustering, max_eigenvalue, community_stability,
          largest_component, resilience};
}

double upper_percentile_mean_degree(std::span<const std::size_t> degrees, double percentile) {
  if (degrees.empty()) return 0.0;
  std::vector<double> values(degrees.begin(), degrees.end());
  const double cut = stats::percentile(values, percentile);
  double sum = 0.0;
  std::size_t count = 0;
  for (double v : values) {
    if (v >= cut) {
      sum += v;
      ++count;
    }
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

NodeMetrics node_metrics(const StockGraph& g) {
  NodeMetrics m;
  m.degree = degree(g);
  m.degree_centrality = degree_centrality(g);
  m.closeness = closeness(g);
  m.betweenness = betweenness(g);
  m.clustering = weighted_clustering(g);
  if (g.edge_count() == 0) {
    m.eigenvector.assign(g.node_count(), 0.0);
  } else {
    auto eig = eigenvector_centrality(g);
    m.eigenvector = std::move(eig.values);
    m.eigenvector_shifted = eig.shifted;
    m.eigenvector_converged = eig.converged;
  }
  return m;
}

NetworkSnapshot analyze_network(const StockGraph& g, const CorrelationMatrix& corr, const ReturnMatrix& returns,
                                const GlobalFeatureOptions& options) {
  if (corr.size() != g.node_count() || returns.cols() != g.node_count()) {
    throw InputError("graph, correlation and return matrices disagree on the node count");
  }
  NetworkSnapshot snap;
  snap.nodes = node_metrics(g);
  snap.partition = louvain_partition(g, options.louvain_seed);

  GlobalFeatures& f = snap.global;
  f.p90_degree = upper_percentile_mean_degree(snap.nodes.degree, options.degree_percentile);
  f.mean_closeness = stats::mean(snap.nodes.closeness);
  f.mean_betweenness = stats::mean(snap.nodes.betweenness);
  f.mean_eigenvector = stats::mean(snap.nodes.eigenvector);
  f.mean_clustering = stats::mean(snap.nodes.clustering);
  f.max_eigenvalue = max_eigenvalue(corr);
  f.community_stability = modularity(g, snap.partition);
  f.largest_component = static_cast<double>(largest_component(g));
  f.resilience = resilience(g, options.resilience_fraction);
  f.market_log_return = market_log_return(returns);
  return snap;
}

}  // namespace marketnet
