// Brute-force reference implementations used only by the tests. Each one
// takes a different route from the library code it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "marketnet/graph.hpp"

namespace oracle {

inline constexpr int kInf = std::numeric_limits<int>::max() / 4;

// Dense 0/1 adjacency and |w| weight matrices.
struct Dense {
  std::size_t n = 0;
  std::vector<std::vector<int>> a;
  std::vector<std::vector<double>> w;
};

inline Dense dense(const marketnet::StockGraph& g) {
  Dense d;
  d.n = g.node_count();
  d.a.assign(d.n, std::vector<int>(d.n, 0));
  d.w.assign(d.n, std::vector<double>(d.n, 0.0));
  for (const auto& e : g.edges()) {
    d.a[e.source][e.target] = d.a[e.target][e.source] = 1;
    d.w[e.source][e.target] = d.w[e.target][e.source] = std::abs(e.weight);
  }
  return d;
}

// Erdos-Renyi graph with random signed weights in (0.1, 1) magnitude.
inline marketnet::StockGraph random_graph(std::uint64_t seed, std::size_t n, double p) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<marketnet::Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (u(gen) < p) {
        const double mag = 0.1 + 0.9 * u(gen);
        edges.push_back({i, j, u(gen) < 0.8 ? mag : -mag});
      }
  return marketnet::StockGraph::from_edges(n, edges);
}

inline std::vector<std::vector<int>> floyd_warshall(const Dense& d) {
  std::vector<std::vector<int>> dist(d.n, std::vector<int>(d.n, kInf));
  for (std::size_t i = 0; i < d.n; ++i) {
    dist[i][i] = 0;
    for (std::size_t j = 0; j < d.n; ++j)
      if (d.a[i][j]) dist[i][j] = 1;
  }
  for (std::size_t k = 0; k < d.n; ++k)
    for (std::size_t i = 0; i < d.n; ++i)
      for (std::size_t j = 0; j < d.n; ++j)
        if (dist[i][k] + dist[k][j] < dist[i][j]) dist[i][j] = dist[i][k] + dist[k][j];
  return dist;
}

inline std::vector<double> closeness(const Dense& d) {
  const auto dist = floyd_warshall(d);
  std::vector<double> c(d.n, 0.0);
  for (std::size_t u = 0; u < d.n; ++u) {
    long total = 0;
    for (std::size_t v = 0; v < d.n; ++v)
      if (v != u && dist[u][v] < kInf) total += dist[u][v];
    c[u] = total > 0 ? 1.0 / static_cast<double>(total) : 0.0;
  }
  return c;
}

// Shortest-path counts from the distance matrix: sigma(s,t) sums
// sigma(s,v) over predecessors v of t. Betweenness counts each unordered
// pair once.
inline std::vector<double> betweenness(const Dense& d) {
  const auto dist = floyd_warshall(d);
  const std::size_t n = d.n;
  std::vector<std::vector<double>> sigma(n, std::vector<double>(n, 0.0));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[s][a] < dist[s][b]; });
    sigma[s][s] = 1.0;
    for (std::size_t t : order) {
      if (t == s || dist[s][t] >= kInf) continue;
      for (std::size_t v = 0; v < n; ++v)
        if (d.a[v][t] && dist[s][v] + 1 == dist[s][t]) sigma[s][t] += sigma[s][v];
    }
  }
  std::vector<double> bc(n, 0.0);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t t = s + 1; t < n; ++t) {
      if (dist[s][t] >= kInf) continue;
      for (std::size_t v = 0; v < n; ++v) {
        if (v == s || v == t) continue;
        if (dist[s][v] + dist[v][t] == dist[s][t]) bc[v] += sigma[s][v] * sigma[v][t] / sigma[s][t];
      }
    }
  return bc;
}

// Barrat clustering by enumerating ordered neighbour pairs.
inline std::vector<double> barrat_clustering(const Dense& d) {
  std::vector<double> c(d.n, 0.0);
  for (std::size_t i = 0; i < d.n; ++i) {
    double strength = 0.0;
    int k = 0;
    for (std::size_t j = 0; j < d.n; ++j)
      if (d.a[i][j]) {
        strength += d.w[i][j];
        ++k;
      }
    if (k < 2) continue;
    double sum = 0.0;
    for (std::size_t j = 0; j < d.n; ++j)
      for (std::size_t h = 0; h < d.n; ++h)
        if (j != h && d.a[i][j] && d.a[i][h] && d.a[j][h]) sum += (d.w[i][j] + d.w[i][h]) / 2.0;
    c[i] = sum / (strength * (k - 1));
  }
  return c;
}

// Q = 1/(2m) sum_ij [A_ij - k_i k_j / (2m)] delta(c_i, c_j).
inline double modularity(const Dense& d, const std::vector<std::size_t>& community) {
  double two_m = 0.0;
  std::vector<double> k(d.n, 0.0);
  for (std::size_t i = 0; i < d.n; ++i)
    for (std::size_t j = 0; j < d.n; ++j) {
      k[i] += d.a[i][j];
      two_m += d.a[i][j];
    }
  if (two_m == 0.0) return 0.0;
  double q = 0.0;
  for (std::size_t i = 0; i < d.n; ++i)
    for (std::size_t j = 0; j < d.n; ++j)
      if (community[i] == community[j]) q += d.a[i][j] - k[i] * k[j] / two_m;
  return q / two_m;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

inline std::size_t largest_component(const Dense& d, const std::vector<bool>& alive) {
  UnionFind uf(d.n);
  for (std::size_t i = 0; i < d.n; ++i)
    for (std::size_t j = i + 1; j < d.n; ++j)
      if (alive[i] && alive[j] && d.a[i][j]) uf.unite(i, j);
  std::vector<std::size_t> size(d.n, 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < d.n; ++i)
    if (alive[i]) best = std::max(best, ++size[uf.find(i)]);
  return best;
}

// Scripted removal: repeatedly pick the highest original-degree survivor.
inline double resilience(const Dense& d, double f) {
  const auto removals = static_cast<std::size_t>(std::floor(f * static_cast<double>(d.n) + 1e-9));
  std::vector<int> degree(d.n, 0);
  for (std::size_t i = 0; i < d.n; ++i)
    for (std::size_t j = 0; j < d.n; ++j) degree[i] += d.a[i][j];
  std::vector<bool> alive(d.n, true);
  for (std::size_t r = 0; r < removals; ++r) {
    std::size_t pick = d.n;
    for (std::size_t i = 0; i < d.n; ++i)
      if (alive[i] && (pick == d.n || degree[i] > degree[pick])) pick = i;
    alive[pick] = false;
  }
  return static_cast<double>(largest_component(d, alive)) / static_cast<double>(d.n);
}

inline Eigen::MatrixXd adjacency_matrix(const Dense& d) {
  Eigen::MatrixXd a(d.n, d.n);
  for (std::size_t i = 0; i < d.n; ++i)
    for (std::size_t j = 0; j < d.n; ++j) a(i, j) = d.a[i][j];
  return a;
}

// Least squares through a column-pivoted QR; returns the residual sum of squares.
inline double qr_ssr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Eigen::VectorXd* beta = nullptr) {
  const Eigen::VectorXd b = X.colPivHouseholderQr().solve(y);
  if (beta) *beta = b;
  return (y - X * b).squaredNorm();
}

// Reference Granger F statistic for a single lag count q.
inline double granger_f(const std::vector<double>& x, const std::vector<double>& y, std::size_t q) {
  const std::size_t n = y.size() - q;
  Eigen::MatrixXd restricted(n, q + 1);
  Eigen::MatrixXd full(n, 2 * q + 1);
  Eigen::VectorXd target(n);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t row = t + q;
    target(t) = y[row];
    restricted(t, 0) = full(t, 0) = 1.0;
    for (std::size_t k = 1; k <= q; ++k) {
      restricted(t, k) = full(t, k) = y[row - k];
      full(t, q + k) = x[row - k];
    }
  }
  const double ssr_r = qr_ssr(restricted, target);
  const double ssr_u = qr_ssr(full, target);
  const double df = static_cast<double>(n - 2 * q - 1);
  return ((ssr_r - ssr_u) / static_cast<double>(q)) / (ssr_u / df);
}

}  // namespace oracle
