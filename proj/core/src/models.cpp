#include "marketnet/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/QR>

#include "marketnet/causality.hpp"
#include "marketnet/error.hpp"
#include "marketnet/parallel.hpp"
#include "marketnet/rng.hpp"

namespace marketnet {
namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double sse = 0.0;
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
};

std::vector<std::size_t> candidate_features(std::size_t d, std::size_t max_features, Rng* rng) {
  std::vector<std::size_t> all(d);
  std::iota(all.begin(), all.end(), 0);
  if (max_features == 0 || max_features >= d) return all;
  if (rng == nullptr) throw InputError("feature subsampling needs a random generator");
  // Partial Fisher-Yates: the first max_features entries form the sample.
  for (std::size_t i = 0; i < max_features; ++i) {
    const std::size_t j = i + rng->uniform_index(d - i);
    std::swap(all[i], all[j]);
  }
  all.resize(max_features);
  std::sort(all.begin(), all.end());
  return all;
}

std::optional<SplitChoice> best_split(const Eigen::MatrixXd& X, std::span<const double> y,
                                      std::span<const std::size_t> samples, double node_mean, double node_sse,
                                      std::span<const std::size_t> features, std::size_t min_leaf) {
  const std::size_t n = samples.size();
  std::optional<SplitChoice> best;
  std::vector<std::pair<double, double>> pairs(n);  // (x, centred y)
  for (std::size_t f : features) {
    for (std::size_t i = 0; i < n; ++i) {
      pairs[i] = {X(static_cast<Eigen::Index>(samples[i]), static_cast<Eigen::Index>(f)), y[samples[i]] - node_mean};
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    if (pairs.front().first == pairs.back().first) continue;

    double total_sum = 0.0, total_sq = 0.0;
    for (const auto& [x, r] : pairs) {
      total_sum += r;
      total_sq += r * r;
    }
    double left_sum = 0.0, left_sq = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += pairs[i].second;
      left_sq += pairs[i].second * pairs[i].second;
      const std::size_t nl = i + 1;
      const std::size_t nr = n - nl;
      if (nl < min_leaf) continue;
      if (nr < min_leaf) break;
      if (pairs[i].first == pairs[i + 1].first) continue;
      const double right_sum = total_sum - left_sum;
      const double right_sq = total_sq - left_sq;
      const double sse = (left_sq - left_sum * left_sum / static_cast<double>(nl)) +
                         (right_sq - right_sum * right_sum / static_cast<double>(nr));
      if (!best || sse < best->sse) {
        double threshold = 0.5 * (pairs[i].first + pairs[i + 1].first);
        if (!(threshold < pairs[i + 1].first)) threshold = pairs[i].first;
        if (!best) best.emplace();
        best->feature = static_cast<int>(f);
        best->threshold = threshold;
        best->sse = sse;
      }
    }
  }
  if (!best || !(best->sse < node_sse)) return std::nullopt;
  for (std::size_t s : samples) {
    const double x = X(static_cast<Eigen::Index>(s), best->feature);
    (x <= best->threshold ? best->left : best->right).push_back(s);
  }
  return best;
}

// Row-reordered copies of X and y.
void reorder_rows(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const std::size_t> order,
                  Eigen::MatrixXd& X_out, Eigen::VectorXd& y_out) {
  X_out.resize(X.rows(), X.cols());
  y_out.resize(y.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    X_out.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(order[r]));
    y_out[static_cast<Eigen::Index>(r)] = y[static_cast<Eigen::Index>(order[r])];
  }
}

void check_training_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const char* who) {
  if (X.rows() != y.size()) throw InputError(std::string(who) + ": X and y row counts differ");
  if (X.cols() == 0) throw InputError(std::string(who) + ": no feature columns");
  if (!X.allFinite() || !y.allFinite()) throw InputError(std::string(who) + ": non-finite training data");
}

}  // namespace

RegressionTree RegressionTree::fit(const Eigen::MatrixXd& X, std::span<const double> y,
                                   std::span<const std::size_t> rows, const TreeParams& params, Rng* rng) {
  if (rows.empty()) throw InputError("regression tree needs at least one row");
  const std::size_t min_leaf = std::max<std::size_t>(1, params.min_samples_leaf);
  const auto d = static_cast<std::size_t>(X.cols());

  RegressionTree tree;
  struct Pending {
    int node;
    std::size_t depth;
    std::vector<std::size_t> samples;
  };
  std::vector<Pending> stack;
  tree.nodes_.emplace_back();
  stack.push_back({0, 0, std::vector<std::size_t>(rows.begin(), rows.end())});

  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    const std::size_t n = job.samples.size();
    double sum = 0.0;
    for (std::size_t s : job.samples) sum += y[s];
    const double mean = sum / static_cast<double>(n);
    double sse = 0.0;
    for (std::size_t s : job.samples) sse += (y[s] - mean) * (y[s] - mean);

    Node& node = tree.nodes_[static_cast<std::size_t>(job.node)];
    node.value = mean;
    node.samples = n;
    const bool depth_limited = params.max_depth > 0 && job.depth >= params.max_depth;
    if (depth_limited || n < 2 * min_leaf || sse <= 0.0) continue;

    const auto features = candidate_features(d, params.max_features, rng);
    auto split = best_split(X, y, job.samples, mean, sse, features, min_leaf);
    if (!split) continue;

    const int left = static_cast<int>(tree.nodes_.size());
    const int right = left + 1;
    tree.nodes_.emplace_back();
    tree.nodes_.emplace_back();
    Node& parent = tree.nodes_[static_cast<std::size_t>(job.node)];
    parent.feature = split->feature;
    parent.threshold = split->threshold;
    parent.left = left;
    parent.right = right;
    // Right first so the left subtree is built first (stable node numbering).
    stack.push_back({right, job.depth + 1, std::move(split->right)});
    stack.push_back({left, job.depth + 1, std::move(split->left)});
  }
  return tree;
}

double RegressionTree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  std::size_t index = 0;
  while (nodes_[index].feature >= 0) {
    const Node& node = nodes_[index];
    index = static_cast<std::size_t>(row[node.feature] <= node.threshold ? node.left : node.right);
  }
  return nodes_[index].value;
}

Eigen::VectorXd RegressionTree::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) out[r] = predict_row(X.row(r));
  return out;
}

std::size_t RegressionTree::depth() const {
  std::vector<std::size_t> depth(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (nodes_[i].feature >= 0) {
      depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
    }
  }
  return deepest;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& X) const {
  if (X.cols() != coefficients.size()) throw InputError("linear model: column count mismatch");
  return (X * coefficients).array() + intercept;
}

Eigen::VectorXd RandomForest::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(X.rows());
  for (const RegressionTree& tree : trees) sum += tree.predict(X);
  return sum / static_cast<double>(trees.size());
}

Eigen::VectorXd GradientBoosting::predict(const Eigen::MatrixXd& X, std::optional<std::size_t> count) const {
  const std::size_t used = std::min(count.value_or(stages.size()), stages.size());
  Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), initial);
  for (std::size_t m = 0; m < used; ++m) out += params.learning_rate * stages[m].predict(X);
  return out;
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinear:
      return "linear";
    case ModelKind::kForest:
      return "forest";
    case ModelKind::kBoosted:
      return "boosted";
    case ModelKind::kWeightedAverage:
      return "weighted-average";
  }
  return "unknown";
}

Eigen::VectorXd EnsembleModel::predict(const Eigen::MatrixXd& X) const {
  switch (kind) {
    case ModelKind::kLinear:
      return linear.value().predict(X);
    case ModelKind::kForest:
      return forest.value().predict(X);
    case ModelKind::kBoosted:
      return boosted.value().predict(X);
    case ModelKind::kWeightedAverage:
      return forest_weight * forest.value().predict(X) + boosted_weight * boosted.value().predict(X);
  }
  throw InputError("unknown model kind");
}

std::vector<std::size_t> canonical_row_order(const Eigen::MatrixXd& X, std::span<const double> y) {
  std::vector<std::size_t> order(static_cast<std::size_t>(X.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
      const double xa = X(static_cast<Eigen::Index>(a), c);
      const double xb = X(static_cast<Eigen::Index>(b), c);
      if (xa != xb) return xa < xb;
    }
    return y[a] < y[b];
  });
  return order;
}

EnsembleModel fit_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw InputError("fit_linear: X and y row counts differ");
  if (X.rows() < 2) throw InputError("fit_linear needs at least two rows");
  LinearModel model;
  model.coefficients = Eigen::VectorXd::Zero(X.cols());
  model.constant_columns.assign(static_cast<std::size_t>(X.cols()), false);
  std::vector<Eigen::Index> active;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    if (X.col(c).minCoeff() == X.col(c).maxCoeff()) {
      model.constant_columns[static_cast<std::size_t>(c)] = true;
    } else {
      active.push_back(c);
    }
  }
  Eigen::MatrixXd design(X.rows(), static_cast<Eigen::Index>(active.size()) + 1);
  design.col(0).setOnes();
  for (std::size_t k = 0; k < active.size(); ++k) design.col(static_cast<Eigen::Index>(k) + 1) = X.col(active[k]);

  Eigen::VectorXd beta;
  if (design.rows() > design.cols()) {
    beta = ols_fit(design, y).coefficients;
  } else {
    beta = design.colPivHouseholderQr().solve(y);
  }
  model.intercept = beta[0];
  for (std::size_t k = 0; k < active.size(); ++k) model.coefficients[active[k]] = beta[static_cast<Eigen::Index>(k) + 1];

  EnsembleModel out;
  out.kind = ModelKind::kLinear;
  out.linear = std::move(model);
  return out;
}

EnsembleModel fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestParams& params,
                                std::uint64_t seed) {
  check_training_data(X, y, "fit_random_forest");
  if (params.n_trees == 0) throw InputError("fit_random_forest: n_trees must be positive");
  const std::size_t min_leaf = std::max<std::size_t>(1, params.min_samples_leaf);
  if (static_cast<std::size_t>(X.rows()) < 2 * min_leaf) {
    throw InputError("fit_random_forest needs at least 2 * min_samples_leaf rows");
  }
  const auto d = static_cast<std::size_t>(X.cols());
  const auto order = canonical_row_order(X, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
  Eigen::MatrixXd Xc;
  Eigen::VectorXd yc;
  reorder_rows(X, y, order, Xc, yc);

  RandomForest forest;
  forest.params = params;
  forest.max_features = params.max_features == 0
                            ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))))
                            : std::min(params.max_features, d);
  forest.trees.resize(params.n_trees);
  const TreeParams tree_params{params.max_depth, min_leaf, forest.max_features};
  const auto n = static_cast<std::size_t>(Xc.rows());
  const std::span<const double> targets(yc.data(), n);
  parallel_for(params.n_trees, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::vector<std::size_t> sample(n);
    for (std::size_t& s : sample) s = rng.uniform_index(n);
    forest.trees[t] = RegressionTree::fit(Xc, targets, sample, tree_params, &rng);
  });

  EnsembleModel out;
  out.kind = ModelKind::kForest;
  out.seed = seed;
  out.forest = std::move(forest);
  return out;
}

EnsembleModel fit_gradient_boosting(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const BoostingParams& params,
                                    std::uint64_t seed) {
  check_training_data(X, y, "fit_gradient_boosting");
  if (X.rows() < 4) throw InputError("fit_gradient_boosting needs at least 4 rows");
  const auto order = canonical_row_order(X, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
  Eigen::MatrixXd Xc;
  Eigen::VectorXd yc;
  reorder_rows(X, y, order, Xc, yc);

  GradientBoosting model;
  model.params = params;
  model.initial = yc.mean();
  const auto n = static_cast<std::size_t>(Xc.rows());
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const TreeParams tree_params{params.max_depth, std::max<std::size_t>(1, params.min_samples_leaf), 0};

  Eigen::VectorXd fitted = Eigen::VectorXd::Constant(Xc.rows(), model.initial);
  std::vector<double> residual(n);
  for (std::size_t m = 0; m < params.n_stages; ++m) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = yc[static_cast<Eigen::Index>(i)] - fitted[static_cast<Eigen::Index>(i)];
    RegressionTree tree = RegressionTree::fit(Xc, residual, all, tree_params, nullptr);
    fitted += params.learning_rate * tree.predict(Xc);
    model.stages.push_back(std::move(tree));
  }

  EnsembleModel out;
  out.kind = ModelKind::kBoosted;
  out.seed = seed;
  out.boosted = std::move(model);
  return out;
}

AverageWeights average_weights(double r2_a, double r2_b) {
  const double wa = std::isfinite(r2_a) ? std::max(r2_a, 0.0) : 0.0;
  const double wb = std::isfinite(r2_b) ? std::max(r2_b, 0.0) : 0.0;
  if (wa + wb <= 0.0) return {0.5, 0.5};
  return {wa / (wa + wb), wb / (wa + wb)};
}

Eigen::VectorXd weighted_average(const Eigen::VectorXd& pred_a, double r2_a, const Eigen::VectorXd& pred_b,
                                 double r2_b) {
  if (pred_a.size() != pred_b.size()) throw InputError("weighted_average: prediction lengths differ");
  const AverageWeights w = average_weights(r2_a, r2_b);
  return w.a * pred_a + w.b * pred_b;
}

}  // namespace marketnet
