#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace marketnet {

class Rng;

struct TreeParams {
  std::size_t max_depth = 0;         // 0 = unlimited
  std::size_t min_samples_leaf = 1;  // counted with bootstrap multiplicity
  std::size_t max_features = 0;      // 0 = all columns
};

// CART regression tree minimizing the summed squared error of the children.
// Candidate thresholds are midpoints of consecutive distinct values; gain
// ties go to the lower column, then the lower threshold.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // mean target of the training rows reaching the node
    std::size_t samples = 0;
  };

  // Fits on X.row(r) for r in `rows` (duplicates allowed). `rng` is only
  // consulted when params.max_features < X.cols().
  static RegressionTree fit(const Eigen::MatrixXd& X, std::span<const double> y,
                            std::span<const std::size_t> rows, const TreeParams& params, Rng* rng);

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

 private:
  std::vector<Node> nodes_;
};

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t min_samples_leaf = 5;
  std::size_t max_features = 0;  // 0 = ceil(sqrt(d))
  std::size_t max_depth = 0;
};

struct BoostingParams {
  std::size_t n_stages = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;
  std::size_t min_samples_leaf = 1;
};

struct LinearModel {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  std::vector<bool> constant_columns;  // coefficient forced to 0

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

struct RandomForest {
  std::vector<RegressionTree> trees;
  ForestParams params;
  std::size_t max_features = 0;  // effective value

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

struct GradientBoosting {
  double initial = 0.0;
  std::vector<RegressionTree> stages;
  BoostingParams params;

  // Prediction after the first `stages` stages (all when nullopt).
  Eigen::VectorXd predict(const Eigen::MatrixXd& X, std::optional<std::size_t> stages = std::nullopt) const;
};

enum class ModelKind { kLinear, kForest, kBoosted, kWeightedAverage };
std::string_view to_string(ModelKind kind);

struct EnsembleModel {
  ModelKind kind = ModelKind::kLinear;
  std::vector<std::string> features;
  std::uint64_t seed = 0;
  std::optional<LinearModel> linear;
  std::optional<RandomForest> forest;
  std::optional<GradientBoosting> boosted;
  // Weighted-average members: forest and boosted, both on `features`.
  double forest_weight = 0.0;
  double boosted_weight = 0.0;

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

// Intercept + least-squares coefficients; zero-variance columns get a zero
// coefficient and are flagged. Requires at least two rows.
EnsembleModel fit_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Bootstrap forest. Rows are put into a canonical (lexicographic) order
// before sampling, so the fit does not depend on the input row order. Tree t
// draws from derive_seed(seed, t).
EnsembleModel fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const ForestParams& params, std::uint64_t seed);

// Squared-loss boosting from the target mean.
EnsembleModel fit_gradient_boosting(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const BoostingParams& params, std::uint64_t seed);

struct AverageWeights {
  double a = 0.5;
  double b = 0.5;
};

// max(r2, 0) weights normalized to sum 1; equal weights when both clamp to 0.
AverageWeights average_weights(double r2_a, double r2_b);

Eigen::VectorXd weighted_average(const Eigen::VectorXd& pred_a, double r2_a,
                                 const Eigen::VectorXd& pred_b, double r2_b);

// Canonical row order: lexicographic on (x_0, ..., x_{d-1}, y).
std::vector<std::size_t> canonical_row_order(const Eigen::MatrixXd& X, std::span<const double> y);

}  // namespace marketnet
