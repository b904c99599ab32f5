#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hpcfd/rng.hpp"

namespace hpcfd::classify {

/// Row-major training data with integer class ids into `class_names`.
struct Dataset {
  std::size_t feature_count = 0;
  std::vector<double> x;  // n * feature_count
  std::vector<int> y;
  std::vector<std::string> class_names;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * feature_count, feature_count};
  }
  void validate() const;
};

struct TreeParams {
  std::optional<int> max_depth;  // empty = unlimited
  int min_samples_split = 2;

  void validate() const;
};

struct ForestParams {
  int n_trees = 100;
  int features_per_split = 0;  // 0 = ceil(sqrt(d))
  bool bootstrap = true;
  std::uint64_t seed = 0;
  TreeParams tree;

  void validate() const;
};

/// Arena node: internal nodes split on (feature, threshold) with x <= threshold
/// routed left; every node carries the class counts of its training region, so
/// leaf distributions and impurity-based importances survive serialization.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<std::int64_t> counts;

  bool is_leaf() const { return feature < 0; }
};

class TreeModel {
 public:
  TreeModel() = default;
  TreeModel(std::vector<TreeNode> nodes, std::size_t feature_count,
            std::vector<std::string> class_names);

  /// Majority class of the reached leaf; ties break to the lowest class id.
  int predict(std::span<const double> x) const;

  /// Predicted class plus the leaf's empirical class distribution.
  std::pair<int, std::vector<double>> predict_distribution(std::span<const double> x) const;

  /// Impurity-decrease importances normalized to sum 1 (all zero if the tree
  /// never splits).
  std::vector<double> feature_importances() const;

  int depth() const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t feature_count() const { return feature_count_; }
  const std::vector<std::string>& class_names() const { return class_names_; }

 private:
  const TreeNode& leaf_for(std::span<const double> x) const;

  std::vector<TreeNode> nodes_;
  std::size_t feature_count_ = 0;
  std::vector<std::string> class_names_;
};

/// Grows a CART tree with greedy Gini splits; thresholds are midpoints of
/// consecutive distinct sorted values. `rng` is only consumed when
/// features_per_split < d. Deterministic for a fixed rng state.
TreeModel train_tree(const Dataset& data, const TreeParams& params,
                     Rng* rng = nullptr, int features_per_split = 0);

class ForestModel {
 public:
  ForestModel() = default;
  ForestModel(std::vector<TreeModel> trees, ForestParams params);

  /// Majority vote over trees; ties break to the lowest class id.
  int predict(std::span<const double> x) const;

  /// Mean of per-tree normalized importances.
  std::vector<double> feature_importances() const;

  const std::vector<TreeModel>& trees() const { return trees_; }
  const ForestParams& params() const { return params_; }
  std::size_t feature_count() const;
  const std::vector<std::string>& class_names() const;

 private:
  std::vector<TreeModel> trees_;
  ForestParams params_;
};

/// Bagged forest: per-tree bootstrap resamples and per-split uniform feature
/// subsets, with per-tree seeds derived from params.seed.
ForestModel train_forest(const Dataset& data, const ForestParams& params);

/// One model per resource type; each feature vector is dispatched to the model
/// of its type, returning exactly one class.
class ClassifierArray {
 public:
  void add(std::string resource_type, ForestModel model);
  const ForestModel& model(const std::string& resource_type) const;
  int predict(const std::string& resource_type, std::span<const double> x) const;
  const std::map<std::string, ForestModel>& models() const { return models_; }

 private:
  std::map<std::string, ForestModel> models_;
};

}  // namespace hpcfd::classify
