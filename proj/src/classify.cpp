#include "hpcfd/classify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hpcfd::classify {

namespace {

double gini(const std::vector<std::int64_t>& counts, std::int64_t total) {
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (std::int64_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

int argmax_count(const std::vector<std::int64_t>& counts) {
  int best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = static_cast<int>(c);
  }
  return best;
}

struct BestSplit {
  int feature = -1;
  double threshold = 0.0;
  double gain = -1.0;
};

// Grows one tree over an index multiset (bootstrap indices for forests).
class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TreeParams& params, Rng* rng,
              std::size_t features_per_split, std::vector<std::size_t> indices)
      : data_(data),
        params_(params),
        rng_(rng),
        features_per_split_(features_per_split),
        indices_(std::move(indices)),
        feature_order_(data.feature_count) {
    for (std::size_t f = 0; f < data_.feature_count; ++f) feature_order_[f] = f;
  }

  std::vector<TreeNode> build() {
    grow(0, indices_.size(), 0);
    return std::move(nodes_);
  }

 private:
  std::vector<std::int64_t> tally(std::size_t begin, std::size_t end) const {
    std::vector<std::int64_t> counts(data_.class_names.size(), 0);
    for (std::size_t i = begin; i < end; ++i) ++counts[data_.y[indices_[i]]];
    return counts;
  }

  // Candidate features for this node, ascending so equal gains resolve to the
  // lowest feature index.
  std::span<const std::size_t> node_features() {
    const std::size_t d = data_.feature_count;
    if (features_per_split_ >= d) {
      return feature_order_;  // identity order, never shuffled in this mode
    }
    for (std::size_t i = 0; i < features_per_split_; ++i) {
      const std::size_t j = i + rng_->below(d - i);
      std::swap(feature_order_[i], feature_order_[j]);
    }
    std::sort(feature_order_.begin(),
              feature_order_.begin() + static_cast<std::ptrdiff_t>(features_per_split_));
    return {feature_order_.data(), features_per_split_};
  }

  BestSplit find_split(std::size_t begin, std::size_t end,
                       const std::vector<std::int64_t>& counts) {
    const std::size_t n = end - begin;
    const double parent_impurity = gini(counts, static_cast<std::int64_t>(n));
    BestSplit best;

    values_.resize(n);
    std::vector<std::int64_t> left(counts.size());
    for (std::size_t f : node_features()) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t row = indices_[begin + i];
        values_[i] = {data_.x[row * data_.feature_count + f], data_.y[row]};
      }
      std::sort(values_.begin(), values_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (values_.front().first == values_.back().first) continue;

      std::fill(left.begin(), left.end(), 0);
      double left_sq = 0.0;  // sum of squared left counts, updated incrementally
      std::int64_t right_total = static_cast<std::int64_t>(n);
      std::vector<std::int64_t> right = counts;
      double right_sq = 0.0;
      for (std::int64_t c : right) right_sq += static_cast<double>(c) * static_cast<double>(c);

      for (std::size_t i = 0; i + 1 < n; ++i) {
        const int label = values_[i].second;
        left_sq += 2.0 * static_cast<double>(left[label]) + 1.0;
        ++left[label];
        right_sq += -2.0 * static_cast<double>(right[label]) + 1.0;
        --right[label];
        --right_total;
        if (values_[i + 1].first <= values_[i].first) continue;

        const std::int64_t nl = static_cast<std::int64_t>(i + 1);
        const std::int64_t nr = right_total;
        const double gini_l = 1.0 - left_sq / (static_cast<double>(nl) * static_cast<double>(nl));
        const double gini_r = 1.0 - right_sq / (static_cast<double>(nr) * static_cast<double>(nr));
        const double weighted = (static_cast<double>(nl) * gini_l +
                                 static_cast<double>(nr) * gini_r) /
                                static_cast<double>(n);
        const double gain = parent_impurity - weighted;
        if (gain > best.gain) {
          double threshold = values_[i].first + (values_[i + 1].first - values_[i].first) / 2.0;
          if (threshold >= values_[i + 1].first) threshold = values_[i].first;
          best = {static_cast<int>(f), threshold, gain};
        }
      }
    }
    return best;
  }

  // Returns the arena index of the subtree root for indices_[begin, end).
  std::int32_t grow(std::size_t begin, std::size_t end, int depth) {
    const std::int32_t node_index = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_[node_index].counts = tally(begin, end);

    const std::size_t n = end - begin;
    const auto& counts = nodes_[node_index].counts;
    const bool pure =
        *std::max_element(counts.begin(), counts.end()) == static_cast<std::int64_t>(n);
    const bool depth_capped = params_.max_depth && depth >= *params_.max_depth;
    if (pure || depth_capped || n < static_cast<std::size_t>(params_.min_samples_split)) {
      return node_index;
    }

    const BestSplit split = find_split(begin, end, counts);
    if (split.feature < 0) return node_index;  // no feature with two distinct values

    // Stable partition: left block keeps rows with x <= threshold.
    partition_buffer_.clear();
    std::size_t mid = begin;
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t row = indices_[i];
      if (data_.x[row * data_.feature_count + static_cast<std::size_t>(split.feature)] <=
          split.threshold) {
        indices_[mid++] = row;
      } else {
        partition_buffer_.push_back(row);
      }
    }
    std::copy(partition_buffer_.begin(), partition_buffer_.end(), indices_.begin() + mid);

    nodes_[node_index].feature = split.feature;
    nodes_[node_index].threshold = split.threshold;
    const std::int32_t left = grow(begin, mid, depth + 1);
    nodes_[node_index].left = left;
    const std::int32_t right = grow(mid, end, depth + 1);
    nodes_[node_index].right = right;
    return node_index;
  }

  const Dataset& data_;
  const TreeParams& params_;
  Rng* rng_;
  std::size_t features_per_split_;
  std::vector<std::size_t> indices_;
  std::vector<std::size_t> feature_order_;
  std::vector<TreeNode> nodes_;
  std::vector<std::pair<double, int>> values_;
  std::vector<std::size_t> partition_buffer_;
};

}  // namespace

void Dataset::validate() const {
  if (feature_count == 0) throw std::invalid_argument("dataset: no features");
  if (y.empty()) throw std::invalid_argument("dataset: no samples");
  if (x.size() != y.size() * feature_count) {
    throw std::invalid_argument("dataset: feature matrix / label length mismatch");
  }
  if (class_names.empty()) throw std::invalid_argument("dataset: no classes");
  for (int label : y) {
    if (label < 0 || static_cast<std::size_t>(label) >= class_names.size()) {
      throw std::invalid_argument("dataset: label out of range");
    }
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite feature value");
  }
}

void TreeParams::validate() const {
  if (min_samples_split < 2) {
    throw std::invalid_argument("tree params: min_samples_split must be >= 2");
  }
  if (max_depth && *max_depth <= 0) {
    throw std::invalid_argument("tree params: max_depth must be positive");
  }
}

void ForestParams::validate() const {
  tree.validate();
  if (n_trees <= 0) throw std::invalid_argument("forest params: n_trees must be positive");
  if (features_per_split < 0) {
    throw std::invalid_argument("forest params: features_per_split must be >= 0");
  }
}

TreeModel::TreeModel(std::vector<TreeNode> nodes, std::size_t feature_count,
                     std::vector<std::string> class_names)
    : nodes_(std::move(nodes)),
      feature_count_(feature_count),
      class_names_(std::move(class_names)) {
  if (nodes_.empty()) throw std::invalid_argument("tree model: no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    if (node.counts.size() != class_names_.size()) {
      throw std::invalid_argument("tree model: count vector size mismatch");
    }
    const bool has_children = node.left >= 0 && node.right >= 0;
    if (node.is_leaf() == has_children) {
      throw std::invalid_argument("tree model: internal nodes need exactly two children");
    }
    if (has_children) {
      // Preorder arena: children follow their parent, which also rules out
      // cycles in models loaded from files.
      const auto limit = static_cast<std::int32_t>(nodes_.size());
      if (node.left <= static_cast<std::int32_t>(i) || node.left >= limit ||
          node.right <= static_cast<std::int32_t>(i) || node.right >= limit) {
        throw std::invalid_argument("tree model: child index out of order");
      }
      if (static_cast<std::size_t>(node.feature) >= feature_count_) {
        throw std::invalid_argument("tree model: feature index out of range");
      }
    }
  }
}

const TreeNode& TreeModel::leaf_for(std::span<const double> x) const {
  if (x.size() != feature_count_) {
    throw std::invalid_argument("tree predict: feature count mismatch");
  }
  const TreeNode* node = &nodes_[0];
  while (!node->is_leaf()) {
    node = x[static_cast<std::size_t>(node->feature)] <= node->threshold
               ? &nodes_[static_cast<std::size_t>(node->left)]
               : &nodes_[static_cast<std::size_t>(node->right)];
  }
  return *node;
}

int TreeModel::predict(std::span<const double> x) const {
  return argmax_count(leaf_for(x).counts);
}

std::pair<int, std::vector<double>> TreeModel::predict_distribution(
    std::span<const double> x) const {
  const TreeNode& leaf = leaf_for(x);
  std::int64_t total = 0;
  for (std::int64_t c : leaf.counts) total += c;
  std::vector<double> dist(leaf.counts.size(), 0.0);
  for (std::size_t c = 0; c < leaf.counts.size(); ++c) {
    dist[c] = total > 0 ? static_cast<double>(leaf.counts[c]) / static_cast<double>(total)
                        : 0.0;
  }
  return {argmax_count(leaf.counts), std::move(dist)};
}

std::vector<double> TreeModel::feature_importances() const {
  std::vector<double> importances(feature_count_, 0.0);
  std::int64_t root_total = 0;
  for (std::int64_t c : nodes_[0].counts) root_total += c;
  if (root_total == 0) return importances;

  for (const auto& node : nodes_) {
    if (node.is_leaf()) continue;
    std::int64_t n = 0, nl = 0, nr = 0;
    for (std::int64_t c : node.counts) n += c;
    const auto& left = nodes_[static_cast<std::size_t>(node.left)];
    const auto& right = nodes_[static_cast<std::size_t>(node.right)];
    for (std::int64_t c : left.counts) nl += c;
    for (std::int64_t c : right.counts) nr += c;
    const double decrease =
        gini(node.counts, n) - (static_cast<double>(nl) * gini(left.counts, nl) +
                                static_cast<double>(nr) * gini(right.counts, nr)) /
                                   static_cast<double>(n);
    importances[static_cast<std::size_t>(node.feature)] +=
        static_cast<double>(n) / static_cast<double>(root_total) * decrease;
  }
  double total = 0.0;
  for (double v : importances) total += v;
  if (total > 0.0) {
    for (double& v : importances) v /= total;
  }
  return importances;
}

int TreeModel::depth() const {
  // Arena order is preorder, so children always follow parents.
  std::vector<int> depths(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    if (!node.is_leaf()) {
      depths[static_cast<std::size_t>(node.left)] = depths[i] + 1;
      depths[static_cast<std::size_t>(node.right)] = depths[i] + 1;
    }
    deepest = std::max(deepest, depths[i]);
  }
  return deepest;
}

TreeModel train_tree(const Dataset& data, const TreeParams& params, Rng* rng,
                     int features_per_split) {
  data.validate();
  params.validate();
  const std::size_t d = data.feature_count;
  std::size_t m = features_per_split <= 0 ? d : static_cast<std::size_t>(features_per_split);
  if (m > d) throw std::invalid_argument("train_tree: features_per_split exceeds d");
  if (m < d && rng == nullptr) {
    throw std::invalid_argument("train_tree: feature subsampling requires an rng");
  }

  std::vector<std::size_t> indices(data.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  TreeBuilder builder(data, params, rng, m, std::move(indices));
  return TreeModel(builder.build(), d, data.class_names);
}

ForestModel::ForestModel(std::vector<TreeModel> trees, ForestParams params)
    : trees_(std::move(trees)), params_(std::move(params)) {
  if (trees_.empty()) throw std::invalid_argument("forest model: no trees");
  for (const auto& tree : trees_) {
    if (tree.feature_count() != trees_[0].feature_count() ||
        tree.class_names() != trees_[0].class_names()) {
      throw std::invalid_argument("forest model: trees disagree on features or classes");
    }
  }
}

int ForestModel::predict(std::span<const double> x) const {
  std::vector<std::int64_t> votes(class_names().size(), 0);
  for (const auto& tree : trees_) ++votes[tree.predict(x)];
  return argmax_count(votes);
}

std::vector<double> ForestModel::feature_importances() const {
  std::vector<double> importances(feature_count(), 0.0);
  for (const auto& tree : trees_) {
    const auto tree_importances = tree.feature_importances();
    for (std::size_t f = 0; f < importances.size(); ++f) {
      importances[f] += tree_importances[f];
    }
  }
  for (double& v : importances) v /= static_cast<double>(trees_.size());
  return importances;
}

std::size_t ForestModel::feature_count() const { return trees_.at(0).feature_count(); }

const std::vector<std::string>& ForestModel::class_names() const {
  return trees_.at(0).class_names();
}

ForestModel train_forest(const Dataset& data, const ForestParams& params) {
  data.validate();
  params.validate();
  const std::size_t d = data.feature_count;
  std::size_t m = params.features_per_split > 0
                      ? static_cast<std::size_t>(params.features_per_split)
                      : static_cast<std::size_t>(
                            std::ceil(std::sqrt(static_cast<double>(d))));
  if (m > d) throw std::invalid_argument("train_forest: features_per_split exceeds d");

  const Rng master(params.seed);
  std::vector<TreeModel> trees;
  trees.reserve(static_cast<std::size_t>(params.n_trees));
  for (int t = 0; t < params.n_trees; ++t) {
    Rng tree_rng = master.fork(static_cast<std::uint64_t>(t));
    std::vector<std::size_t> indices(data.size());
    if (params.bootstrap) {
      for (auto& idx : indices) idx = tree_rng.below(data.size());
      std::sort(indices.begin(), indices.end());
    } else {
      for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    }
    TreeBuilder builder(data, params.tree, &tree_rng, m, std::move(indices));
    trees.emplace_back(builder.build(), d, data.class_names);
  }
  return ForestModel(std::move(trees), params);
}

void ClassifierArray::add(std::string resource_type, ForestModel model) {
  if (!models_.emplace(std::move(resource_type), std::move(model)).second) {
    throw std::invalid_argument("classifier array: duplicate resource type");
  }
}

const ForestModel& ClassifierArray::model(const std::string& resource_type) const {
  const auto it = models_.find(resource_type);
  if (it == models_.end()) {
    throw std::invalid_argument("classifier array: unknown resource type '" +
                                resource_type + "'");
  }
  return it->second;
}

int ClassifierArray::predict(const std::string& resource_type,
                             std::span<const double> x) const {
  return model(resource_type).predict(x);
}

}  // namespace hpcfd::classify
