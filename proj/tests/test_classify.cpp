#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "hpcfd/classify.hpp"
#include "hpcfd/model_io.hpp"
#include "hpcfd/rng.hpp"
#include "oracles.hpp"

using namespace hpcfd;
using namespace hpcfd::classify;

namespace {

Dataset make_dataset(std::vector<std::vector<double>> rows, std::vector<int> labels,
                     std::vector<std::string> classes = {"A", "B"}) {
  Dataset data;
  data.feature_count = rows.at(0).size();
  for (const auto& row : rows) {
    data.x.insert(data.x.end(), row.begin(), row.end());
  }
  data.y = std::move(labels);
  data.class_names = std::move(classes);
  return data;
}

/// Two interleaved-moon-free blobs: class 0 near (0,0), class 1 near (10,10),
/// noise well below the separation so a nearest-centroid rule is exact.
Dataset blob_dataset(std::size_t per_class, Rng& rng) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < per_class; ++i) {
    rows.push_back({rng.normal() * 0.5, rng.normal() * 0.5});
    labels.push_back(0);
    rows.push_back({10 + rng.normal() * 0.5, 10 + rng.normal() * 0.5});
    labels.push_back(1);
  }
  return make_dataset(std::move(rows), std::move(labels));
}

bool nearest_centroid_separates(const Dataset& data) {
  std::vector<std::vector<double>> centroids(data.class_names.size(),
                                             std::vector<double>(data.feature_count, 0));
  std::vector<std::size_t> counts(data.class_names.size(), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t f = 0; f < data.feature_count; ++f) {
      centroids[data.y[i]][f] += data.row(i)[f];
    }
    ++counts[data.y[i]];
  }
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    for (double& v : centroids[c]) v /= static_cast<double>(counts[c]);
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::size_t best = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      double distance = 0;
      for (std::size_t f = 0; f < data.feature_count; ++f) {
        const double d = data.row(i)[f] - centroids[c][f];
        distance += d * d;
      }
      if (distance < best_distance) {
        best_distance = distance;
        best = c;
      }
    }
    if (static_cast<int>(best) != data.y[i]) return false;
  }
  return true;
}

double training_accuracy(const TreeModel& model, const Dataset& data) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (model.predict(data.row(i)) == data.y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::string serialized(const ForestModel& forest, std::size_t features) {
  ModelFile file;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < features; ++i) names.push_back("f" + std::to_string(i));
  file.models.emplace("core", forest);
  file.feature_names.emplace("core", names);
  return model_to_string(file);
}

}  // namespace

TEST_CASE("pure labels produce a single leaf") {
  const Dataset data = make_dataset({{1, 0}, {2, 5}, {3, 1}}, {1, 1, 1});
  const TreeModel tree = train_tree(data, {});
  CHECK(tree.nodes().size() == 1);
  CHECK(tree.predict({{0.0, 0.0}}) == 1);
  CHECK(tree.predict({{100.0, -3.0}}) == 1);
}

TEST_CASE("1-D split lands on the oracle's best threshold") {
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<int> y = {0, 0, 1, 1};
  const auto oracle_best = oracle::best_split_1d(x, y);
  CHECK(oracle_best.threshold == 2.5);
  CHECK(oracle_best.gain == doctest::Approx(0.5));

  const Dataset data = make_dataset({{1}, {2}, {3}, {4}}, y);
  const TreeModel tree = train_tree(data, {});
  REQUIRE(!tree.nodes().empty());
  CHECK(tree.nodes()[0].feature == 0);
  CHECK(tree.nodes()[0].threshold == oracle_best.threshold);
  CHECK(training_accuracy(tree, data) == 1.0);
}

TEST_CASE("XOR needs depth 2 and reaches perfect training accuracy") {
  const Dataset data = make_dataset({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
  // Exhaustive check that no single split helps: per-feature best gain is 0.
  for (std::size_t f = 0; f < 2; ++f) {
    std::vector<double> column;
    for (std::size_t i = 0; i < data.size(); ++i) column.push_back(data.row(i)[f]);
    CHECK(oracle::best_split_1d(column, data.y).gain == doctest::Approx(0.0));
  }

  const TreeModel tree = train_tree(data, {});
  CHECK(tree.depth() >= 2);
  CHECK(training_accuracy(tree, data) == 1.0);
}

TEST_CASE("prediction routing and ties") {
  SUBCASE("threshold-equal values route left") {
    // Split at 2.5 with left = class 0: a probe exactly on the threshold goes left.
    const Dataset data = make_dataset({{1}, {2}, {3}, {4}}, {0, 0, 1, 1});
    const TreeModel tree = train_tree(data, {});
    CHECK(tree.predict({{2.5}}) == 0);
  }
  SUBCASE("leaf distribution ties break to the lowest class id") {
    TreeModel leaf({TreeNode{-1, 0, -1, -1, {3, 3}}}, 1, {"A", "B"});
    CHECK(leaf.predict({{0.0}}) == 0);
    const auto [label, dist] = leaf.predict_distribution({{0.0}});
    CHECK(label == 0);
    CHECK(dist[0] == 0.5);
    CHECK(dist[1] == 0.5);
  }
  SUBCASE("training points predict their own labels") {
    Rng rng(5);
    const Dataset data = blob_dataset(20, rng);
    const TreeModel tree = train_tree(data, {});
    CHECK(training_accuracy(tree, data) == 1.0);
  }
  SUBCASE("feature count mismatch is an error") {
    const Dataset data = make_dataset({{1, 2}, {3, 4}}, {0, 1});
    const TreeModel tree = train_tree(data, {});
    CHECK_THROWS(tree.predict({{1.0}}));
  }
}

TEST_CASE("degenerate forest equals the single tree") {
  Rng rng(17);
  const Dataset data = blob_dataset(25, rng);
  ForestParams params;
  params.n_trees = 1;
  params.bootstrap = false;
  params.features_per_split = static_cast<int>(data.feature_count);
  params.seed = 9;
  const ForestModel forest = train_forest(data, params);
  const TreeModel tree = train_tree(data, params.tree);

  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(forest.predict(data.row(i)) == tree.predict(data.row(i)));
  }
  for (int probe = 0; probe < 200; ++probe) {
    const std::vector<double> x = {rng.uniform(-5, 15), rng.uniform(-5, 15)};
    CHECK(forest.predict(x) == tree.predict(x));
  }
}

TEST_CASE("same seed twice gives byte-equal serialized forests") {
  Rng rng(23);
  const Dataset data = blob_dataset(30, rng);
  ForestParams params;
  params.n_trees = 7;
  params.seed = 1234;
  const ForestModel a = train_forest(data, params);
  const ForestModel b = train_forest(data, params);
  CHECK(serialized(a, data.feature_count) == serialized(b, data.feature_count));

  params.seed = 1235;
  const ForestModel c = train_forest(data, params);
  CHECK(serialized(a, data.feature_count) != serialized(c, data.feature_count));
}

TEST_CASE("separable blobs train to a perfect forest") {
  Rng rng(77);
  const Dataset data = blob_dataset(40, rng);
  REQUIRE(nearest_centroid_separates(data));  // margin verified independently

  ForestParams params;
  params.n_trees = 30;
  params.seed = 5;
  const ForestModel forest = train_forest(data, params);
  // All training predictions correct <=> per-class F-scores are all 1.
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(forest.predict(data.row(i)) == data.y[i]);
  }
}

TEST_CASE("forest vote ties break to the lowest class id") {
  const TreeModel votes_a({TreeNode{-1, 0, -1, -1, {5, 0}}}, 1, {"A", "B"});
  const TreeModel votes_b({TreeNode{-1, 0, -1, -1, {0, 5}}}, 1, {"A", "B"});
  ForestParams params;
  params.n_trees = 2;
  const ForestModel forest({votes_a, votes_b}, params);
  CHECK(forest.predict({{0.0}}) == 0);

  SUBCASE("single-tree forest is the tree's prediction") {
    ForestParams one;
    one.n_trees = 1;
    const ForestModel single({votes_b}, one);
    CHECK(single.predict({{0.0}}) == 1);
  }
  SUBCASE("all trees agreeing is that class") {
    ForestParams two;
    two.n_trees = 2;
    const ForestModel agree({votes_b, votes_b}, two);
    CHECK(agree.predict({{0.0}}) == 1);
  }
}

TEST_CASE("feature importances") {
  SUBCASE("single leaf gives the zero vector") {
    const Dataset data = make_dataset({{1, 2}, {2, 3}}, {0, 0});
    const TreeModel tree = train_tree(data, {});
    const auto importances = tree.feature_importances();
    CHECK(importances == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("one perfect split concentrates importance") {
    const Dataset data = make_dataset({{1}, {2}, {3}, {4}}, {0, 0, 1, 1});
    const TreeModel tree = train_tree(data, {});
    CHECK(tree.feature_importances() == std::vector<double>{1.0});
  }
  SUBCASE("a constant second feature gets zero importance") {
    const Dataset data =
        make_dataset({{1, 5}, {2, 5}, {3, 5}, {4, 5}}, {0, 0, 1, 1});
    const TreeModel tree = train_tree(data, {});
    const auto importances = tree.feature_importances();
    CHECK(importances[0] == doctest::Approx(1.0));
    CHECK(importances[1] == doctest::Approx(0.0));
  }
  SUBCASE("forest importances sum to 1 when every tree splits") {
    Rng rng(3);
    const Dataset data = blob_dataset(20, rng);
    ForestParams params;
    params.n_trees = 9;
    params.seed = 2;
    const auto importances = train_forest(data, params).feature_importances();
    double total = 0;
    for (double v : importances) total += v;
    CHECK(total == doctest::Approx(1.0));
  }
}

TEST_CASE("training accuracy is 1.0 on consistent datasets") {
  Rng rng(11);
  for (int round = 0; round < 15; ++round) {
    const std::size_t n = 5 + rng.below(80);
    const std::size_t d = 1 + rng.below(4);
    const std::size_t classes = 2 + rng.below(3);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row(d);
      for (double& v : row) v = rng.uniform(-4, 4);
      rows.push_back(std::move(row));
      labels.push_back(static_cast<int>(rng.below(classes)));
    }
    std::vector<std::string> class_names;
    for (std::size_t c = 0; c < classes; ++c) class_names.push_back(std::to_string(c));
    const Dataset data = make_dataset(std::move(rows), std::move(labels), class_names);
    const TreeModel tree = train_tree(data, {});
    CHECK(training_accuracy(tree, data) == 1.0);
  }
}

TEST_CASE("every split strictly reduces weighted Gini impurity") {
  Rng rng(29);
  const Dataset data = blob_dataset(30, rng);
  const TreeModel tree = train_tree(data, {});
  const auto gini_of = [](const std::vector<std::int64_t>& counts) {
    std::int64_t n = 0;
    for (auto c : counts) n += c;
    double sum_sq = 0;
    for (auto c : counts) sum_sq += double(c) / n * double(c) / n;
    return 1.0 - sum_sq;
  };
  for (const auto& node : tree.nodes()) {
    if (node.is_leaf()) continue;
    std::int64_t n = 0, nl = 0, nr = 0;
    for (auto c : node.counts) n += c;
    const auto& left = tree.nodes()[node.left];
    const auto& right = tree.nodes()[node.right];
    for (auto c : left.counts) nl += c;
    for (auto c : right.counts) nr += c;
    const double weighted =
        (nl * gini_of(left.counts) + nr * gini_of(right.counts)) / double(n);
    CHECK(weighted <= gini_of(node.counts) + 1e-12);
  }
}

TEST_CASE("monotone feature rescaling leaves predictions unchanged") {
  Rng rng(41);
  const Dataset data = blob_dataset(25, rng);
  Dataset scaled = data;
  const double a = 3.75;
  for (double& v : scaled.x) v *= a;

  const TreeModel tree = train_tree(data, {});
  const TreeModel scaled_tree = train_tree(scaled, {});
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(tree.predict(data.row(i)) == scaled_tree.predict(scaled.row(i)));
  }
  for (int probe = 0; probe < 300; ++probe) {
    const std::vector<double> x = {rng.uniform(-5, 15), rng.uniform(-5, 15)};
    const std::vector<double> ax = {a * x[0], a * x[1]};
    CHECK(tree.predict(x) == scaled_tree.predict(ax));
  }
}

TEST_CASE("forest prediction is invariant to tree order") {
  Rng rng(53);
  const Dataset data = blob_dataset(20, rng);
  ForestParams params;
  params.n_trees = 5;
  params.seed = 8;
  const ForestModel forest = train_forest(data, params);
  std::vector<TreeModel> reversed(forest.trees().rbegin(), forest.trees().rend());
  const ForestModel permuted(std::move(reversed), params);
  for (int probe = 0; probe < 200; ++probe) {
    const std::vector<double> x = {rng.uniform(-5, 15), rng.uniform(-5, 15)};
    CHECK(forest.predict(x) == permuted.predict(x));
  }
}

TEST_CASE("serialization round-trip preserves predictions and bytes") {
  Rng rng(67);
  const Dataset data = blob_dataset(35, rng);
  ForestParams params;
  params.n_trees = 11;
  params.seed = 99;
  params.tree.max_depth = 6;
  params.tree.min_samples_split = 3;
  const ForestModel forest = train_forest(data, params);

  const std::string first = serialized(forest, data.feature_count);
  std::istringstream in(first);
  const ModelFile loaded = load_model(in);
  const ForestModel& reloaded = loaded.models.at("core");

  CHECK(reloaded.params().n_trees == params.n_trees);
  CHECK(reloaded.params().tree.max_depth == params.tree.max_depth);
  for (int probe = 0; probe < 500; ++probe) {
    const std::vector<double> x = {rng.uniform(-6, 16), rng.uniform(-6, 16)};
    CHECK(forest.predict(x) == reloaded.predict(x));
  }
  CHECK(serialized(reloaded, data.feature_count) == first);
}

TEST_CASE("classifier array") {
  Rng rng(71);
  const Dataset data = blob_dataset(15, rng);
  ForestParams params;
  params.n_trees = 3;
  params.seed = 4;
  const ForestModel forest = train_forest(data, params);

  ClassifierArray array;
  array.add("core", forest);

  SUBCASE("single resource type behaves as the forest") {
    for (std::size_t i = 0; i < data.size(); ++i) {
      CHECK(array.predict("core", data.row(i)) == forest.predict(data.row(i)));
    }
  }
  SUBCASE("unknown resource type is an error") {
    CHECK_THROWS(array.predict("gpu", data.row(0)));
  }
  SUBCASE("two resource types dispatch independently") {
    Dataset inverted = data;
    for (int& label : inverted.y) label = 1 - label;
    ForestParams params2 = params;
    params2.seed = 6;
    array.add("gpu", train_forest(inverted, params2));
    for (std::size_t i = 0; i < data.size(); ++i) {
      CHECK(array.predict("core", data.row(i)) == data.y[i]);
      CHECK(array.predict("gpu", data.row(i)) == inverted.y[i]);
    }
  }
  SUBCASE("duplicate resource type is an error") {
    CHECK_THROWS(array.add("core", forest));
  }
}

TEST_CASE("dataset and parameter validation") {
  Dataset bad = make_dataset({{1, 2}}, {0});
  bad.x.pop_back();  // dimension mismatch
  CHECK_THROWS(train_tree(bad, {}));

  const Dataset data = make_dataset({{1}, {2}}, {0, 1});
  TreeParams params;
  params.min_samples_split = 1;
  CHECK_THROWS(train_tree(data, params));

  ForestParams forest_params;
  forest_params.n_trees = 0;
  CHECK_THROWS(train_forest(data, forest_params));

  ForestParams too_many_features;
  too_many_features.features_per_split = 5;
  CHECK_THROWS(train_forest(data, too_many_features));
}

TEST_CASE("max_depth caps the tree") {
  Rng rng(83);
  const Dataset data = blob_dataset(40, rng);
  TreeParams params;
  params.max_depth = 1;
  const TreeModel stump = train_tree(data, params);
  CHECK(stump.depth() <= 1);
}

TEST_CASE("model file rejects wrong format, version, and malformed JSON") {
  Rng rng(91);
  const Dataset data = blob_dataset(10, rng);
  ForestParams params;
  params.n_trees = 2;
  ModelFile file;
  file.models.emplace("core", train_forest(data, params));
  file.feature_names.emplace("core", std::vector<std::string>{"f0", "f1"});
  const std::string good = model_to_string(file);

  const auto load_from = [](std::string text) {
    std::istringstream in(text);
    return load_model(in);
  };
  CHECK_NOTHROW(load_from(good));
  CHECK_THROWS(load_from("not json at all"));

  std::string wrong_format = good;
  wrong_format.replace(wrong_format.find("hpcfd-classifier-array"), 22, "something-else-entirely");
  CHECK_THROWS(load_from(wrong_format));

  std::string wrong_version = good;
  wrong_version.replace(wrong_version.find("\"version\": 1"), 12, "\"version\": 9");
  CHECK_THROWS(load_from(wrong_version));

  std::string truncated = good.substr(0, good.size() / 2);
  CHECK_THROWS(load_from(truncated));
}

TEST_CASE("tree model validation rejects broken arenas") {
  // Child index pointing backwards (cycle) and out-of-range features.
  std::vector<TreeNode> cyclic = {
      TreeNode{0, 0.5, 1, 2, {2, 2}},
      TreeNode{0, 0.25, 0, 2, {1, 1}},  // left points back to the root
      TreeNode{-1, 0, -1, -1, {1, 1}},
  };
  CHECK_THROWS(TreeModel(std::move(cyclic), 1, {"A", "B"}));

  std::vector<TreeNode> bad_feature = {
      TreeNode{5, 0.5, 1, 2, {2, 2}},
      TreeNode{-1, 0, -1, -1, {1, 1}},
      TreeNode{-1, 0, -1, -1, {1, 1}},
  };
  CHECK_THROWS(TreeModel(std::move(bad_feature), 1, {"A", "B"}));

  std::vector<TreeNode> half_leaf = {TreeNode{0, 0.5, 1, -1, {1, 1}},
                                     TreeNode{-1, 0, -1, -1, {1, 1}}};
  CHECK_THROWS(TreeModel(std::move(half_leaf), 1, {"A", "B"}));
}
