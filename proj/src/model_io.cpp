#include "hpcfd/model_io.hpp"

#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace hpcfd::classify {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kFormat = "hpcfd-classifier-array";
constexpr int kVersion = 1;

json tree_to_json(const TreeModel& tree) {
  json nodes = json::array();
  json feature = json::array();
  json threshold = json::array();
  json left = json::array();
  json right = json::array();
  json counts = json::array();
  for (const auto& node : tree.nodes()) {
    feature.push_back(node.feature);
    threshold.push_back(node.threshold);
    left.push_back(node.left);
    right.push_back(node.right);
    counts.push_back(node.counts);
  }
  json out;
  out["feature"] = std::move(feature);
  out["threshold"] = std::move(threshold);
  out["left"] = std::move(left);
  out["right"] = std::move(right);
  out["counts"] = std::move(counts);
  return out;
}

TreeModel tree_from_json(const json& j, std::size_t feature_count,
                         const std::vector<std::string>& class_names) {
  const auto& feature = j.at("feature");
  const auto& threshold = j.at("threshold");
  const auto& left = j.at("left");
  const auto& right = j.at("right");
  const auto& counts = j.at("counts");
  const std::size_t n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n ||
      counts.size() != n) {
    throw std::runtime_error("model file: tree arrays disagree on node count");
  }
  std::vector<TreeNode> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i].feature = feature[i].get<std::int32_t>();
    nodes[i].threshold = threshold[i].get<double>();
    nodes[i].left = left[i].get<std::int32_t>();
    nodes[i].right = right[i].get<std::int32_t>();
    nodes[i].counts = counts[i].get<std::vector<std::int64_t>>();
  }
  return TreeModel(std::move(nodes), feature_count, class_names);
}

json forest_to_json(const ForestModel& forest, const std::vector<std::string>& names) {
  json out;
  out["feature_names"] = names;
  out["classes"] = forest.class_names();
  json params;
  params["n_trees"] = forest.params().n_trees;
  params["features_per_split"] = forest.params().features_per_split;
  params["bootstrap"] = forest.params().bootstrap;
  params["seed"] = forest.params().seed;
  params["max_depth"] = forest.params().tree.max_depth ? json(*forest.params().tree.max_depth)
                                                       : json(nullptr);
  params["min_samples_split"] = forest.params().tree.min_samples_split;
  out["params"] = std::move(params);
  json trees = json::array();
  for (const auto& tree : forest.trees()) trees.push_back(tree_to_json(tree));
  out["trees"] = std::move(trees);
  return out;
}

std::pair<ForestModel, std::vector<std::string>> forest_from_json(const json& j) {
  const auto names = j.at("feature_names").get<std::vector<std::string>>();
  const auto classes = j.at("classes").get<std::vector<std::string>>();
  const auto& jp = j.at("params");
  ForestParams params;
  params.n_trees = jp.at("n_trees").get<int>();
  params.features_per_split = jp.at("features_per_split").get<int>();
  params.bootstrap = jp.at("bootstrap").get<bool>();
  params.seed = jp.at("seed").get<std::uint64_t>();
  if (!jp.at("max_depth").is_null()) {
    params.tree.max_depth = jp.at("max_depth").get<int>();
  }
  params.tree.min_samples_split = jp.at("min_samples_split").get<int>();

  std::vector<TreeModel> trees;
  for (const auto& jt : j.at("trees")) {
    trees.push_back(tree_from_json(jt, names.size(), classes));
  }
  return {ForestModel(std::move(trees), params), names};
}

}  // namespace

ClassifierArray ModelFile::to_array() const {
  ClassifierArray array;
  for (const auto& [type, model] : models) array.add(type, model);
  return array;
}

std::string model_to_string(const ModelFile& file) {
  json out;
  out["format"] = kFormat;
  out["version"] = kVersion;
  json meta;
  meta["window_seconds"] = file.metadata.window.length_seconds;
  meta["step_seconds"] = file.metadata.window.step_seconds;
  meta["label_method"] = std::string(to_string(file.metadata.label_method));
  meta["counter_metrics"] = file.metadata.counter_metrics;
  out["metadata"] = std::move(meta);
  json models;
  for (const auto& [type, model] : file.models) {
    models[type] = forest_to_json(model, file.feature_names.at(type));
  }
  out["models"] = std::move(models);
  return out.dump(1);
}

void save_model(const ModelFile& file, std::ostream& out) {
  out << model_to_string(file) << '\n';
}

ModelFile load_model(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model file: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) {
      throw std::runtime_error("model file: unknown format");
    }
    if (j.at("version").get<int>() != kVersion) {
      throw std::runtime_error("model file: unsupported version");
    }
    ModelFile file;
    const auto& meta = j.at("metadata");
    file.metadata.window.length_seconds = meta.at("window_seconds").get<int>();
    file.metadata.window.step_seconds = meta.at("step_seconds").get<int>();
    file.metadata.label_method =
        parse_label_method(meta.at("label_method").get<std::string>());
    file.metadata.counter_metrics =
        meta.at("counter_metrics").get<std::set<std::string>>();
    for (const auto& [type, jm] : j.at("models").items()) {
      auto [model, names] = forest_from_json(jm);
      file.models.emplace(type, std::move(model));
      file.feature_names.emplace(type, std::move(names));
    }
    return file;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model file: missing or malformed field: ") +
                             e.what());
  }
}

}  // namespace hpcfd::classify
