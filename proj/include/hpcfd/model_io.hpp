#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "hpcfd/classify.hpp"
#include "hpcfd/fault.hpp"
#include "hpcfd/features.hpp"

namespace hpcfd::classify {

/// Training provenance stored next to the models so the streaming classifier
/// can reproduce the featurization exactly.
struct ModelMetadata {
  features::WindowSpec window;
  LabelMethod label_method = LabelMethod::mode;
  std::set<std::string> counter_metrics;
};

/// A classifier-array model file: versioned, text-based (JSON), one forest per
/// resource type, each with its feature names and per-node arrays.
struct ModelFile {
  ModelMetadata metadata;
  std::map<std::string, ForestModel> models;
  std::map<std::string, std::vector<std::string>> feature_names;  // per resource type

  ClassifierArray to_array() const;
};

void save_model(const ModelFile& file, std::ostream& out);
ModelFile load_model(std::istream& in);

std::string model_to_string(const ModelFile& file);

}  // namespace hpcfd::classify
