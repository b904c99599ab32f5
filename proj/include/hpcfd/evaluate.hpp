#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hpcfd/classify.hpp"
#include "hpcfd/fault.hpp"
#include "hpcfd/features.hpp"

namespace hpcfd::evaluate {

enum class FoldMode { time_ordered, shuffled };

std::string_view to_string(FoldMode mode);

/// Fold assignment for n vectors: sizes differ by at most one (larger folds
/// first); time-ordered folds are contiguous index ranges, shuffled folds come
/// from a seeded permutation.
struct FoldPlan {
  int k = 5;
  FoldMode mode = FoldMode::time_ordered;
  std::vector<int> assignment;
};

FoldPlan plan_folds(std::size_t n, int k, FoldMode mode, std::uint64_t seed = 0);

/// confusion[i][j] = count of true class i predicted as class j.
using Confusion = std::vector<std::vector<std::int64_t>>;

Confusion confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                           std::size_t class_count);

struct ClassScore {
  double precision = 0;
  double recall = 0;
  double fscore = 0;
  std::int64_t support = 0;
};

enum class Average { macro, weighted };

struct ScoreReport {
  std::vector<ClassScore> per_class;
  double overall_fscore = 0;  // over classes with support > 0
};

/// Precision/recall/F per class with the 0/0 -> 0 convention; the overall
/// F-score averages classes with support > 0 (macro by default).
ScoreReport class_scores(const Confusion& confusion, Average average = Average::macro);

struct Timing {
  double featurize_ms_per_window = 0;
  double predict_ms_per_vector = 0;
};

struct EvaluationReport {
  ScoreReport aggregate;
  Confusion confusion;
  std::vector<ScoreReport> fold_reports;
  Timing timing;
};

/// K-fold cross-validation over labeled vectors: train on the remainder,
/// test on each fold, pool the confusion counts, then score. When
/// exclude_ambiguous is set the filtering applies to both training and test
/// sides; the plan must then cover the filtered count.
EvaluationReport cross_validate(const std::vector<features::FeatureVector>& vectors,
                                const classify::ForestParams& params,
                                const FoldPlan& plan, LabelMethod method,
                                bool exclude_ambiguous,
                                Average average = Average::macro);

/// Wall-clock means over >= `repetitions` runs of (a) building all per-core
/// feature vectors for one window single-threaded and (b) one forest
/// prediction. The trace must already be post-processed.
Timing measure_overhead(const Trace& trace, const features::WindowSpec& spec,
                        const classify::ForestModel& model, int repetitions = 20);

/// Dataset adapter: labels become fault-class ids over the full 9-class set.
classify::Dataset to_dataset(const std::vector<features::FeatureVector>& vectors,
                             LabelMethod method);

}  // namespace hpcfd::evaluate
