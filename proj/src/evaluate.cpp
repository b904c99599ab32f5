#include "hpcfd/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "hpcfd/labeling.hpp"
#include "hpcfd/rng.hpp"

namespace hpcfd::evaluate {

namespace {

std::vector<std::string> fault_class_name_list() {
  std::vector<std::string> names;
  names.reserve(kFaultClassCount);
  for (const auto name : kFaultClassNames) names.emplace_back(name);
  return names;
}

}  // namespace

std::string_view to_string(FoldMode mode) {
  return mode == FoldMode::time_ordered ? "time_ordered" : "shuffled";
}

FoldPlan plan_folds(std::size_t n, int k, FoldMode mode, std::uint64_t seed) {
  if (k <= 0) throw std::invalid_argument("plan_folds: k must be positive");
  if (n < static_cast<std::size_t>(k)) {
    throw std::invalid_argument("plan_folds: fewer vectors than folds");
  }

  FoldPlan plan;
  plan.k = k;
  plan.mode = mode;
  plan.assignment.resize(n);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (mode == FoldMode::shuffled) {
    Rng rng(seed);
    rng.shuffle(order);
  }

  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t remainder = n % static_cast<std::size_t>(k);
  std::size_t position = 0;
  for (int fold = 0; fold < k; ++fold) {
    const std::size_t size = base + (static_cast<std::size_t>(fold) < remainder ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) {
      plan.assignment[order[position++]] = fold;
    }
  }
  return plan;
}

Confusion confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                           std::size_t class_count) {
  if (y_true.size() != y_pred.size()) {
    throw std::invalid_argument("confusion_matrix: length mismatch");
  }
  Confusion confusion(class_count, std::vector<std::int64_t>(class_count, 0));
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= class_count ||
        static_cast<std::size_t>(p) >= class_count) {
      throw std::invalid_argument("confusion_matrix: class id out of range");
    }
    ++confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }
  return confusion;
}

ScoreReport class_scores(const Confusion& confusion, Average average) {
  const std::size_t k = confusion.size();
  std::vector<std::int64_t> col_sums(k, 0);
  for (const auto& row : confusion) {
    if (row.size() != k) throw std::invalid_argument("class_scores: matrix not square");
    for (std::size_t j = 0; j < k; ++j) col_sums[j] += row[j];
  }

  ScoreReport report;
  report.per_class.resize(k);
  double f_sum = 0.0;
  double weight_sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const std::int64_t tp = confusion[c][c];
    std::int64_t row_sum = 0;
    for (std::int64_t v : confusion[c]) row_sum += v;
    const std::int64_t fp = col_sums[c] - tp;
    const std::int64_t fn = row_sum - tp;

    ClassScore& score = report.per_class[c];
    score.support = row_sum;
    score.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    score.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    score.fscore = (score.precision + score.recall) > 0.0
                       ? 2.0 * score.precision * score.recall /
                             (score.precision + score.recall)
                       : 0.0;
    if (row_sum > 0) {
      const double weight = average == Average::macro ? 1.0 : static_cast<double>(row_sum);
      f_sum += weight * score.fscore;
      weight_sum += weight;
    }
  }
  report.overall_fscore = weight_sum > 0.0 ? f_sum / weight_sum : 0.0;
  return report;
}

classify::Dataset to_dataset(const std::vector<features::FeatureVector>& vectors,
                             LabelMethod method) {
  if (vectors.empty()) throw std::invalid_argument("to_dataset: no vectors");
  classify::Dataset data;
  data.class_names = fault_class_name_list();
  data.feature_count = vectors[0].values.size();
  data.x.reserve(vectors.size() * data.feature_count);
  data.y.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (v.values.size() != data.feature_count) {
      throw std::invalid_argument("to_dataset: inconsistent vector lengths");
    }
    data.x.insert(data.x.end(), v.values.begin(), v.values.end());
    data.y.push_back(static_cast<int>(v.label(method)));
  }
  return data;
}

EvaluationReport cross_validate(const std::vector<features::FeatureVector>& vectors,
                                const classify::ForestParams& params,
                                const FoldPlan& plan, LabelMethod method,
                                bool exclude_ambiguous, Average average) {
  std::vector<features::FeatureVector> filtered_storage;
  const std::vector<features::FeatureVector>* working = &vectors;
  if (exclude_ambiguous) {
    filtered_storage = labeling::filter_ambiguous(vectors);
    working = &filtered_storage;
  }

  const std::size_t n = working->size();
  if (plan.assignment.size() != n) {
    throw std::invalid_argument(
        "cross_validate: fold plan does not cover the effective vector count (" +
        std::to_string(plan.assignment.size()) + " vs " + std::to_string(n) + ")");
  }

  EvaluationReport report;
  report.confusion.assign(kFaultClassCount,
                          std::vector<std::int64_t>(kFaultClassCount, 0));

  const Rng master(params.seed);
  for (int fold = 0; fold < plan.k; ++fold) {
    classify::Dataset train;
    train.class_names = fault_class_name_list();
    std::vector<std::size_t> test_rows;
    std::size_t train_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (plan.assignment[i] == fold) {
        test_rows.push_back(i);
      } else {
        ++train_count;
      }
    }
    if (train_count == 0 || test_rows.empty()) {
      throw std::invalid_argument("cross_validate: empty train or test fold");
    }
    train.feature_count = (*working)[0].values.size();
    train.x.reserve(train_count * train.feature_count);
    train.y.reserve(train_count);
    for (std::size_t i = 0; i < n; ++i) {
      if (plan.assignment[i] == fold) continue;
      const auto& v = (*working)[i];
      train.x.insert(train.x.end(), v.values.begin(), v.values.end());
      train.y.push_back(static_cast<int>(v.label(method)));
    }

    classify::ForestParams fold_params = params;
    fold_params.seed = master.derive_seed(static_cast<std::uint64_t>(fold));
    const classify::ForestModel model = classify::train_forest(train, fold_params);

    Confusion fold_confusion(kFaultClassCount,
                             std::vector<std::int64_t>(kFaultClassCount, 0));
    for (std::size_t i : test_rows) {
      const auto& v = (*working)[i];
      const int truth = static_cast<int>(v.label(method));
      const int predicted = model.predict(v.values);
      ++fold_confusion[truth][predicted];
      ++report.confusion[truth][predicted];
    }
    report.fold_reports.push_back(class_scores(fold_confusion, average));
  }

  report.aggregate = class_scores(report.confusion, average);
  return report;
}

Timing measure_overhead(const Trace& trace, const features::WindowSpec& spec,
                        const classify::ForestModel& model, int repetitions) {
  using clock = std::chrono::steady_clock;
  if (repetitions < 1) throw std::invalid_argument("measure_overhead: repetitions < 1");
  spec.validate();
  if (trace.length() < static_cast<std::size_t>(spec.length_seconds)) {
    throw std::invalid_argument("measure_overhead: trace shorter than one window");
  }

  const features::Window window{trace.start_time(),
                                trace.start_time() + spec.length_seconds};
  std::vector<features::FeatureVector> sample_vectors;

  Timing timing;
  double checksum = 0.0;
  const auto featurize_start = clock::now();
  for (int rep = 0; rep < repetitions; ++rep) {
    sample_vectors.clear();
    for (int core : trace.core_ids()) {
      sample_vectors.push_back(features::build_feature_vector(trace, core, window, spec));
      checksum += sample_vectors.back().values[0];
    }
  }
  const auto featurize_end = clock::now();
  timing.featurize_ms_per_window =
      std::chrono::duration<double, std::milli>(featurize_end - featurize_start).count() /
      repetitions;

  if (sample_vectors.empty() || sample_vectors[0].values.size() != model.feature_count()) {
    throw std::invalid_argument("measure_overhead: model does not match trace features");
  }
  int vote = 0;
  const auto predict_start = clock::now();
  for (int rep = 0; rep < repetitions; ++rep) {
    vote += model.predict(sample_vectors[0].values);
  }
  const auto predict_end = clock::now();
  timing.predict_ms_per_vector =
      std::chrono::duration<double, std::milli>(predict_end - predict_start).count() /
      repetitions;

  volatile double sink = checksum + vote;  // keep the measured work observable
  (void)sink;
  return timing;
}

}  // namespace hpcfd::evaluate
