#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hpcfd/fault.hpp"
#include "hpcfd/ingest.hpp"
#include "hpcfd/stats.hpp"
#include "hpcfd/trace.hpp"

namespace hpcfd::features {

struct WindowSpec {
  int length_seconds = 60;
  int step_seconds = 10;

  void validate() const;
};

/// Half-open window [start, end) over trace seconds; end is the vector's
/// timestamp.
struct Window {
  std::int64_t start = 0;
  std::int64_t end = 0;
};

/// Fixed feature ordering for one run: scoped metric names ("core.<m>" block
/// then "node.<m>" block, each sorted), with the 11 statistics per metric.
/// Feature column names are "<scoped metric>|<statistic>".
struct FeatureLayout {
  std::vector<std::string> core_metrics;  // unscoped, sorted
  std::vector<std::string> node_metrics;  // unscoped, sorted
  std::vector<std::string> feature_names;

  std::size_t size() const { return feature_names.size(); }

  static FeatureLayout for_trace(const Trace& trace);
  /// Rebuilds a layout from stored feature names (e.g. a model file); verifies
  /// the naming scheme and ordering.
  static FeatureLayout from_feature_names(std::vector<std::string> names);
};

struct FeatureVector {
  std::int64_t window_end = 0;
  int core_id = 0;
  FaultClass label_mode = FaultClass::healthy;
  FaultClass label_recent = FaultClass::healthy;
  bool ambiguous = false;
  std::vector<double> values;

  FaultClass label(LabelMethod method) const {
    return method == LabelMethod::mode ? label_mode : label_recent;
  }
};

/// Features for one core over one window (unlabeled). The window must lie
/// inside the trace and span exactly spec.length_seconds.
FeatureVector build_feature_vector(const Trace& trace, int core_id, Window window,
                                   const WindowSpec& spec);

/// Emits one vector per (window, core) in (window_end, core_id) order; the
/// first window ends at trace start + length, later ones step by
/// spec.step_seconds. Working memory stays proportional to one window.
void for_each_feature_vector(const Trace& trace, const WindowSpec& spec,
                             std::span<const int> cores,
                             const std::function<void(FeatureVector&&)>& sink);

std::vector<FeatureVector> stream_feature_vectors(const Trace& trace,
                                                  const WindowSpec& spec,
                                                  std::span<const int> cores);

/// Keeps exactly one uniformly chosen core's vector per window_end.
/// Deterministic for a fixed seed.
std::vector<FeatureVector> sample_one_core_per_window(
    const std::vector<FeatureVector>& vectors, std::uint64_t seed);

void write_feature_csv_header(const FeatureLayout& layout, std::ostream& out);
void write_feature_csv_row(const FeatureVector& vector, LabelMethod method,
                           std::ostream& out);

struct FeatureFile {
  std::vector<std::string> feature_names;
  std::vector<FeatureVector> vectors;  // label columns fill both label fields
};

FeatureFile read_feature_csv(std::istream& in);

/// Incremental featurizer over post-processed samples; emits completed
/// windows as samples arrive. Memory is bounded by one window.
class StreamingFeaturizer {
 public:
  StreamingFeaturizer(FeatureLayout layout, WindowSpec spec, std::vector<int> cores);

  /// Feeds the next second; returns vectors for any window that completed.
  std::vector<FeatureVector> push(const MetricSample& sample);

  const FeatureLayout& layout() const { return layout_; }

 private:
  FeatureLayout layout_;
  WindowSpec spec_;
  std::vector<int> cores_;
  std::int64_t start_time_ = 0;
  std::int64_t count_ = 0;
  // ring[column][slot]; columns are node metrics then per-core metrics.
  std::vector<std::vector<double>> ring_;
  std::vector<double> window_buffer_;
  std::vector<double> scratch_;
  std::vector<double> node_stats_;
};

/// Applies the ingest post-processing online for streamed classification:
/// counter differencing, the allocated metric, and first derivatives, over a
/// fixed metric set (constant removal is baked into the set, which normally
/// comes from a trained model's feature names).
class OnlinePostProcessor {
 public:
  OnlinePostProcessor(std::vector<std::string> node_base_metrics,
                      std::vector<std::string> core_base_metrics,
                      std::set<std::string> counter_metrics,
                      ingest::AllocationSchedule allocation);

  MetricSample process(const MetricSample& raw);

  const std::vector<std::string>& node_base_metrics() const { return node_base_; }
  const std::vector<std::string>& core_base_metrics() const { return core_base_; }

 private:
  std::vector<std::string> node_base_;
  std::vector<std::string> core_base_;
  std::set<std::string> counters_;
  ingest::AllocationSchedule allocation_;
  bool first_ = true;
  std::map<std::string, double> prev_raw_node_;
  std::map<std::pair<int, std::string>, double> prev_raw_core_;
  std::map<std::string, double> prev_post_node_;
  std::map<std::pair<int, std::string>, double> prev_post_core_;
};

}  // namespace hpcfd::features
