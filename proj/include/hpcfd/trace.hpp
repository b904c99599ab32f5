#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hpcfd {

/// One second of readings: node-wide values plus per-core values.
struct MetricSample {
  std::int64_t timestamp = 0;
  std::map<std::string, double> node_values;
  std::map<std::pair<int, std::string>, double> core_values;
};

/// Declares the reserved column names of the trace CSV dialect.
struct CsvSchema {
  std::string time_column = "time";
  std::string core_column = "core";
};

// Column-oriented metric trace: one value per metric per second, timestamps
// contiguous at 1 Hz. Metric names are kept sorted so that downstream feature
// ordering is reproducible. Instances are immutable once built.
class Trace {
 public:
  Trace() = default;

  /// Assembles a trace from pre-sorted parts. Throws on inconsistent shapes,
  /// unsorted/duplicate names or core ids.
  static Trace build(std::int64_t start_time, std::size_t length,
                     std::vector<std::string> node_names,
                     std::vector<std::vector<double>> node_columns,
                     std::vector<int> core_ids,
                     std::vector<std::string> core_names,
                     std::vector<std::vector<std::vector<double>>> core_columns);

  /// Validates the sample-sequence invariants (strictly increasing 1 s steps,
  /// identical metric sets, finite values) and converts to columns.
  static Trace from_samples(const std::vector<MetricSample>& samples);

  /// Combines two traces over the same time span. Metric names must be
  /// disjoint per scope; if both sides carry core metrics the core id sets
  /// must match.
  static Trace merge(const Trace& a, const Trace& b);

  bool empty() const { return length_ == 0; }
  std::size_t length() const { return length_; }
  std::int64_t start_time() const { return start_time_; }
  std::int64_t end_time() const {
    return start_time_ + static_cast<std::int64_t>(length_);
  }

  const std::vector<std::string>& node_metric_names() const { return node_names_; }
  const std::vector<std::string>& core_metric_names() const { return core_names_; }
  const std::vector<int>& core_ids() const { return core_ids_; }

  std::optional<std::size_t> node_metric_index(std::string_view name) const;
  std::optional<std::size_t> core_metric_index(std::string_view name) const;
  std::optional<std::size_t> core_index(int core_id) const;

  std::span<const double> node_column(std::size_t metric) const;
  std::span<const double> core_column(std::size_t core, std::size_t metric) const;

  /// Total metric columns: node metrics + core metrics over all cores.
  std::size_t column_count() const {
    return node_names_.size() + core_ids_.size() * core_names_.size();
  }

  MetricSample sample_at(std::size_t i) const;
  std::vector<MetricSample> to_samples() const;

 private:
  std::int64_t start_time_ = 0;
  std::size_t length_ = 0;
  std::vector<std::string> node_names_;
  std::vector<std::vector<double>> node_columns_;
  std::vector<int> core_ids_;
  std::vector<std::string> core_names_;
  std::vector<std::vector<std::vector<double>>> core_columns_;  // [core][metric]
};

/// Tall per-second stream rows `time,scope,metric,value` with scope `node` or
/// `core:<k>`; rows for one timestamp are contiguous. This is the stdin format
/// of the streaming classifier.
void write_stream_csv(const Trace& trace, std::ostream& out);

/// Incrementally groups tall stream rows into MetricSamples.
class StreamReader {
 public:
  explicit StreamReader(std::istream& in);

  /// Returns the next complete sample, or nullopt at end of stream.
  std::optional<MetricSample> next();

 private:
  void read_header();

  std::istream& in_;
  int line_ = 0;
  bool header_read_ = false;
  bool eof_ = false;
  std::optional<MetricSample> pending_;
};

}  // namespace hpcfd
