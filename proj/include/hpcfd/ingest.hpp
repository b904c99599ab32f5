#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hpcfd/trace.hpp"

namespace hpcfd::ingest {

/// Post-processing knobs: which metrics are monotonic counters (replaced by
/// their per-second increments) and which are dropped before anything else.
struct PostProcessConfig {
  std::set<std::string> counter_metrics;
  std::set<std::string> drop_metrics;

  void validate() const;
};

/// A benchmark-allocation interval [start, end). Scope is the whole node when
/// core is empty, otherwise a single core.
struct AllocationInterval {
  std::optional<int> core;
  std::int64_t start = 0;
  std::int64_t end = 0;
};

struct AllocationSchedule {
  std::vector<AllocationInterval> intervals;

  bool node_allocated_at(std::int64_t t) const;
  bool core_allocated_at(int core, std::int64_t t) const;

  static AllocationSchedule from_csv(std::istream& in);
  void to_csv(std::ostream& out) const;
};

/// Parses one trace CSV. A file with a core column yields per-core readings
/// (rows sharing a timestamp merge into one sample); a file without yields
/// node-level readings. Errors name the offending line.
std::vector<MetricSample> parse_trace(std::istream& in, const CsvSchema& schema = {});

/// Drops every metric whose value never changes (node metrics across all
/// samples; core metrics across all samples and cores). Returns the reduced
/// trace and the removed names.
std::pair<Trace, std::set<std::string>> remove_constant_metrics(const Trace& trace);

/// Replaces each configured counter with its per-second increment: 0 at the
/// first sample, and negative raw differences (counter resets) clamp to 0.
Trace differentiate_counters(const Trace& trace, const PostProcessConfig& config);

/// Appends a binary `allocated` metric at node scope and per core.
Trace append_allocated_metric(const Trace& trace, const AllocationSchedule& schedule);

/// Appends `<metric>.deriv` for every metric in both scopes (0 at the first
/// sample). Fails if a derivative name already exists.
Trace append_first_derivatives(const Trace& trace);

/// Full pipeline in order: drop -> remove constants -> differentiate counters
/// -> allocated -> first derivatives.
std::pair<Trace, std::set<std::string>> post_process(const Trace& trace,
                                                     const PostProcessConfig& config,
                                                     const AllocationSchedule& schedule);

void write_node_csv(const Trace& trace, std::ostream& out, const CsvSchema& schema = {});
void write_core_csv(const Trace& trace, std::ostream& out, const CsvSchema& schema = {});

/// Loads and merges one node-level and/or one core-level trace CSV.
Trace load_trace(const std::optional<std::string>& node_csv_path,
                 const std::optional<std::string>& core_csv_path,
                 const CsvSchema& schema = {});

inline constexpr const char* kAllocatedMetric = "allocated";
inline constexpr const char* kDerivSuffix = ".deriv";

}  // namespace hpcfd::ingest
