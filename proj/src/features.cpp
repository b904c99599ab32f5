#include "hpcfd/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "hpcfd/csv.hpp"
#include "hpcfd/rng.hpp"

namespace hpcfd::features {

namespace {

constexpr std::size_t kStatCount = kStatisticNames.size();

void append_feature_names(std::vector<std::string>& out, const char* scope,
                          const std::vector<std::string>& metrics) {
  for (const auto& metric : metrics) {
    for (const char* stat : kStatisticNames) {
      out.push_back(std::string(scope) + "." + metric + "|" + stat);
    }
  }
}

}  // namespace

void WindowSpec::validate() const {
  if (length_seconds <= 0 || step_seconds <= 0) {
    throw std::invalid_argument("window spec: length and step must be positive");
  }
  if (step_seconds > length_seconds) {
    throw std::invalid_argument("window spec: step must not exceed length");
  }
}

FeatureLayout FeatureLayout::for_trace(const Trace& trace) {
  FeatureLayout layout;
  layout.core_metrics = trace.core_metric_names();
  layout.node_metrics = trace.node_metric_names();
  append_feature_names(layout.feature_names, "core", layout.core_metrics);
  append_feature_names(layout.feature_names, "node", layout.node_metrics);
  return layout;
}

FeatureLayout FeatureLayout::from_feature_names(std::vector<std::string> names) {
  FeatureLayout layout;
  for (std::size_t i = 0; i < names.size(); i += kStatCount) {
    const std::string& first = names[i];
    const std::size_t bar = first.rfind('|');
    const std::size_t dot = first.find('.');
    if (bar == std::string::npos || dot == std::string::npos || dot > bar) {
      throw std::runtime_error("bad feature name '" + first + "'");
    }
    const std::string scope = first.substr(0, dot);
    const std::string metric = first.substr(dot + 1, bar - dot - 1);
    if (i + kStatCount > names.size()) {
      throw std::runtime_error("feature names truncated mid-metric");
    }
    for (std::size_t s = 0; s < kStatCount; ++s) {
      const std::string expected = scope + "." + metric + "|" + kStatisticNames[s];
      if (names[i + s] != expected) {
        throw std::runtime_error("feature name '" + names[i + s] + "' out of order (expected '" +
                                 expected + "')");
      }
    }
    if (scope == "core") {
      if (!layout.node_metrics.empty()) {
        throw std::runtime_error("feature names: core block must precede node block");
      }
      layout.core_metrics.push_back(metric);
    } else if (scope == "node") {
      layout.node_metrics.push_back(metric);
    } else {
      throw std::runtime_error("feature name '" + first + "' has unknown scope");
    }
  }
  if (!std::is_sorted(layout.core_metrics.begin(), layout.core_metrics.end()) ||
      !std::is_sorted(layout.node_metrics.begin(), layout.node_metrics.end())) {
    throw std::runtime_error("feature names: metrics not sorted");
  }
  layout.feature_names = std::move(names);
  return layout;
}

FeatureVector build_feature_vector(const Trace& trace, int core_id, Window window,
                                   const WindowSpec& spec) {
  spec.validate();
  if (window.end - window.start != spec.length_seconds) {
    throw std::invalid_argument("build_feature_vector: window span != window length");
  }
  if (window.start < trace.start_time() || window.end > trace.end_time()) {
    throw std::invalid_argument("build_feature_vector: window outside trace");
  }
  const auto core = trace.core_index(core_id);
  if (!core) {
    throw std::invalid_argument("build_feature_vector: core " + std::to_string(core_id) +
                                " absent from trace");
  }

  const std::size_t offset = static_cast<std::size_t>(window.start - trace.start_time());
  const std::size_t len = static_cast<std::size_t>(spec.length_seconds);
  const std::size_t core_count = trace.core_metric_names().size();
  const std::size_t node_count = trace.node_metric_names().size();

  FeatureVector fv;
  fv.window_end = window.end;
  fv.core_id = core_id;
  fv.values.resize((core_count + node_count) * kStatCount);

  std::vector<double> scratch(len);
  double* out = fv.values.data();
  for (std::size_t m = 0; m < core_count; ++m, out += kStatCount) {
    compute_statistics_into(trace.core_column(*core, m).subspan(offset, len), scratch, out);
  }
  for (std::size_t m = 0; m < node_count; ++m, out += kStatCount) {
    compute_statistics_into(trace.node_column(m).subspan(offset, len), scratch, out);
  }
  return fv;
}

void for_each_feature_vector(const Trace& trace, const WindowSpec& spec,
                             std::span<const int> cores,
                             const std::function<void(FeatureVector&&)>& sink) {
  spec.validate();
  if (trace.length() < static_cast<std::size_t>(spec.length_seconds)) {
    throw std::invalid_argument("featurize: trace shorter than one window");
  }
  std::vector<std::size_t> core_indices;
  for (int core_id : cores) {
    const auto idx = trace.core_index(core_id);
    if (!idx) {
      throw std::invalid_argument("featurize: core " + std::to_string(core_id) +
                                  " absent from trace");
    }
    core_indices.push_back(*idx);
  }

  const std::size_t len = static_cast<std::size_t>(spec.length_seconds);
  const std::size_t node_count = trace.node_metric_names().size();
  const std::size_t core_count = trace.core_metric_names().size();

  std::vector<double> scratch(len);
  // Node-level statistics are shared by every core's vector for a window.
  std::vector<double> node_stats(node_count * kStatCount);

  for (std::size_t offset = 0; offset + len <= trace.length();
       offset += static_cast<std::size_t>(spec.step_seconds)) {
    const std::int64_t window_end =
        trace.start_time() + static_cast<std::int64_t>(offset + len);
    for (std::size_t m = 0; m < node_count; ++m) {
      compute_statistics_into(trace.node_column(m).subspan(offset, len), scratch,
                              node_stats.data() + m * kStatCount);
    }
    for (std::size_t k = 0; k < cores.size(); ++k) {
      FeatureVector fv;
      fv.window_end = window_end;
      fv.core_id = cores[k];
      fv.values.resize((core_count + node_count) * kStatCount);
      double* out = fv.values.data();
      for (std::size_t m = 0; m < core_count; ++m, out += kStatCount) {
        compute_statistics_into(trace.core_column(core_indices[k], m).subspan(offset, len),
                                scratch, out);
      }
      std::copy(node_stats.begin(), node_stats.end(), out);
      sink(std::move(fv));
    }
  }
}

std::vector<FeatureVector> stream_feature_vectors(const Trace& trace,
                                                  const WindowSpec& spec,
                                                  std::span<const int> cores) {
  std::vector<FeatureVector> out;
  for_each_feature_vector(trace, spec, cores,
                          [&](FeatureVector&& fv) { out.push_back(std::move(fv)); });
  return out;
}

std::vector<FeatureVector> sample_one_core_per_window(
    const std::vector<FeatureVector>& vectors, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FeatureVector> out;
  std::size_t i = 0;
  while (i < vectors.size()) {
    std::size_t j = i;
    while (j < vectors.size() && vectors[j].window_end == vectors[i].window_end) ++j;
    out.push_back(vectors[i + rng.below(j - i)]);
    i = j;
  }
  return out;
}

void write_feature_csv_header(const FeatureLayout& layout, std::ostream& out) {
  out << "window_end,core,label,ambiguous";
  for (const auto& name : layout.feature_names) out << ',' << name;
  out << '\n';
}

void write_feature_csv_row(const FeatureVector& vector, LabelMethod method,
                           std::ostream& out) {
  out << vector.window_end << ',' << vector.core_id << ','
      << to_string(vector.label(method)) << ',' << (vector.ambiguous ? 1 : 0);
  for (double v : vector.values) out << ',' << format_double(v);
  out << '\n';
}

FeatureFile read_feature_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next_row(fields) || fields.size() < 4 || fields[0] != "window_end" ||
      fields[1] != "core" || fields[2] != "label" || fields[3] != "ambiguous") {
    throw std::runtime_error(
        "feature file: expected header window_end,core,label,ambiguous,<features...>");
  }
  FeatureFile file;
  file.feature_names.assign(fields.begin() + 4, fields.end());
  while (reader.next_row(fields)) {
    if (fields.size() != file.feature_names.size() + 4) {
      throw std::runtime_error("feature file line " + std::to_string(reader.line()) +
                               ": field count mismatch");
    }
    FeatureVector fv;
    fv.window_end = parse_int_field(fields[0], reader.line());
    fv.core_id = static_cast<int>(parse_int_field(fields[1], reader.line()));
    fv.label_mode = fv.label_recent = parse_fault_class(fields[2]);
    fv.ambiguous = parse_int_field(fields[3], reader.line()) != 0;
    fv.values.reserve(file.feature_names.size());
    for (std::size_t i = 4; i < fields.size(); ++i) {
      fv.values.push_back(parse_double_field(fields[i], reader.line()));
    }
    file.vectors.push_back(std::move(fv));
  }
  return file;
}

StreamingFeaturizer::StreamingFeaturizer(FeatureLayout layout, WindowSpec spec,
                                         std::vector<int> cores)
    : layout_(std::move(layout)), spec_(spec), cores_(std::move(cores)) {
  spec_.validate();
  std::sort(cores_.begin(), cores_.end());
  if (std::adjacent_find(cores_.begin(), cores_.end()) != cores_.end()) {
    throw std::invalid_argument("streaming featurizer: duplicate core ids");
  }
  const std::size_t columns =
      layout_.node_metrics.size() + cores_.size() * layout_.core_metrics.size();
  ring_.assign(columns, std::vector<double>(static_cast<std::size_t>(spec_.length_seconds)));
  window_buffer_.resize(static_cast<std::size_t>(spec_.length_seconds));
  scratch_.resize(static_cast<std::size_t>(spec_.length_seconds));
  node_stats_.resize(layout_.node_metrics.size() * kStatCount);
}

std::vector<FeatureVector> StreamingFeaturizer::push(const MetricSample& sample) {
  if (count_ == 0) {
    start_time_ = sample.timestamp;
  } else if (sample.timestamp != start_time_ + count_) {
    throw std::runtime_error("streaming featurizer: expected timestamp " +
                             std::to_string(start_time_ + count_) + ", got " +
                             std::to_string(sample.timestamp));
  }
  const std::size_t len = static_cast<std::size_t>(spec_.length_seconds);
  const std::size_t slot = static_cast<std::size_t>(count_ % spec_.length_seconds);

  std::size_t column = 0;
  for (const auto& name : layout_.node_metrics) {
    const auto it = sample.node_values.find(name);
    if (it == sample.node_values.end()) {
      throw std::runtime_error("streaming featurizer: missing node metric '" + name + "'");
    }
    ring_[column++][slot] = it->second;
  }
  for (int core : cores_) {
    for (const auto& name : layout_.core_metrics) {
      const auto it = sample.core_values.find(std::make_pair(core, name));
      if (it == sample.core_values.end()) {
        throw std::runtime_error("streaming featurizer: missing metric '" + name +
                                 "' for core " + std::to_string(core));
      }
      ring_[column++][slot] = it->second;
    }
  }

  ++count_;
  std::vector<FeatureVector> emitted;
  if (count_ < spec_.length_seconds ||
      (count_ - spec_.length_seconds) % spec_.step_seconds != 0) {
    return emitted;
  }

  // Copy each ring column into time order so results match the batch path
  // bit for bit.
  const std::size_t head = static_cast<std::size_t>(count_ % spec_.length_seconds);
  const auto linearize = [&](const std::vector<double>& ring) {
    for (std::size_t i = 0; i < len; ++i) {
      window_buffer_[i] = ring[(head + i) % len];
    }
  };

  for (std::size_t m = 0; m < layout_.node_metrics.size(); ++m) {
    linearize(ring_[m]);
    compute_statistics_into(window_buffer_, scratch_, node_stats_.data() + m * kStatCount);
  }
  const std::size_t core_metric_count = layout_.core_metrics.size();
  for (std::size_t k = 0; k < cores_.size(); ++k) {
    FeatureVector fv;
    fv.window_end = start_time_ + count_;
    fv.core_id = cores_[k];
    fv.values.resize(layout_.size());
    double* out = fv.values.data();
    const std::size_t base = layout_.node_metrics.size() + k * core_metric_count;
    for (std::size_t m = 0; m < core_metric_count; ++m, out += kStatCount) {
      linearize(ring_[base + m]);
      compute_statistics_into(window_buffer_, scratch_, out);
    }
    std::copy(node_stats_.begin(), node_stats_.end(), out);
    emitted.push_back(std::move(fv));
  }
  return emitted;
}

OnlinePostProcessor::OnlinePostProcessor(std::vector<std::string> node_base_metrics,
                                         std::vector<std::string> core_base_metrics,
                                         std::set<std::string> counter_metrics,
                                         ingest::AllocationSchedule allocation)
    : node_base_(std::move(node_base_metrics)),
      core_base_(std::move(core_base_metrics)),
      counters_(std::move(counter_metrics)),
      allocation_(std::move(allocation)) {}

MetricSample OnlinePostProcessor::process(const MetricSample& raw) {
  MetricSample out;
  out.timestamp = raw.timestamp;

  const auto post_node_value = [&](const std::string& name) -> double {
    if (name == ingest::kAllocatedMetric) {
      return allocation_.node_allocated_at(raw.timestamp) ? 1.0 : 0.0;
    }
    const auto it = raw.node_values.find(name);
    if (it == raw.node_values.end()) {
      throw std::runtime_error("stream: missing node metric '" + name + "'");
    }
    if (counters_.count(name)) {
      const double prev = first_ ? 0.0 : prev_raw_node_[name];
      const double diff = first_ ? 0.0 : it->second - prev;
      prev_raw_node_[name] = it->second;
      return diff < 0.0 ? 0.0 : diff;
    }
    return it->second;
  };
  const auto post_core_value = [&](int core, const std::string& name) -> double {
    if (name == ingest::kAllocatedMetric) {
      return allocation_.core_allocated_at(core, raw.timestamp) ? 1.0 : 0.0;
    }
    const auto it = raw.core_values.find(std::make_pair(core, name));
    if (it == raw.core_values.end()) {
      throw std::runtime_error("stream: missing metric '" + name + "' for core " +
                               std::to_string(core));
    }
    if (counters_.count(name)) {
      const auto key = std::make_pair(core, name);
      const double prev = first_ ? 0.0 : prev_raw_core_[key];
      const double diff = first_ ? 0.0 : it->second - prev;
      prev_raw_core_[key] = it->second;
      return diff < 0.0 ? 0.0 : diff;
    }
    return it->second;
  };

  std::vector<int> cores;
  for (const auto& [key, value] : raw.core_values) {
    if (cores.empty() || cores.back() != key.first) cores.push_back(key.first);
  }

  for (const auto& name : node_base_) {
    const double value = post_node_value(name);
    const double prev = first_ ? value : prev_post_node_[name];
    out.node_values.emplace(name, value);
    out.node_values.emplace(name + ingest::kDerivSuffix, first_ ? 0.0 : value - prev);
    prev_post_node_[name] = value;
  }
  for (int core : cores) {
    for (const auto& name : core_base_) {
      const auto key = std::make_pair(core, name);
      const double value = post_core_value(core, name);
      const double prev = first_ ? value : prev_post_core_[key];
      out.core_values.emplace(key, value);
      out.core_values.emplace(std::make_pair(core, name + ingest::kDerivSuffix),
                              first_ ? 0.0 : value - prev);
      prev_post_core_[key] = value;
    }
  }
  first_ = false;
  return out;
}

}  // namespace hpcfd::features
