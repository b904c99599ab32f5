#include "hpcfd/trace.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "hpcfd/csv.hpp"

namespace hpcfd {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::runtime_error(message);
}

bool sorted_unique_strings(const std::vector<std::string>& names) {
  for (std::size_t i = 1; i < names.size(); ++i) {
    if (!(names[i - 1] < names[i])) return false;
  }
  return true;
}

}  // namespace

Trace Trace::build(std::int64_t start_time, std::size_t length,
                   std::vector<std::string> node_names,
                   std::vector<std::vector<double>> node_columns,
                   std::vector<int> core_ids,
                   std::vector<std::string> core_names,
                   std::vector<std::vector<std::vector<double>>> core_columns) {
  require(node_names.size() == node_columns.size(), "trace: node name/column mismatch");
  require(core_columns.size() == core_ids.size(), "trace: core id/column mismatch");
  require(sorted_unique_strings(node_names), "trace: node metric names must be sorted and unique");
  require(sorted_unique_strings(core_names), "trace: core metric names must be sorted and unique");
  require(std::is_sorted(core_ids.begin(), core_ids.end()) &&
              std::adjacent_find(core_ids.begin(), core_ids.end()) == core_ids.end(),
          "trace: core ids must be sorted and unique");
  for (const auto& col : node_columns) {
    require(col.size() == length, "trace: node column length mismatch");
  }
  for (const auto& per_core : core_columns) {
    require(per_core.size() == core_names.size(), "trace: core metric/column mismatch");
    for (const auto& col : per_core) {
      require(col.size() == length, "trace: core column length mismatch");
    }
  }

  Trace t;
  t.start_time_ = start_time;
  t.length_ = length;
  t.node_names_ = std::move(node_names);
  t.node_columns_ = std::move(node_columns);
  t.core_ids_ = std::move(core_ids);
  t.core_names_ = std::move(core_names);
  t.core_columns_ = std::move(core_columns);
  return t;
}

Trace Trace::from_samples(const std::vector<MetricSample>& samples) {
  if (samples.empty()) return Trace{};

  const MetricSample& first = samples.front();
  std::vector<std::string> node_names;
  node_names.reserve(first.node_values.size());
  for (const auto& [name, value] : first.node_values) node_names.push_back(name);

  std::vector<int> core_ids;
  std::vector<std::string> core_names;
  for (const auto& [key, value] : first.core_values) {
    if (core_ids.empty() || core_ids.back() != key.first) core_ids.push_back(key.first);
  }
  std::sort(core_ids.begin(), core_ids.end());
  core_ids.erase(std::unique(core_ids.begin(), core_ids.end()), core_ids.end());
  for (const auto& [key, value] : first.core_values) {
    if (key.first == core_ids.front()) core_names.push_back(key.second);
  }

  const std::size_t n = samples.size();
  std::vector<std::vector<double>> node_columns(node_names.size(),
                                                std::vector<double>(n));
  std::vector<std::vector<std::vector<double>>> core_columns(
      core_ids.size(),
      std::vector<std::vector<double>>(core_names.size(), std::vector<double>(n)));

  for (std::size_t i = 0; i < n; ++i) {
    const MetricSample& s = samples[i];
    if (i > 0) {
      require(s.timestamp == samples[i - 1].timestamp + 1,
              "trace: timestamps must increase in 1 s steps (gap or reorder at t=" +
                  std::to_string(s.timestamp) + ")");
    }
    require(s.node_values.size() == node_names.size(),
            "trace: node metric set differs at t=" + std::to_string(s.timestamp));
    std::size_t m = 0;
    for (const auto& [name, value] : s.node_values) {
      require(name == node_names[m],
              "trace: node metric set differs at t=" + std::to_string(s.timestamp));
      require(std::isfinite(value), "trace: non-finite value for " + name);
      node_columns[m][i] = value;
      ++m;
    }
    require(s.core_values.size() == core_ids.size() * core_names.size(),
            "trace: core metric set differs at t=" + std::to_string(s.timestamp));
    auto it = s.core_values.begin();
    for (std::size_t c = 0; c < core_ids.size(); ++c) {
      for (std::size_t k = 0; k < core_names.size(); ++k, ++it) {
        require(it != s.core_values.end() && it->first.first == core_ids[c] &&
                    it->first.second == core_names[k],
                "trace: core metric set differs at t=" + std::to_string(s.timestamp));
        require(std::isfinite(it->second),
                "trace: non-finite value for core metric " + core_names[k]);
        core_columns[c][k][i] = it->second;
      }
    }
  }

  return build(first.timestamp, n, std::move(node_names), std::move(node_columns),
               std::move(core_ids), std::move(core_names), std::move(core_columns));
}

Trace Trace::merge(const Trace& a, const Trace& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  require(a.start_time_ == b.start_time_ && a.length_ == b.length_,
          "trace merge: time spans differ");

  std::vector<std::pair<std::string, const std::vector<double>*>> node;
  for (std::size_t i = 0; i < a.node_names_.size(); ++i)
    node.emplace_back(a.node_names_[i], &a.node_columns_[i]);
  for (std::size_t i = 0; i < b.node_names_.size(); ++i)
    node.emplace_back(b.node_names_[i], &b.node_columns_[i]);
  std::sort(node.begin(), node.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  for (std::size_t i = 1; i < node.size(); ++i) {
    require(node[i - 1].first != node[i].first,
            "trace merge: duplicate node metric '" + node[i].first + "'");
  }

  const bool a_cores = !a.core_ids_.empty();
  const bool b_cores = !b.core_ids_.empty();
  std::vector<int> core_ids;
  std::vector<std::pair<std::string, std::pair<const Trace*, std::size_t>>> core;
  if (a_cores && b_cores) {
    require(a.core_ids_ == b.core_ids_, "trace merge: core id sets differ");
  }
  core_ids = a_cores ? a.core_ids_ : b.core_ids_;
  for (std::size_t i = 0; i < a.core_names_.size(); ++i)
    core.emplace_back(a.core_names_[i], std::make_pair(&a, i));
  for (std::size_t i = 0; i < b.core_names_.size(); ++i)
    core.emplace_back(b.core_names_[i], std::make_pair(&b, i));
  std::sort(core.begin(), core.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  for (std::size_t i = 1; i < core.size(); ++i) {
    require(core[i - 1].first != core[i].first,
            "trace merge: duplicate core metric '" + core[i].first + "'");
  }

  std::vector<std::string> node_names;
  std::vector<std::vector<double>> node_columns;
  for (auto& [name, col] : node) {
    node_names.push_back(name);
    node_columns.push_back(*col);
  }
  std::vector<std::string> core_names;
  std::vector<std::vector<std::vector<double>>> core_columns(
      core_ids.size(), std::vector<std::vector<double>>());
  for (auto& [name, source] : core) {
    core_names.push_back(name);
    const Trace* src = source.first;
    for (std::size_t c = 0; c < core_ids.size(); ++c) {
      core_columns[c].push_back(src->core_columns_[c][source.second]);
    }
  }

  return build(a.start_time_, a.length_, std::move(node_names), std::move(node_columns),
               std::move(core_ids), std::move(core_names), std::move(core_columns));
}

std::optional<std::size_t> Trace::node_metric_index(std::string_view name) const {
  auto it = std::lower_bound(node_names_.begin(), node_names_.end(), name);
  if (it == node_names_.end() || *it != name) return std::nullopt;
  return static_cast<std::size_t>(it - node_names_.begin());
}

std::optional<std::size_t> Trace::core_metric_index(std::string_view name) const {
  auto it = std::lower_bound(core_names_.begin(), core_names_.end(), name);
  if (it == core_names_.end() || *it != name) return std::nullopt;
  return static_cast<std::size_t>(it - core_names_.begin());
}

std::optional<std::size_t> Trace::core_index(int core_id) const {
  auto it = std::lower_bound(core_ids_.begin(), core_ids_.end(), core_id);
  if (it == core_ids_.end() || *it != core_id) return std::nullopt;
  return static_cast<std::size_t>(it - core_ids_.begin());
}

std::span<const double> Trace::node_column(std::size_t metric) const {
  return node_columns_.at(metric);
}

std::span<const double> Trace::core_column(std::size_t core, std::size_t metric) const {
  return core_columns_.at(core).at(metric);
}

MetricSample Trace::sample_at(std::size_t i) const {
  if (i >= length_) throw std::out_of_range("trace: sample index out of range");
  MetricSample s;
  s.timestamp = start_time_ + static_cast<std::int64_t>(i);
  for (std::size_t m = 0; m < node_names_.size(); ++m) {
    s.node_values.emplace(node_names_[m], node_columns_[m][i]);
  }
  for (std::size_t c = 0; c < core_ids_.size(); ++c) {
    for (std::size_t m = 0; m < core_names_.size(); ++m) {
      s.core_values.emplace(std::make_pair(core_ids_[c], core_names_[m]),
                            core_columns_[c][m][i]);
    }
  }
  return s;
}

std::vector<MetricSample> Trace::to_samples() const {
  std::vector<MetricSample> samples;
  samples.reserve(length_);
  for (std::size_t i = 0; i < length_; ++i) samples.push_back(sample_at(i));
  return samples;
}

void write_stream_csv(const Trace& trace, std::ostream& out) {
  out << "time,scope,metric,value\n";
  for (std::size_t i = 0; i < trace.length(); ++i) {
    const std::int64_t t = trace.start_time() + static_cast<std::int64_t>(i);
    for (std::size_t m = 0; m < trace.node_metric_names().size(); ++m) {
      out << t << ",node," << trace.node_metric_names()[m] << ','
          << format_double(trace.node_column(m)[i]) << '\n';
    }
    for (std::size_t c = 0; c < trace.core_ids().size(); ++c) {
      for (std::size_t m = 0; m < trace.core_metric_names().size(); ++m) {
        out << t << ",core:" << trace.core_ids()[c] << ','
            << trace.core_metric_names()[m] << ','
            << format_double(trace.core_column(c, m)[i]) << '\n';
      }
    }
  }
}

StreamReader::StreamReader(std::istream& in) : in_(in) {}

void StreamReader::read_header() {
  CsvReader reader(in_);
  std::vector<std::string> fields;
  if (!reader.next_row(fields)) {
    eof_ = true;
  } else if (fields != std::vector<std::string>{"time", "scope", "metric", "value"}) {
    throw std::runtime_error("stream: expected header time,scope,metric,value");
  }
  line_ = reader.line();
  header_read_ = true;
}

std::optional<MetricSample> StreamReader::next() {
  if (!header_read_) read_header();
  if (eof_) {
    auto done = std::move(pending_);
    pending_.reset();
    return done;
  }

  const auto insert_row = [this](const std::string& scope, const std::string& metric,
                                 double value) {
    bool inserted = false;
    if (scope == "node") {
      inserted = pending_->node_values.emplace(metric, value).second;
    } else if (scope.rfind("core:", 0) == 0) {
      const int core = static_cast<int>(parse_int_field(scope.substr(5), line_));
      if (core < 0) {
        throw std::runtime_error("stream line " + std::to_string(line_) +
                                 ": negative core id");
      }
      inserted = pending_->core_values.emplace(std::make_pair(core, metric), value).second;
    } else {
      throw std::runtime_error("stream line " + std::to_string(line_) +
                               ": unknown scope '" + scope + "'");
    }
    if (!inserted) {
      throw std::runtime_error("stream line " + std::to_string(line_) +
                               ": duplicate metric " + metric);
    }
  };

  std::string raw;
  while (std::getline(in_, raw)) {
    ++line_;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;
    const std::vector<std::string> fields = split_csv(raw);
    if (fields.size() != 4) {
      throw std::runtime_error("stream line " + std::to_string(line_) +
                               ": expected 4 fields");
    }
    const std::int64_t t = parse_int_field(fields[0], line_);
    const double value = parse_double_field(fields[3], line_);

    if (pending_ && t != pending_->timestamp) {
      if (t < pending_->timestamp) {
        throw std::runtime_error("stream line " + std::to_string(line_) +
                                 ": non-monotonic timestamp");
      }
      MetricSample done = std::move(*pending_);
      pending_ = MetricSample{};
      pending_->timestamp = t;
      insert_row(fields[1], fields[2], value);
      return done;
    }

    if (!pending_) {
      pending_ = MetricSample{};
      pending_->timestamp = t;
    }
    insert_row(fields[1], fields[2], value);
  }

  eof_ = true;
  auto done = std::move(pending_);
  pending_.reset();
  return done;
}

}  // namespace hpcfd
