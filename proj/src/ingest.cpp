#include "hpcfd/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "hpcfd/csv.hpp"

namespace hpcfd::ingest {

namespace {

std::vector<double> column_increments(std::span<const double> values) {
  std::vector<double> out(values.size());
  if (values.empty()) return out;
  out[0] = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double diff = values[i] - values[i - 1];
    out[i] = diff < 0.0 ? 0.0 : diff;  // counter reset
  }
  return out;
}

std::vector<double> column_derivative(std::span<const double> values) {
  std::vector<double> out(values.size());
  if (values.empty()) return out;
  out[0] = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) out[i] = values[i] - values[i - 1];
  return out;
}

bool is_constant(std::span<const double> values) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] != values[0]) return false;
  }
  return true;
}

struct ColumnSet {
  std::vector<std::string> node_names;
  std::vector<std::vector<double>> node_columns;
  std::vector<std::string> core_names;
  std::vector<std::vector<std::vector<double>>> core_columns;  // [core][metric]

  static ColumnSet from(const Trace& t) {
    ColumnSet s;
    s.node_names = t.node_metric_names();
    s.core_names = t.core_metric_names();
    for (std::size_t m = 0; m < s.node_names.size(); ++m) {
      s.node_columns.emplace_back(t.node_column(m).begin(), t.node_column(m).end());
    }
    s.core_columns.resize(t.core_ids().size());
    for (std::size_t c = 0; c < t.core_ids().size(); ++c) {
      for (std::size_t m = 0; m < s.core_names.size(); ++m) {
        s.core_columns[c].emplace_back(t.core_column(c, m).begin(),
                                       t.core_column(c, m).end());
      }
    }
    return s;
  }

  Trace into_trace(const Trace& like) {
    sort_by_name();
    return Trace::build(like.start_time(), like.length(), std::move(node_names),
                        std::move(node_columns), like.core_ids(), std::move(core_names),
                        std::move(core_columns));
  }

 private:
  void sort_by_name() {
    sort_scope(node_names, [this](const std::vector<std::size_t>& order) {
      node_columns = permute(node_columns, order);
    });
    sort_scope(core_names, [this](const std::vector<std::size_t>& order) {
      for (auto& per_core : core_columns) per_core = permute(per_core, order);
    });
  }

  template <typename Reorder>
  static void sort_scope(std::vector<std::string>& names, Reorder reorder) {
    std::vector<std::size_t> order(names.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });
    std::vector<std::string> sorted;
    sorted.reserve(names.size());
    for (std::size_t i : order) sorted.push_back(std::move(names[i]));
    names = std::move(sorted);
    reorder(order);
  }

  static std::vector<std::vector<double>> permute(std::vector<std::vector<double>>& cols,
                                                  const std::vector<std::size_t>& order) {
    std::vector<std::vector<double>> out;
    out.reserve(cols.size());
    for (std::size_t i : order) out.push_back(std::move(cols[i]));
    return out;
  }
};

}  // namespace

void PostProcessConfig::validate() const {
  for (const auto& name : counter_metrics) {
    if (drop_metrics.count(name)) {
      throw std::invalid_argument("post-process config: '" + name +
                                  "' is both a counter and a dropped metric");
    }
  }
}

bool AllocationSchedule::node_allocated_at(std::int64_t t) const {
  for (const auto& iv : intervals) {
    if (iv.start <= t && t < iv.end) return true;
  }
  return false;
}

bool AllocationSchedule::core_allocated_at(int core, std::int64_t t) const {
  for (const auto& iv : intervals) {
    if (iv.start <= t && t < iv.end && (!iv.core || *iv.core == core)) return true;
  }
  return false;
}

AllocationSchedule AllocationSchedule::from_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next_row(fields) ||
      fields != std::vector<std::string>{"start", "end", "scope"}) {
    throw std::runtime_error("allocation file: expected header start,end,scope");
  }
  AllocationSchedule schedule;
  while (reader.next_row(fields)) {
    if (fields.size() != 3) {
      throw std::runtime_error("allocation file line " + std::to_string(reader.line()) +
                               ": expected 3 fields");
    }
    AllocationInterval iv;
    iv.start = parse_int_field(fields[0], reader.line());
    iv.end = parse_int_field(fields[1], reader.line());
    if (fields[2] == "node") {
      iv.core = std::nullopt;
    } else if (fields[2].rfind("core:", 0) == 0) {
      iv.core = static_cast<int>(parse_int_field(fields[2].substr(5), reader.line()));
    } else {
      throw std::runtime_error("allocation file line " + std::to_string(reader.line()) +
                               ": unknown scope '" + fields[2] + "'");
    }
    if (iv.start >= iv.end) {
      throw std::runtime_error("allocation file line " + std::to_string(reader.line()) +
                               ": start must precede end");
    }
    schedule.intervals.push_back(iv);
  }
  return schedule;
}

void AllocationSchedule::to_csv(std::ostream& out) const {
  out << "start,end,scope\n";
  for (const auto& iv : intervals) {
    out << iv.start << ',' << iv.end << ',';
    if (iv.core) {
      out << "core:" << *iv.core << '\n';
    } else {
      out << "node\n";
    }
  }
}

std::vector<MetricSample> parse_trace(std::istream& in, const CsvSchema& schema) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next_row(fields)) {
    throw std::runtime_error("trace csv: missing header row");
  }

  std::size_t time_col = fields.size();
  std::size_t core_col = fields.size();
  std::vector<std::pair<std::size_t, std::string>> metric_cols;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i] == schema.time_column) {
      time_col = i;
    } else if (fields[i] == schema.core_column) {
      core_col = i;
    } else {
      metric_cols.emplace_back(i, fields[i]);
    }
  }
  if (time_col == fields.size()) {
    throw std::runtime_error("trace csv: header lacks a '" + schema.time_column +
                             "' column");
  }
  const bool per_core = core_col != fields.size();
  const std::size_t width = fields.size();

  std::vector<MetricSample> samples;
  while (reader.next_row(fields)) {
    const int line = reader.line();
    if (fields.size() != width) {
      throw std::runtime_error("line " + std::to_string(line) +
                               ": expected " + std::to_string(width) + " fields, got " +
                               std::to_string(fields.size()));
    }
    const std::int64_t t = parse_int_field(fields[time_col], line);
    int core = 0;
    if (per_core) {
      core = static_cast<int>(parse_int_field(fields[core_col], line));
      if (core < 0) {
        throw std::runtime_error("line " + std::to_string(line) + ": negative core id");
      }
    }

    if (!samples.empty() && t < samples.back().timestamp) {
      throw std::runtime_error("line " + std::to_string(line) +
                               ": non-monotonic timestamp " + std::to_string(t));
    }
    if (!samples.empty() && t == samples.back().timestamp && !per_core) {
      throw std::runtime_error("line " + std::to_string(line) +
                               ": duplicate timestamp " + std::to_string(t));
    }
    if (samples.empty() || t != samples.back().timestamp) {
      samples.emplace_back();
      samples.back().timestamp = t;
    }
    MetricSample& sample = samples.back();

    for (const auto& [col, name] : metric_cols) {
      const double value = parse_double_field(fields[col], line);
      if (per_core) {
        if (!sample.core_values.emplace(std::make_pair(core, name), value).second) {
          throw std::runtime_error("line " + std::to_string(line) +
                                   ": duplicate timestamp " + std::to_string(t) +
                                   " for core " + std::to_string(core));
        }
      } else {
        sample.node_values.emplace(name, value);
      }
    }
  }
  return samples;
}

std::pair<Trace, std::set<std::string>> remove_constant_metrics(const Trace& trace) {
  if (trace.empty()) {
    throw std::invalid_argument("remove_constant_metrics: empty trace");
  }
  std::set<std::string> removed;
  ColumnSet cols;

  for (std::size_t m = 0; m < trace.node_metric_names().size(); ++m) {
    if (is_constant(trace.node_column(m))) {
      removed.insert(trace.node_metric_names()[m]);
    } else {
      cols.node_names.push_back(trace.node_metric_names()[m]);
      cols.node_columns.emplace_back(trace.node_column(m).begin(),
                                     trace.node_column(m).end());
    }
  }

  cols.core_columns.resize(trace.core_ids().size());
  for (std::size_t m = 0; m < trace.core_metric_names().size(); ++m) {
    bool constant = true;
    const double reference = trace.core_ids().empty() ? 0.0 : trace.core_column(0, m)[0];
    for (std::size_t c = 0; constant && c < trace.core_ids().size(); ++c) {
      const auto col = trace.core_column(c, m);
      for (double v : col) {
        if (v != reference) {
          constant = false;
          break;
        }
      }
    }
    if (constant) {
      removed.insert(trace.core_metric_names()[m]);
    } else {
      cols.core_names.push_back(trace.core_metric_names()[m]);
      for (std::size_t c = 0; c < trace.core_ids().size(); ++c) {
        cols.core_columns[c].emplace_back(trace.core_column(c, m).begin(),
                                          trace.core_column(c, m).end());
      }
    }
  }

  return {cols.into_trace(trace), std::move(removed)};
}

Trace differentiate_counters(const Trace& trace, const PostProcessConfig& config) {
  config.validate();
  for (const auto& name : config.counter_metrics) {
    if (!trace.node_metric_index(name) && !trace.core_metric_index(name)) {
      throw std::invalid_argument("differentiate_counters: counter metric '" + name +
                                  "' not present in trace");
    }
  }

  ColumnSet cols = ColumnSet::from(trace);
  for (std::size_t m = 0; m < cols.node_names.size(); ++m) {
    if (config.counter_metrics.count(cols.node_names[m])) {
      cols.node_columns[m] = column_increments(cols.node_columns[m]);
    }
  }
  for (std::size_t m = 0; m < cols.core_names.size(); ++m) {
    if (config.counter_metrics.count(cols.core_names[m])) {
      for (auto& per_core : cols.core_columns) {
        per_core[m] = column_increments(per_core[m]);
      }
    }
  }
  return cols.into_trace(trace);
}

Trace append_allocated_metric(const Trace& trace, const AllocationSchedule& schedule) {
  if (trace.node_metric_index(kAllocatedMetric) ||
      trace.core_metric_index(kAllocatedMetric)) {
    throw std::invalid_argument("append_allocated_metric: metric 'allocated' already exists");
  }
  for (const auto& iv : schedule.intervals) {
    if (iv.start >= iv.end) {
      throw std::invalid_argument("allocation schedule: start must precede end");
    }
  }

  ColumnSet cols = ColumnSet::from(trace);
  std::vector<double> node_col(trace.length());
  for (std::size_t i = 0; i < trace.length(); ++i) {
    const std::int64_t t = trace.start_time() + static_cast<std::int64_t>(i);
    node_col[i] = schedule.node_allocated_at(t) ? 1.0 : 0.0;
  }
  cols.node_names.emplace_back(kAllocatedMetric);
  cols.node_columns.push_back(std::move(node_col));

  if (!trace.core_ids().empty()) {
    cols.core_names.emplace_back(kAllocatedMetric);
    for (std::size_t c = 0; c < trace.core_ids().size(); ++c) {
      std::vector<double> col(trace.length());
      for (std::size_t i = 0; i < trace.length(); ++i) {
        const std::int64_t t = trace.start_time() + static_cast<std::int64_t>(i);
        col[i] = schedule.core_allocated_at(trace.core_ids()[c], t) ? 1.0 : 0.0;
      }
      cols.core_columns[c].push_back(std::move(col));
    }
  }
  return cols.into_trace(trace);
}

Trace append_first_derivatives(const Trace& trace) {
  const auto check_collision = [&](const std::vector<std::string>& names) {
    for (const auto& name : names) {
      const std::string deriv = name + kDerivSuffix;
      if (std::binary_search(names.begin(), names.end(), deriv)) {
        throw std::invalid_argument("append_first_derivatives: metric '" + deriv +
                                    "' already exists (applied twice?)");
      }
    }
  };
  check_collision(trace.node_metric_names());
  check_collision(trace.core_metric_names());

  ColumnSet cols = ColumnSet::from(trace);
  const std::size_t node_count = cols.node_names.size();
  for (std::size_t m = 0; m < node_count; ++m) {
    cols.node_names.push_back(cols.node_names[m] + kDerivSuffix);
    cols.node_columns.push_back(column_derivative(cols.node_columns[m]));
  }
  const std::size_t core_count = cols.core_names.size();
  for (std::size_t m = 0; m < core_count; ++m) {
    cols.core_names.push_back(cols.core_names[m] + kDerivSuffix);
    for (auto& per_core : cols.core_columns) {
      per_core.push_back(column_derivative(per_core[m]));
    }
  }
  return cols.into_trace(trace);
}

std::pair<Trace, std::set<std::string>> post_process(const Trace& trace,
                                                     const PostProcessConfig& config,
                                                     const AllocationSchedule& schedule) {
  config.validate();
  Trace current = trace;
  if (!config.drop_metrics.empty()) {
    ColumnSet cols;
    cols.core_columns.resize(trace.core_ids().size());
    for (std::size_t m = 0; m < trace.node_metric_names().size(); ++m) {
      if (config.drop_metrics.count(trace.node_metric_names()[m])) continue;
      cols.node_names.push_back(trace.node_metric_names()[m]);
      cols.node_columns.emplace_back(trace.node_column(m).begin(),
                                     trace.node_column(m).end());
    }
    for (std::size_t m = 0; m < trace.core_metric_names().size(); ++m) {
      if (config.drop_metrics.count(trace.core_metric_names()[m])) continue;
      cols.core_names.push_back(trace.core_metric_names()[m]);
      for (std::size_t c = 0; c < trace.core_ids().size(); ++c) {
        cols.core_columns[c].emplace_back(trace.core_column(c, m).begin(),
                                          trace.core_column(c, m).end());
      }
    }
    current = cols.into_trace(trace);
  }

  for (const auto& name : config.counter_metrics) {
    if (!trace.node_metric_index(name) && !trace.core_metric_index(name)) {
      throw std::invalid_argument("post_process: counter metric '" + name +
                                  "' not present in trace");
    }
  }
  auto [reduced, removed] = remove_constant_metrics(current);
  // Counters that were constant have already been removed; skip them.
  PostProcessConfig effective = config;
  std::erase_if(effective.counter_metrics, [&](const std::string& name) {
    return !reduced.node_metric_index(name) && !reduced.core_metric_index(name);
  });
  Trace diffed = differentiate_counters(reduced, effective);
  Trace allocated = append_allocated_metric(diffed, schedule);
  return {append_first_derivatives(allocated), std::move(removed)};
}

namespace {

void write_header(std::ostream& out, const CsvSchema& schema, bool per_core,
                  const std::vector<std::string>& names) {
  out << schema.time_column;
  if (per_core) out << ',' << schema.core_column;
  for (const auto& name : names) out << ',' << name;
  out << '\n';
}

}  // namespace

void write_node_csv(const Trace& trace, std::ostream& out, const CsvSchema& schema) {
  write_header(out, schema, false, trace.node_metric_names());
  for (std::size_t i = 0; i < trace.length(); ++i) {
    out << trace.start_time() + static_cast<std::int64_t>(i);
    for (std::size_t m = 0; m < trace.node_metric_names().size(); ++m) {
      out << ',' << format_double(trace.node_column(m)[i]);
    }
    out << '\n';
  }
}

void write_core_csv(const Trace& trace, std::ostream& out, const CsvSchema& schema) {
  write_header(out, schema, true, trace.core_metric_names());
  for (std::size_t i = 0; i < trace.length(); ++i) {
    for (std::size_t c = 0; c < trace.core_ids().size(); ++c) {
      out << trace.start_time() + static_cast<std::int64_t>(i) << ','
          << trace.core_ids()[c];
      for (std::size_t m = 0; m < trace.core_metric_names().size(); ++m) {
        out << ',' << format_double(trace.core_column(c, m)[i]);
      }
      out << '\n';
    }
  }
}

Trace load_trace(const std::optional<std::string>& node_csv_path,
                 const std::optional<std::string>& core_csv_path,
                 const CsvSchema& schema) {
  if (!node_csv_path && !core_csv_path) {
    throw std::invalid_argument("load_trace: no trace file given");
  }
  Trace merged;
  for (const auto& path : {node_csv_path, core_csv_path}) {
    if (!path) continue;
    std::ifstream in(*path);
    if (!in) throw std::runtime_error("cannot open trace file '" + *path + "'");
    const Trace part = Trace::from_samples(parse_trace(in, schema));
    merged = merged.empty() ? part : Trace::merge(merged, part);
  }
  return merged;
}

}  // namespace hpcfd::ingest
