#include "hpcfd/fault.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "hpcfd/csv.hpp"

namespace hpcfd {

std::string_view to_string(FaultClass fault) {
  return kFaultClassNames[static_cast<std::size_t>(fault)];
}

FaultClass parse_fault_class(std::string_view name) {
  for (std::size_t i = 0; i < kFaultClassNames.size(); ++i) {
    if (kFaultClassNames[i] == name) return static_cast<FaultClass>(i);
  }
  throw std::invalid_argument("unknown fault class '" + std::string(name) + "'");
}

bool is_core_scoped(FaultClass fault) {
  return fault == FaultClass::ddot || fault == FaultClass::dial;
}

std::vector<FaultClass> all_fault_programs() {
  std::vector<FaultClass> programs;
  for (std::size_t i = 1; i < kFaultClassCount; ++i) {
    programs.push_back(static_cast<FaultClass>(i));
  }
  return programs;
}

std::string_view to_string(LabelMethod method) {
  return method == LabelMethod::mode ? "mode" : "recent";
}

LabelMethod parse_label_method(std::string_view name) {
  if (name == "mode") return LabelMethod::mode;
  if (name == "recent") return LabelMethod::recent;
  throw std::invalid_argument("unknown label method '" + std::string(name) + "'");
}

FaultSchedule::FaultSchedule(std::vector<FaultEntry> entries)
    : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const FaultEntry& a, const FaultEntry& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const FaultEntry& e = entries_[i];
    if (e.start >= e.end) {
      throw std::invalid_argument("fault schedule: start must precede end");
    }
    if (e.fault == FaultClass::healthy) {
      throw std::invalid_argument("fault schedule: 'healthy' is not an injectable fault");
    }
    if (is_core_scoped(e.fault) != e.core.has_value()) {
      throw std::invalid_argument(std::string("fault schedule: ") +
                                  std::string(to_string(e.fault)) +
                                  (e.core ? " cannot carry a core scope"
                                          : " requires a core scope"));
    }
    if (i > 0 && entries_[i - 1].end > e.start) {
      throw std::invalid_argument("fault schedule: entries overlap in time");
    }
  }
}

const FaultEntry* FaultSchedule::active_at(std::int64_t t, int core) const {
  // Entries are sorted and disjoint: binary search for the last start <= t.
  auto it = std::upper_bound(entries_.begin(), entries_.end(), t,
                             [](std::int64_t v, const FaultEntry& e) { return v < e.start; });
  if (it == entries_.begin()) return nullptr;
  --it;
  if (t >= it->end) return nullptr;
  if (it->core && *it->core != core) return nullptr;
  return &*it;
}

FaultSchedule FaultSchedule::from_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next_row(fields) ||
      fields != std::vector<std::string>{"start", "end", "fault", "scope", "low_intensity"}) {
    throw std::runtime_error(
        "schedule file: expected header start,end,fault,scope,low_intensity");
  }
  std::vector<FaultEntry> entries;
  while (reader.next_row(fields)) {
    if (fields.size() != 5) {
      throw std::runtime_error("schedule file line " + std::to_string(reader.line()) +
                               ": expected 5 fields");
    }
    FaultEntry e;
    e.start = parse_int_field(fields[0], reader.line());
    e.end = parse_int_field(fields[1], reader.line());
    e.fault = parse_fault_class(fields[2]);
    if (fields[3] == "node") {
      e.core = std::nullopt;
    } else if (fields[3].rfind("core:", 0) == 0) {
      e.core = static_cast<int>(parse_int_field(fields[3].substr(5), reader.line()));
    } else {
      throw std::runtime_error("schedule file line " + std::to_string(reader.line()) +
                               ": unknown scope '" + fields[3] + "'");
    }
    e.low_intensity = parse_int_field(fields[4], reader.line()) != 0;
    entries.push_back(e);
  }
  return FaultSchedule(std::move(entries));
}

void FaultSchedule::to_csv(std::ostream& out) const {
  out << "start,end,fault,scope,low_intensity\n";
  for (const auto& e : entries_) {
    out << e.start << ',' << e.end << ',' << to_string(e.fault) << ',';
    if (e.core) {
      out << "core:" << *e.core;
    } else {
      out << "node";
    }
    out << ',' << (e.low_intensity ? 1 : 0) << '\n';
  }
}

}  // namespace hpcfd
