#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hpcfd {

/// The healthy state plus the 8 injectable fault programs. ddot and dial are
/// core-scoped; every other fault affects the whole node. Enum order is the
/// fixed class order used for all tie-breaks.
enum class FaultClass {
  healthy,
  leak,
  memeater,
  ddot,
  dial,
  cpufreq,
  pagefail,
  ioerr,
  copy,
};

inline constexpr std::size_t kFaultClassCount = 9;

inline constexpr std::array<std::string_view, kFaultClassCount> kFaultClassNames = {
    "healthy", "leak", "memeater", "ddot", "dial", "cpufreq", "pagefail", "ioerr", "copy"};

std::string_view to_string(FaultClass fault);
FaultClass parse_fault_class(std::string_view name);
bool is_core_scoped(FaultClass fault);

/// All fault classes except healthy, in class order.
std::vector<FaultClass> all_fault_programs();

enum class LabelMethod { mode, recent };

std::string_view to_string(LabelMethod method);
LabelMethod parse_label_method(std::string_view name);

/// One injected fault: active over [start, end), on one core or node-wide.
struct FaultEntry {
  FaultClass fault = FaultClass::healthy;
  std::optional<int> core;  // empty = node scope
  std::int64_t start = 0;
  std::int64_t end = 0;
  bool low_intensity = false;
};

/// Ground-truth injection log. Entries are kept sorted by start and verified
/// pairwise non-overlapping in time (fault programs never run concurrently).
class FaultSchedule {
 public:
  FaultSchedule() = default;
  explicit FaultSchedule(std::vector<FaultEntry> entries);

  const std::vector<FaultEntry>& entries() const { return entries_; }

  /// The entry active at second `t` whose scope covers `core`, if any.
  const FaultEntry* active_at(std::int64_t t, int core) const;

  static FaultSchedule from_csv(std::istream& in);
  void to_csv(std::ostream& out) const;

 private:
  std::vector<FaultEntry> entries_;
};

}  // namespace hpcfd
