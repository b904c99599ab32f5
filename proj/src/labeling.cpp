#include "hpcfd/labeling.hpp"

#include <array>
#include <stdexcept>

namespace hpcfd::labeling {

std::vector<FaultClass> per_second_labels(const FaultSchedule& schedule, int core_id,
                                          features::Window window) {
  if (window.start >= window.end) {
    throw std::invalid_argument("per_second_labels: empty window");
  }
  std::vector<FaultClass> labels;
  labels.reserve(static_cast<std::size_t>(window.end - window.start));
  for (std::int64_t t = window.start; t < window.end; ++t) {
    const FaultEntry* active = schedule.active_at(t, core_id);
    labels.push_back(active ? active->fault : FaultClass::healthy);
  }
  return labels;
}

FaultClass label_mode(std::span<const FaultClass> labels) {
  if (labels.empty()) throw std::invalid_argument("label_mode: empty window");
  std::array<std::size_t, kFaultClassCount> counts{};
  std::array<std::size_t, kFaultClassCount> last_seen{};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    ++counts[c];
    last_seen[c] = i;
  }
  std::size_t best = kFaultClassCount;
  for (std::size_t c = 0; c < kFaultClassCount; ++c) {
    if (counts[c] == 0) continue;
    if (best == kFaultClassCount || counts[c] > counts[best] ||
        (counts[c] == counts[best] && last_seen[c] > last_seen[best])) {
      best = c;
    }
  }
  return static_cast<FaultClass>(best);
}

FaultClass label_recent(std::span<const FaultClass> labels) {
  if (labels.empty()) throw std::invalid_argument("label_recent: empty window");
  return labels.back();
}

bool is_ambiguous(std::span<const FaultClass> labels) {
  if (labels.empty()) throw std::invalid_argument("is_ambiguous: empty window");
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] != labels[0]) return true;
  }
  return false;
}

std::vector<features::FeatureVector> filter_ambiguous(
    const std::vector<features::FeatureVector>& vectors) {
  std::vector<features::FeatureVector> kept;
  for (const auto& v : vectors) {
    if (!v.ambiguous) kept.push_back(v);
  }
  return kept;
}

void apply_labels(std::vector<features::FeatureVector>& vectors,
                  const FaultSchedule& schedule, const features::WindowSpec& spec) {
  spec.validate();
  for (auto& v : vectors) {
    const features::Window window{v.window_end - spec.length_seconds, v.window_end};
    const auto labels = per_second_labels(schedule, v.core_id, window);
    v.label_mode = label_mode(labels);
    v.label_recent = label_recent(labels);
    v.ambiguous = is_ambiguous(labels);
  }
}

}  // namespace hpcfd::labeling
