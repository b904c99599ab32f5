#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hpcfd/fault.hpp"
#include "hpcfd/features.hpp"

namespace hpcfd::labeling {

/// One label per second of [window.start, window.end): the fault active at
/// that second whose scope covers `core_id`, else healthy.
std::vector<FaultClass> per_second_labels(const FaultSchedule& schedule, int core_id,
                                          features::Window window);

/// Majority label; ties go to the tied label whose latest occurrence is most
/// recent.
FaultClass label_mode(std::span<const FaultClass> labels);

/// Label of the window's last second.
FaultClass label_recent(std::span<const FaultClass> labels);

/// True when more than one distinct label appears in the window.
bool is_ambiguous(std::span<const FaultClass> labels);

/// Keeps only unambiguous vectors, preserving order.
std::vector<features::FeatureVector> filter_ambiguous(
    const std::vector<features::FeatureVector>& vectors);

/// Fills label_mode / label_recent / ambiguous for every vector from the
/// schedule, using each vector's [window_end - length, window_end) span.
void apply_labels(std::vector<features::FeatureVector>& vectors,
                  const FaultSchedule& schedule, const features::WindowSpec& spec);

}  // namespace hpcfd::labeling
