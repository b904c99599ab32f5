#pragma once

#include <array>
#include <span>
#include <vector>

namespace hpcfd::features {

/// The 11 distribution indicators computed per metric per window.
struct StatisticSet {
  double mean = 0;
  double std_dev = 0;
  double median = 0;
  double minimum = 0;
  double maximum = 0;
  double skewness = 0;
  double kurtosis = 0;  // excess kurtosis
  double p5 = 0;
  double p25 = 0;
  double p75 = 0;
  double p95 = 0;

  std::array<double, 11> as_array() const {
    return {mean, std_dev, median, minimum, maximum, skewness,
            kurtosis, p5, p25, p75, p95};
  }
};

inline constexpr std::array<const char*, 11> kStatisticNames = {
    "mean", "std", "median", "min", "max", "skew", "kurt", "p5", "p25", "p75", "p95"};

/// Population moments; skewness m3/m2^1.5 and excess kurtosis m4/m2^2 - 3 are
/// 0 when the window is constant; percentiles interpolate linearly at
/// p*(n-1) on the sorted values. Throws on empty input.
StatisticSet compute_statistics(std::span<const double> values);

/// Allocation-free variant for hot loops: `scratch` must be at least
/// values.size() and `out` receives the 11 statistics in kStatisticNames
/// order.
void compute_statistics_into(std::span<const double> values, std::span<double> scratch,
                             double* out);

}  // namespace hpcfd::features
