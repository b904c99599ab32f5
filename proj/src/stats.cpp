#include "hpcfd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hpcfd::features {

namespace {

double percentile_sorted(std::span<const double> sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

void compute_statistics_into(std::span<const double> values, std::span<double> scratch,
                             double* out) {
  const std::size_t n = values.size();
  if (n == 0) throw std::invalid_argument("compute_statistics: empty input");

  std::copy(values.begin(), values.end(), scratch.begin());
  auto sorted = scratch.subspan(0, n);
  std::sort(sorted.begin(), sorted.end());

  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);

  const double std_dev = std::sqrt(m2);
  const double skewness = m2 > 0.0 ? m3 / (m2 * std_dev) : 0.0;
  const double kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;

  out[0] = mean;
  out[1] = std_dev;
  out[2] = percentile_sorted(sorted, 0.50);
  out[3] = sorted[0];
  out[4] = sorted[n - 1];
  out[5] = skewness;
  out[6] = kurtosis;
  out[7] = percentile_sorted(sorted, 0.05);
  out[8] = percentile_sorted(sorted, 0.25);
  out[9] = percentile_sorted(sorted, 0.75);
  out[10] = percentile_sorted(sorted, 0.95);
}

StatisticSet compute_statistics(std::span<const double> values) {
  std::vector<double> scratch(values.size());
  double out[11];
  compute_statistics_into(values, scratch, out);
  StatisticSet s;
  s.mean = out[0];
  s.std_dev = out[1];
  s.median = out[2];
  s.minimum = out[3];
  s.maximum = out[4];
  s.skewness = out[5];
  s.kurtosis = out[6];
  s.p5 = out[7];
  s.p25 = out[8];
  s.p75 = out[9];
  s.p95 = out[10];
  return s;
}

}  // namespace hpcfd::features
