// Independent reference implementations used as test oracles. These must not
// call into the library code they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracle {

struct Stats {
  double mean, std_dev, median, minimum, maximum, skewness, kurtosis, p5, p25, p75, p95;

  std::vector<double> as_vector() const {
    return {mean, std_dev, median, minimum, maximum, skewness, kurtosis, p5, p25, p75, p95};
  }
};

inline double percentile(std::vector<double> sorted_copy, double p) {
  const std::size_t n = sorted_copy.size();
  const double rank = p * static_cast<double>(n - 1);
  const auto below = static_cast<std::size_t>(std::floor(rank));
  const auto above = static_cast<std::size_t>(std::ceil(rank));
  if (below == above) return sorted_copy[below];
  const double weight = rank - std::floor(rank);
  return sorted_copy[below] * (1.0 - weight) + sorted_copy[above] * weight;
}

inline Stats stats(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("oracle stats: empty");
  const double n = static_cast<double>(values.size());

  double total = 0.0;
  for (double v : values) total += v;
  const double mean = total / n;

  double m2 = 0.0;
  for (double v : values) m2 += (v - mean) * (v - mean);
  m2 /= n;
  double m3 = 0.0;
  for (double v : values) m3 += (v - mean) * (v - mean) * (v - mean);
  m3 /= n;
  double m4 = 0.0;
  for (double v : values) m4 += (v - mean) * (v - mean) * (v - mean) * (v - mean);
  m4 /= n;

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  Stats s{};
  s.mean = mean;
  s.std_dev = std::sqrt(m2);
  s.median = percentile(sorted, 0.50);
  s.minimum = sorted.front();
  s.maximum = sorted.back();
  s.skewness = m2 == 0.0 ? 0.0 : m3 / std::pow(m2, 1.5);
  s.kurtosis = m2 == 0.0 ? 0.0 : m4 / (m2 * m2) - 3.0;
  s.p5 = percentile(sorted, 0.05);
  s.p25 = percentile(sorted, 0.25);
  s.p75 = percentile(sorted, 0.75);
  s.p95 = percentile(sorted, 0.95);
  return s;
}

// --- labeling reference: one linear scan per second ---------------------------

struct Interval {
  int label;  // fault class id, 0 = healthy never appears here
  std::optional<int> core;
  std::int64_t start, end;
};

inline std::vector<int> per_second_labels(const std::vector<Interval>& intervals,
                                          int core, std::int64_t start,
                                          std::int64_t end) {
  std::vector<int> labels;
  for (std::int64_t t = start; t < end; ++t) {
    int label = 0;
    for (const auto& interval : intervals) {
      if (t < interval.start || t >= interval.end) continue;
      if (interval.core && *interval.core != core) continue;
      label = interval.label;
    }
    labels.push_back(label);
  }
  return labels;
}

inline int mode_label(const std::vector<int>& labels) {
  std::map<int, std::size_t> counts;
  for (int label : labels) ++counts[label];
  std::size_t best_count = 0;
  for (const auto& [label, count] : counts) best_count = std::max(best_count, count);
  // Tie-break: scan from the back; the first tied label seen is the one whose
  // latest occurrence is most recent.
  for (auto it = labels.rbegin(); it != labels.rend(); ++it) {
    if (counts[*it] == best_count) return *it;
  }
  return labels.back();
}

inline bool ambiguous(const std::vector<int>& labels) {
  for (int label : labels) {
    if (label != labels.front()) return true;
  }
  return false;
}

// --- scoring reference: rebuild per-sample lists and count -------------------

struct ClassScore {
  double precision, recall, fscore;
  std::int64_t support;
};

struct Scores {
  std::vector<ClassScore> per_class;
  double overall;  // unweighted mean over classes with support > 0
};

inline Scores scores(const std::vector<std::vector<std::int64_t>>& confusion) {
  const std::size_t k = confusion.size();
  std::vector<int> y_true, y_pred;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::int64_t c = 0; c < confusion[i][j]; ++c) {
        y_true.push_back(static_cast<int>(i));
        y_pred.push_back(static_cast<int>(j));
      }
    }
  }
  Scores result;
  double f_total = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::int64_t tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
      const bool is_true = y_true[i] == static_cast<int>(c);
      const bool is_pred = y_pred[i] == static_cast<int>(c);
      if (is_true) ++support;
      if (is_true && is_pred) ++tp;
      if (!is_true && is_pred) ++fp;
      if (is_true && !is_pred) ++fn;
    }
    ClassScore score{};
    score.support = support;
    score.precision = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
    score.recall = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
    score.fscore = score.precision + score.recall > 0.0
                       ? 2.0 * score.precision * score.recall /
                             (score.precision + score.recall)
                       : 0.0;
    result.per_class.push_back(score);
    if (support > 0) {
      f_total += score.fscore;
      ++present;
    }
  }
  result.overall = present > 0 ? f_total / static_cast<double>(present) : 0.0;
  return result;
}

// --- CART split reference: enumerate every candidate on 1-D data --------------

inline double gini_of(const std::vector<int>& labels) {
  std::map<int, double> counts;
  for (int y : labels) counts[y] += 1.0;
  double sum_sq = 0.0;
  for (const auto& [label, count] : counts) {
    sum_sq += (count / labels.size()) * (count / labels.size());
  }
  return 1.0 - sum_sq;
}

struct SplitOracle {
  double threshold;
  double gain;
};

inline SplitOracle best_split_1d(std::vector<double> x, std::vector<int> y) {
  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  const double parent = gini_of(y);
  SplitOracle best{0.0, -1.0};
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    if (x[order[i]] == x[order[i + 1]]) continue;
    const double threshold = (x[order[i]] + x[order[i + 1]]) / 2.0;
    std::vector<int> left, right;
    for (std::size_t j = 0; j < x.size(); ++j) {
      (x[j] <= threshold ? left : right).push_back(y[j]);
    }
    const double weighted = (left.size() * gini_of(left) + right.size() * gini_of(right)) /
                            static_cast<double>(x.size());
    const double gain = parent - weighted;
    if (gain > best.gain) best = {threshold, gain};
  }
  return best;
}

// --- analytic exponentiated Weibull CDF ---------------------------------------

inline double expweibull_cdf(double alpha, double k, double lambda, double x) {
  if (x <= 0.0) return 0.0;
  return std::pow(1.0 - std::exp(-std::pow(x / lambda, k)), alpha);
}

/// Kolmogorov-Smirnov sup distance between a sample and an analytic CDF.
template <typename Cdf>
double ks_distance(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    sup = std::max(sup, std::abs((i + 1) / n - f));
    sup = std::max(sup, std::abs(f - i / n));
  }
  return sup;
}

}  // namespace oracle
