#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace novelty {

/// 1-based nearest rank ceil(percent/100 * m), computed in integers so that
/// e.g. the 99th percentile of 200 values is exactly rank 198.
std::size_t nearest_rank(std::size_t m, unsigned percent);

/// Nearest-rank percentile of an ascending-sorted, non-empty sample.
double nearest_rank_percentile(std::span<const double> sorted, unsigned percent);

/// Median of an ascending-sorted, non-empty sample; even sizes average the
/// two central order statistics.
double median_sorted(std::span<const double> sorted);

double mean(std::span<const double> values);

/// Sample variance with the n-1 denominator; NaN when n < 2.
double sample_variance(std::span<const double> values);

struct SummaryRow {
  std::string group;
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;  // NaN for n == 1
  double min = 0.0;
  double max = 0.0;
};

struct StatsTable {
  std::vector<SummaryRow> groups;  // sorted by group label
  SummaryRow pooled;
};

SummaryRow summarize(std::span<const double> values, std::string label);

/// Per-group and pooled descriptives. Throws UndefinedError on empty input or
/// mismatched lengths.
StatsTable descriptive_stats(std::span<const double> values,
                             std::span<const std::string> group_keys);

}  // namespace novelty
