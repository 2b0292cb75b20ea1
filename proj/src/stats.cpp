#include "novelty/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "novelty/errors.hpp"

namespace novelty {

std::size_t nearest_rank(std::size_t m, unsigned percent) {
  if (m == 0) throw UndefinedError("percentile of an empty sample");
  std::size_t rank = (static_cast<std::size_t>(percent) * m + 99) / 100;
  return std::clamp<std::size_t>(rank, 1, m);
}

double nearest_rank_percentile(std::span<const double> sorted, unsigned percent) {
  return sorted[nearest_rank(sorted.size(), percent) - 1];
}

double median_sorted(std::span<const double> sorted) {
  if (sorted.empty()) throw UndefinedError("median of an empty sample");
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw UndefinedError("mean of an empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

SummaryRow summarize(std::span<const double> values, std::string label) {
  if (values.empty()) throw UndefinedError("group '" + label + "' is empty");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  SummaryRow row;
  row.group = std::move(label);
  row.n = sorted.size();
  row.mean = mean(sorted);
  row.median = median_sorted(sorted);
  row.sd = std::sqrt(sample_variance(sorted));
  row.min = sorted.front();
  row.max = sorted.back();
  return row;
}

StatsTable descriptive_stats(std::span<const double> values,
                             std::span<const std::string> group_keys) {
  if (values.empty()) throw UndefinedError("descriptive_stats: empty input");
  if (values.size() != group_keys.size())
    throw UndefinedError("descriptive_stats: values and group keys differ in length");

  std::map<std::string, std::vector<double>> groups;
  for (std::size_t i = 0; i < values.size(); ++i) groups[group_keys[i]].push_back(values[i]);

  StatsTable table;
  for (auto& [key, group] : groups) table.groups.push_back(summarize(group, key));
  table.pooled = summarize(values, "all");
  return table;
}

}  // namespace novelty
