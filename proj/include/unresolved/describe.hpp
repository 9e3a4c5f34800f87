#pragma once

#include <string>
#include <vector>

#include "unresolved/common.hpp"

namespace unresolved {

// One metric column over all questions; NaN marks a missing value.
struct MetricColumn {
  std::string name;
  std::vector<double> values;
};

struct ClassSummary {
  std::string metric;
  Label label = Label::Resolved;
  long n = 0;  // defined values only
  double mean = 0, median = 0, min = 0, q1 = 0, q3 = 0, max = 0;
};

struct HistogramBin {
  std::string metric;
  Label label = Label::Resolved;
  int bin = 0;
  double lower = 0, upper = 0;  // [lower, upper); the last bin is closed
  long count = 0;
};

struct Description {
  std::vector<ClassSummary> summaries;
  std::vector<HistogramBin> bins;
};

// Per metric and class: mean, median and five-point summary (quartiles by
// linear interpolation between order statistics), plus `bin_count` equal-width
// bins spanning the metric's range over both classes. A class with no defined
// values gets n = 0 and NaN statistics.
Description describe(const std::vector<MetricColumn>& columns, const std::vector<Label>& labels, int bin_count = 20);

// Linear-interpolation quantile of sorted values, q in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double q);

std::string summary_csv(const Description& description);
std::string histogram_csv(const Description& description);

}  // namespace unresolved
