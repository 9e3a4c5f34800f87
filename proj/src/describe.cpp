#include "unresolved/describe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "unresolved/io.hpp"

namespace unresolved {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Description describe(const std::vector<MetricColumn>& columns, const std::vector<Label>& labels, int bin_count) {
  if (bin_count < 1) throw ConfigError("histograms need at least one bin");
  Description out;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& column : columns) {
    if (column.values.size() != labels.size()) throw InvariantError("metric column '" + column.name + "' has the wrong length");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : column.values) {
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const bool any = lo <= hi;
    const double width = any && hi > lo ? (hi - lo) / bin_count : 1.0;

    for (Label label : {Label::Resolved, Label::Unresolved}) {
      std::vector<double> values;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label && !std::isnan(column.values[i])) values.push_back(column.values[i]);
      }
      std::sort(values.begin(), values.end());
      ClassSummary s{column.name, label, static_cast<long>(values.size()), nan, nan, nan, nan, nan, nan};
      if (!values.empty()) {
        double sum = 0;
        for (double v : values) sum += v;
        s.mean = sum / static_cast<double>(values.size());
        s.median = quantile_sorted(values, 0.5);
        s.min = values.front();
        s.q1 = quantile_sorted(values, 0.25);
        s.q3 = quantile_sorted(values, 0.75);
        s.max = values.back();
      }
      out.summaries.push_back(s);

      if (!any) continue;
      std::vector<long> counts(static_cast<std::size_t>(bin_count), 0);
      for (double v : values) {
        auto b = static_cast<long>((v - lo) / width);
        b = std::clamp(b, 0L, static_cast<long>(bin_count) - 1);
        ++counts[static_cast<std::size_t>(b)];
      }
      for (int b = 0; b < bin_count; ++b) {
        out.bins.push_back({column.name, label, b, lo + b * width, b + 1 == bin_count ? std::max(hi, lo + width) : lo + (b + 1) * width,
                            counts[static_cast<std::size_t>(b)]});
      }
    }
  }
  return out;
}

std::string summary_csv(const Description& d) {
  std::string out = "metric,class,n,mean,median,min,q1,q3,max\n";
  for (const auto& s : d.summaries) {
    out += s.metric + ',' + std::string(to_string(s.label)) + ',' + std::to_string(s.n);
    for (double v : {s.mean, s.median, s.min, s.q1, s.q3, s.max}) out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

std::string histogram_csv(const Description& d) {
  std::string out = "metric,class,bin,lower,upper,count\n";
  for (const auto& b : d.bins) {
    out += b.metric + ',' + std::string(to_string(b.label)) + ',' + std::to_string(b.bin) + ',' +
           format_double(b.lower) + ',' + format_double(b.upper) + ',' + std::to_string(b.count) + '\n';
  }
  return out;
}

}  // namespace unresolved
