#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ilsel {

// Left-to-right sum. All aggregations in the toolkit reduce in a fixed order
// so results do not depend on thread count or schedule.
inline double ordered_sum(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty input");
  return ordered_sum(xs) / static_cast<double>(xs.size());
}

// Linear-interpolation percentile (numpy default). p in [0, 100].
inline double percentile(std::span<const double> xs, double p) {
  if (xs.empty()) throw std::invalid_argument("percentile: empty input");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  if (s.size() == 1) return s[0];
  const double q = (p / 100.0) * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(q);
  if (lo + 1 >= s.size()) return s.back();
  const double frac = q - static_cast<double>(lo);
  return s[lo] * (1.0 - frac) + s[lo + 1] * frac;
}

// Sample standard deviation (ddof = 1); 0 for fewer than two points.
inline double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace ilsel
