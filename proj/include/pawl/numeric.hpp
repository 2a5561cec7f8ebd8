#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace pawl {

inline double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;  // all -inf (or a nan snuck in)
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Sum in ascending value order. Used where a result must be bitwise
// invariant under permutations of the inputs (mixture label switching).
inline double sorted_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

inline double log_sum_exp_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double m = v.empty() ? -std::numeric_limits<double>::infinity() : v.back();
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Linear-interpolation quantile on a sorted sample (R type 7).
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (sorted.size() == 1) return sorted[0];
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double w = h - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

inline double quantile(std::vector<double> sample, double p) {
  std::sort(sample.begin(), sample.end());
  return quantile_sorted(sample, p);
}

}  // namespace pawl
