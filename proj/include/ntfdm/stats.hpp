#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ntfdm/errors.hpp"

namespace ntfdm::stats {

inline double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

/// Biased (1/n) central moment of order `order`.
inline double central_moment(std::span<const double> x, int order) {
  const double mu = mean(x);
  double s = 0.0;
  for (double v : x) s += std::pow(v - mu, order);
  return s / static_cast<double>(x.size());
}

/// Unbiased sample variance; 0 for fewer than two values.
inline double variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double mu = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - mu) * (v - mu);
  return s / static_cast<double>(x.size() - 1);
}

/// Quantile of already sorted data, linear interpolation between order
/// statistics at position (n-1)·p.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw SizeError("quantile of empty data");
  p = std::clamp(p, 0.0, 1.0);
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::span<const double> x, double p) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return quantile_sorted(s, p);
}

inline double median(std::span<const double> x) { return quantile(x, 0.5); }

}  // namespace ntfdm::stats
