#pragma once

// Per-frequency-bin band selectors computed from the spectrogram of a whole
// record: spectral kurtosis, the Alpha selector (2 − α̂), the conditional
// variance statistic, and the aggregated Pearson map selector.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ntfdm/dependence.hpp"
#include "ntfdm/errors.hpp"
#include "ntfdm/mcculloch.hpp"
#include "ntfdm/spectral.hpp"
#include "ntfdm/stats.hpp"

namespace ntfdm {

struct SelectorCurve {
  std::vector<double> values;  // max-normalized, in [0, 1]
  std::vector<double> freq_bins;
  std::string method;
};

/// Divides by the maximum; an all-zero curve stays zero.
inline void normalize_max(std::vector<double>& v) {
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, x);
  if (peak > 0.0)
    for (double& x : v) x /= peak;
}

/// Excess kurtosis with biased moments; 0 for a zero-variance row.
inline double excess_kurtosis(std::span<const double> x) {
  const double mu = stats::mean(x);
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - mu) * (v - mu);
    m2 += d;
    m4 += d * d;
  }
  const auto n = static_cast<double>(x.size());
  m2 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) return 0.0;
  return m4 / (m2 * m2) - 3.0;
}

inline SelectorCurve spectral_kurtosis(const Spectrogram& spec) {
  if (spec.frames < 4) throw SizeError("spectral_kurtosis: need at least 4 frames");
  SelectorCurve c{std::vector<double>(spec.bins), spec.freq_bins, "kurtosis"};
  for (std::size_t f = 0; f < spec.bins; ++f) c.values[f] = std::max(0.0, excess_kurtosis(spec.row(f)));
  normalize_max(c.values);
  return c;
}

/// Raw Alpha statistic 2 − α̂ for one row.
inline double alpha_statistic(std::span<const double> x) { return 2.0 - mcculloch::estimate_alpha(x); }

inline SelectorCurve alpha_selector(const Spectrogram& spec) {
  if (spec.frames < 20) throw SizeError("alpha_selector: need at least 20 frames");
  SelectorCurve c{std::vector<double>(spec.bins), spec.freq_bins, "alpha"};
  for (std::size_t f = 0; f < spec.bins; ++f) c.values[f] = std::max(0.0, alpha_statistic(spec.row(f)));
  normalize_max(c.values);
  return c;
}

/// Quantile orders bounding the seven conditional-variance partitions.
inline constexpr std::array<double, 6> kPartitionOrders = {0.004, 0.062, 0.308, 0.692, 0.938, 0.996};

/// Half-open intervals (lower, upper]; the first has lower = -inf and the
/// last upper = +inf (it is open on the right).
struct StablePartitions {
  std::array<double, 8> edges{};

  static StablePartitions from_sorted(std::span<const double> sorted) {
    StablePartitions p;
    p.edges.front() = -INFINITY;
    p.edges.back() = INFINITY;
    for (std::size_t i = 0; i < kPartitionOrders.size(); ++i)
      p.edges[i + 1] = stats::quantile_sorted(sorted, kPartitionOrders[i]);
    return p;
  }
  /// 1-based partition index of x.
  int index_of(double x) const {
    for (int i = 1; i <= 7; ++i)
      if (x <= edges[static_cast<std::size_t>(i)]) return i;
    return 7;
  }
};

/// ((σ²_A3 − σ²_A4)/σ + (σ²_A5 − σ²_A4)/σ)² · √T for one row, with unbiased
/// variances. Returns 0 when a partition used has fewer than two members or
/// the row is constant.
inline double conditional_variance_statistic(std::span<const double> x) {
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const StablePartitions parts = StablePartitions::from_sorted(sorted);
  std::vector<double> a3, a4, a5;
  for (double v : x) {
    switch (parts.index_of(v)) {
      case 3: a3.push_back(v); break;
      case 4: a4.push_back(v); break;
      case 5: a5.push_back(v); break;
      default: break;
    }
  }
  const double sigma = std::sqrt(stats::variance(x));
  if (!(sigma > 0.0) || a3.size() < 2 || a4.size() < 2 || a5.size() < 2) return 0.0;
  const double v3 = stats::variance(a3), v4 = stats::variance(a4), v5 = stats::variance(a5);
  const double inner = (v3 - v4) / sigma + (v5 - v4) / sigma;
  return inner * inner * std::sqrt(static_cast<double>(x.size()));
}

inline SelectorCurve cv_selector(const Spectrogram& spec) {
  if (spec.frames < 250) throw SizeError("cv_selector: need at least 250 frames");
  SelectorCurve c{std::vector<double>(spec.bins), spec.freq_bins, "cv"};
  for (std::size_t f = 0; f < spec.bins; ++f) c.values[f] = conditional_variance_statistic(spec.row(f));
  normalize_max(c.values);
  return c;
}

/// Centers of local minima of a Freedman-Diaconis histogram of `x`. A run of
/// equal-count bins lower than the bins on both sides counts as one minimum
/// located at the run's middle.
inline std::vector<double> density_local_minima(std::span<const double> x) {
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front(), hi = sorted.back();
  const double iqr = stats::quantile_sorted(sorted, 0.75) - stats::quantile_sorted(sorted, 0.25);
  const double width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
  if (!(width > 0.0) || !(hi > lo)) return {};
  const auto nbins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
  if (nbins < 3) return {};
  std::vector<std::size_t> counts(nbins, 0);
  for (double v : sorted) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    counts[std::min(b, nbins - 1)]++;
  }
  std::vector<double> minima;
  std::size_t b = 1;
  while (b + 1 < nbins) {
    std::size_t end = b;  // extend over a plateau of equal counts
    while (end + 1 < nbins && counts[end + 1] == counts[b]) ++end;
    if (end + 1 < nbins && counts[b] < counts[b - 1] && counts[b] < counts[end + 1]) {
      const double mid_bin = 0.5 * static_cast<double>(b + end) + 0.5;
      minima.push_back(lo + mid_bin * width);
    }
    b = end + 1;
  }
  return minima;
}

/// Pearson-map selector: per column j the mean of the off-diagonal entries
/// above TH1 (first quartile of the density minima of that column, or its
/// median when no minimum exists), then entries not above
/// th2_factor · Q3(curve) are zeroed and the curve is max-normalized.
inline SelectorCurve pearson_selector(const DependenceMap& map, double th2_factor = 1.1) {
  const std::size_t f = map.bins;
  if (f < 2) throw SizeError("pearson_selector: map needs at least two bins");
  SelectorCurve c{std::vector<double>(f, 0.0), map.freq_bins, "pearson"};
  std::vector<double> column(f - 1);
  for (std::size_t j = 0; j < f; ++j) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < f; ++i)
      if (i != j) column[n++] = map(i, j);
    const std::vector<double> minima = density_local_minima(column);
    const double th1 = minima.empty() ? stats::median(column) : stats::quantile(minima, 0.25);
    double sum = 0.0;
    std::size_t count = 0;
    for (double v : column) {
      if (v > th1) {
        sum += v;
        ++count;
      }
    }
    c.values[j] = count > 0 ? sum / static_cast<double>(count) : 0.0;
  }
  const double th2 = th2_factor * stats::quantile(c.values, 0.75);
  for (double& v : c.values)
    if (!(v > th2)) v = 0.0;
  for (double& v : c.values) v = std::max(v, 0.0);
  normalize_max(c.values);
  return c;
}

}  // namespace ntfdm
