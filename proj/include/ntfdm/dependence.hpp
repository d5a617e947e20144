#pragma once

// Pearson dependence maps between spectrogram frequency rows, and the
// F x F x M stack of their absolute values over contiguous signal segments.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ntfdm/array.hpp"
#include "ntfdm/errors.hpp"
#include "ntfdm/signal.hpp"
#include "ntfdm/spectral.hpp"

namespace ntfdm {

namespace detail {

/// Mean-removed copy of a row plus its sum of squares; `degenerate` marks rows
/// whose spread is at rounding level relative to their magnitude.
struct CenteredRow {
  std::vector<double> values;
  double sum_squares = 0.0;
  bool degenerate = true;
};

inline CenteredRow center(std::span<const double> x) {
  CenteredRow out;
  const auto n = static_cast<double>(x.size());
  double sum = 0.0;
  double peak = 0.0;
  for (double v : x) {
    sum += v;
    peak = std::max(peak, std::abs(v));
  }
  const double mean = sum / n;
  out.values.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean;
    out.values[i] = d;
    out.sum_squares += d * d;
  }
  const double spread = std::sqrt(out.sum_squares / n);
  out.degenerate = !(spread > 1e-12 * peak) || out.sum_squares == 0.0;
  return out;
}

/// The single arithmetic path shared by pearson() and dependence_map().
inline double correlation(const CenteredRow& a, const CenteredRow& b) {
  double cross = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) cross += a.values[i] * b.values[i];
  const double r = cross / (std::sqrt(a.sum_squares) * std::sqrt(b.sum_squares));
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace detail

/// Empirical Pearson coefficient. Returns nullopt when either vector has zero
/// variance, since the coefficient is undefined there.
inline std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw SizeError("pearson: vectors differ in length");
  if (a.size() < 2) throw SizeError("pearson: need at least two samples");
  const detail::CenteredRow ca = detail::center(a);
  const detail::CenteredRow cb = detail::center(b);
  if (ca.degenerate || cb.degenerate) return std::nullopt;
  return detail::correlation(ca, cb);
}

/// Symmetric F x F map of signed Pearson correlations between frequency rows.
struct DependenceMap {
  std::size_t bins = 0;
  std::vector<double> values;  // row-major F x F
  std::vector<double> freq_bins;

  double operator()(std::size_t j, std::size_t k) const { return values[j * bins + k]; }
  double& operator()(std::size_t j, std::size_t k) { return values[j * bins + k]; }
};

/// CM(j,k) = pearson(row j, row k). A zero-variance row correlates 0 with every
/// other row and 1 with itself. Only the upper triangle is computed.
inline DependenceMap dependence_map(const Spectrogram& spec) {
  if (spec.frames < 2) throw SizeError("dependence_map: need at least two frames");
  const std::size_t f = spec.bins;
  std::vector<detail::CenteredRow> rows;
  rows.reserve(f);
  for (std::size_t j = 0; j < f; ++j) rows.push_back(detail::center(spec.row(j)));

  DependenceMap map;
  map.bins = f;
  map.values.assign(f * f, 0.0);
  map.freq_bins = spec.freq_bins;
  for (std::size_t j = 0; j < f; ++j) {
    map(j, j) = 1.0;
    if (rows[j].degenerate) continue;
    for (std::size_t k = j + 1; k < f; ++k) {
      if (rows[k].degenerate) continue;
      const double r = detail::correlation(rows[j], rows[k]);
      map(j, k) = r;
      map(k, j) = r;
    }
  }
  return map;
}

/// F x F x M stack of |CM| slices, one per contiguous segment.
struct DependenceTensor {
  Tensor3 values;  // (f1, f2, m)
  std::vector<double> freq_bins;

  std::size_t bins() const { return values.dim0; }
  std::size_t segments() const { return values.dim2; }
};

/// Splits the signal into M equal contiguous blocks (remainder dropped) and
/// stacks the absolute dependence map of each block's spectrogram.
inline DependenceTensor build_tensor(const Signal& signal, std::size_t segment_count,
                                     const StftConfig& stft) {
  validate(signal);
  validate(stft);
  if (segment_count == 0) throw ParameterError("build_tensor: segment count must be >= 1");
  const std::size_t block = signal.size() / segment_count;
  if (stft.frames(block) < 2) {
    throw SizeError("build_tensor: " + std::to_string(segment_count) + " segments of " +
                    std::to_string(block) + " samples leave fewer than two STFT frames each");
  }
  const std::size_t f = stft.bins();
  DependenceTensor out;
  out.values = Tensor3(f, f, segment_count);
  for (std::size_t m = 0; m < segment_count; ++m) {
    const std::span<const double> part(signal.samples.data() + m * block, block);
    const Spectrogram spec = stft_spectrogram(part, signal.sample_rate, stft);
    const DependenceMap map = dependence_map(spec);
    if (m == 0) out.freq_bins = map.freq_bins;
    for (std::size_t j = 0; j < f; ++j) {
      for (std::size_t k = 0; k < f; ++k) out.values(j, k, m) = std::abs(map(j, k));
    }
  }
  return out;
}

/// One slice of the tensor as an F x F map (absolute values).
inline DependenceMap tensor_slice(const DependenceTensor& tensor, std::size_t m) {
  if (m >= tensor.segments()) throw ParameterError("tensor_slice: segment index out of range");
  DependenceMap map;
  map.bins = tensor.bins();
  map.freq_bins = tensor.freq_bins;
  map.values.resize(map.bins * map.bins);
  for (std::size_t j = 0; j < map.bins; ++j) {
    for (std::size_t k = 0; k < map.bins; ++k) map(j, k) = tensor.values(j, k, m);
  }
  return map;
}

}  // namespace ntfdm
