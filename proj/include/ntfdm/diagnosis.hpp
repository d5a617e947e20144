#pragma once

// Decision stage: filter the raw record with a selector curve used as a
// zero-phase magnitude response, take the squared envelope spectrum (SES) of
// the result, and score it with ENVSI, the share of SES energy carried by the
// first R1 fault harmonics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ntfdm/errors.hpp"
#include "ntfdm/fft.hpp"
#include "ntfdm/ntf.hpp"
#include "ntfdm/selectors.hpp"
#include "ntfdm/signal.hpp"
#include "ntfdm/spectral.hpp"

namespace ntfdm {

struct EnvelopeSpectrum {
  std::vector<double> amplitudes;  // bins 1..N/2 (DC removed)
  std::vector<double> freq_bins;   // Hz
  double bin_width = 0.0;          // sample_rate / N
};

struct EnvsiConfig {
  double fault_frequency = 25.0;  // Hz
  std::size_t harmonic_count = 5; // R1
  /// Half-width of each harmonic search window, Hz. Unset: two SES bins.
  std::optional<double> harmonic_tolerance;
  /// Upper edge of the energy sum, Hz. Unset: the bin holding the last AIS peak.
  std::optional<double> total_band_top;
};

inline constexpr double kDefaultDecisionThreshold = 0.1;

/// Linear interpolation of the curve at `freq`, clamped to the end values.
inline double interpolate_curve(const SelectorCurve& curve, double freq) {
  const auto& x = curve.freq_bins;
  const auto& y = curve.values;
  if (freq <= x.front()) return y.front();
  if (freq >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), freq);
  const auto hi = static_cast<std::size_t>(it - x.begin());
  const std::size_t lo = hi - 1;
  const double t = (freq - x[lo]) / (x[hi] - x[lo]);
  return y[lo] + t * (y[hi] - y[lo]);
}

/// Zero-phase filtering: each DFT bin of the full record is scaled by the curve
/// value at its frequency, then transformed back.
inline Signal filter_with_selector(const Signal& signal, const SelectorCurve& curve) {
  validate(signal);
  if (curve.values.size() != curve.freq_bins.size() || curve.values.size() < 2)
    throw ParameterError("filter_with_selector: malformed selector curve");
  const double nyq = signal.nyquist();
  if (curve.freq_bins.front() > 1e-9 * nyq || curve.freq_bins.back() < nyq * (1.0 - 1e-9))
    throw ParameterError("filter_with_selector: curve must span 0..Nyquist of the signal");

  const std::size_t n = signal.size();
  std::vector<fft::cplx> spec = fft::rfft(signal.samples);
  const double df = signal.sample_rate / static_cast<double>(n);
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= interpolate_curve(curve, df * static_cast<double>(k));
  return Signal{fft::irfft(spec, n), signal.sample_rate};
}

/// One-sided magnitude spectrum (scaled by 1/N) of the squared analytic envelope.
inline EnvelopeSpectrum squared_envelope_spectrum(const Signal& signal) {
  if (signal.samples.empty()) throw SizeError("squared_envelope_spectrum: empty signal");
  Signal env = analytic_envelope(signal);
  for (double& v : env.samples) v *= v;
  const std::vector<fft::cplx> spec = fft::rfft(env.samples);
  const std::size_t n = signal.size();
  EnvelopeSpectrum out;
  out.bin_width = signal.sample_rate / static_cast<double>(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 1; k < spec.size(); ++k) {
    out.amplitudes.push_back(std::abs(spec[k]) * scale);
    out.freq_bins.push_back(out.bin_width * static_cast<double>(k));
  }
  return out;
}

struct EnvsiBreakdown {
  double value = 0.0;
  std::vector<std::size_t> harmonic_bins;  // indices into EnvelopeSpectrum
  std::size_t last_bin = 0;                // inclusive end of the energy sum
};

/// ENVSI = Σ_i AIS_i² / Σ_{k ≤ R2} SES_k², AIS_i being the SES peak within
/// ±tolerance of harmonic i.
inline EnvsiBreakdown envsi_breakdown(const EnvelopeSpectrum& ses, const EnvsiConfig& cfg) {
  if (!(cfg.fault_frequency > 0.0)) throw ParameterError("ENVSI: fault frequency must be > 0");
  if (cfg.harmonic_count < 1) throw ParameterError("ENVSI: harmonic count must be >= 1");
  const double tol = cfg.harmonic_tolerance.value_or(2.0 * ses.bin_width);
  if (!(tol > 0.0)) throw ParameterError("ENVSI: harmonic tolerance must be > 0");
  if (tol >= 0.5 * cfg.fault_frequency)
    throw ParameterError("ENVSI: harmonic tolerance must be below half the fault frequency");
  if (ses.amplitudes.empty()) throw SizeError("ENVSI: empty envelope spectrum");

  EnvsiBreakdown out;
  double numerator = 0.0;
  for (std::size_t i = 1; i <= cfg.harmonic_count; ++i) {
    const double centre = cfg.fault_frequency * static_cast<double>(i);
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < ses.freq_bins.size(); ++k) {
      if (std::abs(ses.freq_bins[k] - centre) > tol) continue;
      if (!best || ses.amplitudes[k] > ses.amplitudes[*best]) best = k;
    }
    if (!best) {
      throw ParameterError("ENVSI: no SES bin within ±" + std::to_string(tol) + " Hz of harmonic " +
                           std::to_string(i) + " (" + std::to_string(centre) + " Hz)");
    }
    out.harmonic_bins.push_back(*best);
    numerator += ses.amplitudes[*best] * ses.amplitudes[*best];
  }

  out.last_bin = out.harmonic_bins.back();
  for (std::size_t b : out.harmonic_bins) out.last_bin = std::max(out.last_bin, b);
  if (cfg.total_band_top) {
    if (*cfg.total_band_top < ses.freq_bins[out.last_bin])
      throw ParameterError("ENVSI: total band must cover all analysed harmonics");
    while (out.last_bin + 1 < ses.freq_bins.size() &&
           ses.freq_bins[out.last_bin + 1] <= *cfg.total_band_top)
      ++out.last_bin;
  }
  double denominator = 0.0;
  for (std::size_t k = 0; k <= out.last_bin; ++k) denominator += ses.amplitudes[k] * ses.amplitudes[k];
  out.value = denominator > 0.0 ? numerator / denominator : 0.0;
  return out;
}

inline double envsi(const EnvelopeSpectrum& ses, const EnvsiConfig& cfg) {
  return envsi_breakdown(ses, cfg).value;
}

/// A selector curve pushed through filter → SES → ENVSI.
struct SelectorEvaluation {
  SelectorCurve curve;
  double envsi = 0.0;
  bool all_zero_curve = false;
  Signal filtered;
  EnvelopeSpectrum ses;
};

inline SelectorEvaluation evaluate_selector(const Signal& signal, SelectorCurve curve,
                                            const EnvsiConfig& cfg) {
  SelectorEvaluation out;
  out.all_zero_curve = std::all_of(curve.values.begin(), curve.values.end(),
                                   [](double v) { return v == 0.0; });
  out.filtered = filter_with_selector(signal, curve);
  out.ses = squared_envelope_spectrum(out.filtered);
  out.envsi = envsi(out.ses, cfg);
  out.curve = std::move(curve);
  return out;
}

struct DiagnosisReport {
  std::vector<SelectorEvaluation> classes;  // one per NTF component
  std::size_t chosen_class = 0;
  double beta = 0.0;
  double threshold = kDefaultDecisionThreshold;
  bool faulty = false;

  double max_envsi() const { return classes.empty() ? 0.0 : classes[chosen_class].envsi; }
  const SelectorEvaluation& chosen() const { return classes.at(chosen_class); }
};

/// Turns the k-th column of H into a max-normalized selector curve.
inline SelectorCurve class_curve(const NtfFactors& factors, std::size_t k,
                                 const std::vector<double>& freq_bins) {
  if (factors.h.rows != freq_bins.size()) throw ParameterError("class_curve: H rows do not match bins");
  SelectorCurve c{factors.h.column(k), freq_bins, "ntf"};
  for (double& v : c.values) v = std::max(v, 0.0);
  normalize_max(c.values);
  return c;
}

/// Scores every H column; the class with the largest ENVSI (first on ties) is
/// chosen and the record is flagged faulty when that ENVSI exceeds `threshold`.
inline DiagnosisReport diagnose(const Signal& signal, const NtfFactors& factors,
                                const std::vector<double>& freq_bins, const EnvsiConfig& cfg,
                                double beta = 0.0, double threshold = kDefaultDecisionThreshold) {
  DiagnosisReport report;
  report.beta = beta;
  report.threshold = threshold;
  for (std::size_t k = 0; k < factors.rank(); ++k) {
    report.classes.push_back(evaluate_selector(signal, class_curve(factors, k, freq_bins), cfg));
    if (report.classes[k].envsi > report.classes[report.chosen_class].envsi) report.chosen_class = k;
  }
  report.faulty = report.max_envsi() > threshold;
  return report;
}

/// Σ f·v² / Σ v² over the curve; 0 for an all-zero curve.
inline double energy_centroid(const SelectorCurve& curve) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < curve.values.size(); ++k) {
    const double e = curve.values[k] * curve.values[k];
    num += curve.freq_bins[k] * e;
    den += e;
  }
  return den > 0.0 ? num / den : 0.0;
}

/// Fraction of the curve's energy (Σ v²) inside [lo, hi] Hz.
inline double band_energy_fraction(const SelectorCurve& curve, double lo, double hi) {
  double in = 0.0, total = 0.0;
  for (std::size_t k = 0; k < curve.values.size(); ++k) {
    const double e = curve.values[k] * curve.values[k];
    total += e;
    if (curve.freq_bins[k] >= lo && curve.freq_bins[k] <= hi) in += e;
  }
  return total > 0.0 ? in / total : 0.0;
}

}  // namespace ntfdm
