#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ntfdm/errors.hpp"
#include "ntfdm/fft.hpp"
#include "ntfdm/signal.hpp"

namespace ntfdm {

enum class WindowKind { hamming, hann, rectangular };

struct StftConfig {
  WindowKind window = WindowKind::hamming;
  std::size_t window_length = 256;
  double overlap = 0.85;
  std::size_t fft_length = 512;

  std::size_t hop() const {
    const auto h = static_cast<std::size_t>(
        std::llround(static_cast<double>(window_length) * (1.0 - overlap)));
    return h == 0 ? 1 : h;
  }
  std::size_t bins() const { return fft_length / 2 + 1; }
  /// Number of whole frames that fit in `n` samples (0 if n < window).
  std::size_t frames(std::size_t n) const {
    return n < window_length ? 0 : (n - window_length) / hop() + 1;
  }
};

inline void validate(const StftConfig& c) {
  if (c.window_length < 2) throw ParameterError("STFT window length must be >= 2");
  if (!(c.overlap >= 0.0 && c.overlap < 1.0)) throw ParameterError("STFT overlap must be in [0, 1)");
  if (c.fft_length < c.window_length)
    throw ParameterError("STFT fft_length must be >= window length");
}

/// Symmetric window coefficients (w[0] == w[L-1]).
inline std::vector<double> make_window(WindowKind kind, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (kind == WindowKind::rectangular || length < 2) return w;
  const double denom = static_cast<double>(length - 1);
  for (std::size_t n = 0; n < length; ++n) {
    const double c = std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / denom);
    w[n] = kind == WindowKind::hamming ? 0.54 - 0.46 * c : 0.5 - 0.5 * c;
  }
  return w;
}

/// |STFT| magnitudes stored frequency-major: row f holds the time series of bin f.
struct Spectrogram {
  std::size_t frames = 0;  // T
  std::size_t bins = 0;    // F
  std::vector<double> magnitudes;
  std::vector<double> time_centers;  // s
  std::vector<double> freq_bins;     // Hz

  std::span<const double> row(std::size_t f) const {
    return {magnitudes.data() + f * frames, frames};
  }
  std::span<double> row(std::size_t f) { return {magnitudes.data() + f * frames, frames}; }
  double at(std::size_t t, std::size_t f) const { return magnitudes[f * frames + t]; }
};

/// One-sided magnitude spectrogram. Frames start at sample 0 and advance by
/// hop(); a trailing partial frame is dropped.
inline Spectrogram stft_spectrogram(std::span<const double> samples, double sample_rate,
                                    const StftConfig& config) {
  validate(config);
  const std::size_t frames = config.frames(samples.size());
  if (frames == 0) {
    throw SizeError("signal of " + std::to_string(samples.size()) +
                    " samples is shorter than the STFT window (" +
                    std::to_string(config.window_length) + ")");
  }
  const std::vector<double> window = make_window(config.window, config.window_length);
  const std::size_t hop = config.hop();

  Spectrogram s;
  s.frames = frames;
  s.bins = config.bins();
  s.magnitudes.resize(s.frames * s.bins);
  s.time_centers.resize(frames);
  s.freq_bins.resize(s.bins);
  for (std::size_t k = 0; k < s.bins; ++k) {
    s.freq_bins[k] = static_cast<double>(k) * sample_rate / static_cast<double>(config.fft_length);
  }

  fft::RealFft plan(config.fft_length);
  std::vector<double> frame(config.window_length);
  std::vector<fft::cplx> spec(plan.bins());
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * hop;
    for (std::size_t n = 0; n < config.window_length; ++n) frame[n] = samples[start + n] * window[n];
    plan.forward(frame, spec);
    for (std::size_t k = 0; k < s.bins; ++k) s.magnitudes[k * frames + t] = std::abs(spec[k]);
    s.time_centers[t] =
        (static_cast<double>(start) + 0.5 * static_cast<double>(config.window_length - 1)) /
        sample_rate;
  }
  return s;
}

inline Spectrogram stft_spectrogram(const Signal& signal, const StftConfig& config) {
  validate(signal);
  return stft_spectrogram(signal.samples, signal.sample_rate, config);
}

/// Magnitude of the analytic signal built in the frequency domain: negative
/// frequencies zeroed, positive doubled, DC and Nyquist kept.
inline Signal analytic_envelope(const Signal& signal) {
  if (signal.samples.empty()) throw SizeError("analytic_envelope: empty signal");
  const std::size_t n = signal.samples.size();
  const std::vector<fft::cplx> half = fft::rfft(signal.samples);

  std::vector<fft::cplx> full(n, fft::cplx{});
  full[0] = half[0];
  const std::size_t last_positive = (n % 2 == 0) ? n / 2 - 1 : n / 2;
  for (std::size_t k = 1; k <= last_positive; ++k) full[k] = 2.0 * half[k];
  if (n % 2 == 0 && n > 1) full[n / 2] = half[n / 2];

  fft::ComplexFft plan(n);
  plan.backward(full);
  Signal env;
  env.sample_rate = signal.sample_rate;
  env.samples.resize(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) env.samples[i] = std::abs(full[i]) * scale;
  return env;
}

}  // namespace ntfdm
