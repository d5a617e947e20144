#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "ntfdm/fft.hpp"
#include "ntfdm/spectral.hpp"

using namespace ntfdm;

namespace {

// Direct O(N^2) DFT in long double.
std::vector<std::complex<long double>> brute_dft(const std::vector<double>& x, std::size_t n) {
  std::vector<std::complex<long double>> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::complex<long double> s = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      const long double ang = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k * t % n) /
                              static_cast<long double>(n);
      s += static_cast<long double>(x[t]) * std::complex<long double>(std::cos(ang), std::sin(ang));
    }
    out[k] = s;
  }
  return out;
}

Signal tone(double freq, double rate, std::size_t n, double amp = 1.0) {
  Signal s{std::vector<double>(n), rate};
  for (std::size_t i = 0; i < n; ++i) s.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / rate);
  return s;
}

}  // namespace

TEST(Fft, RoundTrip) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (std::size_t n : {1u, 2u, 7u, 64u, 1000u}) {
    std::vector<double> x(n);
    for (double& v : x) v = g(rng);
    const auto back = fft::irfft(fft::rfft(x), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(back[i], x[i], 1e-12);
  }
}

TEST(Fft, Parseval) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const std::size_t n = 512;
  std::vector<double> x(n);
  for (double& v : x) v = g(rng);
  const auto spec = fft::rfft(x);
  double time = 0.0, freq = 0.0;
  for (double v : x) time += v * v;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double w = (k == 0 || k == n / 2) ? 1.0 : 2.0;
    freq += w * std::norm(spec[k]);
  }
  EXPECT_NEAR(freq / n, time, 1e-9 * time);
}

TEST(Stft, DefaultGeometry) {
  StftConfig c;
  EXPECT_EQ(c.hop(), 38u);
  EXPECT_EQ(c.bins(), 257u);
  EXPECT_EQ(c.frames(255), 0u);
  EXPECT_EQ(c.frames(256), 1u);
  EXPECT_EQ(c.frames(256 + 38), 2u);
  EXPECT_EQ(c.frames(25000), (25000u - 256u) / 38u + 1u);
}

TEST(Stft, WindowsAreSymmetric) {
  for (auto kind : {WindowKind::hamming, WindowKind::hann}) {
    const auto w = make_window(kind, 256);
    for (std::size_t n = 0; n < w.size(); ++n) EXPECT_NEAR(w[n], w[w.size() - 1 - n], 1e-15);
  }
  const auto h = make_window(WindowKind::hamming, 256);
  EXPECT_NEAR(h.front(), 0.08, 1e-15);
}

TEST(Stft, MatchesBruteForceDft) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::vector<double> x(4000);
  for (double& v : x) v = g(rng);
  StftConfig c;
  const Spectrogram s = stft_spectrogram(x, 1000.0, c);
  const auto w = make_window(c.window, c.window_length);
  for (std::size_t t : {std::size_t{0}, std::size_t{7}, s.frames - 1}) {
    std::vector<double> frame(c.window_length);
    for (std::size_t n = 0; n < frame.size(); ++n) frame[n] = x[t * c.hop() + n] * w[n];
    const auto ref = brute_dft(frame, c.fft_length);
    for (std::size_t k = 0; k < s.bins; ++k) {
      const double r = static_cast<double>(std::abs(ref[k]));
      EXPECT_NEAR(s.at(t, k), r, 1e-9 * std::max(r, 1.0)) << "frame " << t << " bin " << k;
    }
  }
}

TEST(Stft, AxesAndToneLocation) {
  const Signal s = tone(2500.0, 25000.0, 5000);
  const Spectrogram sp = stft_spectrogram(s, StftConfig{});
  EXPECT_DOUBLE_EQ(sp.freq_bins[1], 25000.0 / 512.0);
  EXPECT_DOUBLE_EQ(sp.freq_bins.back(), 12500.0);
  EXPECT_NEAR(sp.time_centers[0], 127.5 / 25000.0, 1e-15);
  std::size_t peak = 0;
  for (std::size_t k = 0; k < sp.bins; ++k)
    if (sp.at(3, k) > sp.at(3, peak)) peak = k;
  EXPECT_NEAR(sp.freq_bins[peak], 2500.0, 25000.0 / 512.0);
}

TEST(Stft, RejectsShortInputAndBadConfig) {
  EXPECT_THROW(stft_spectrogram(std::vector<double>(100), 1000.0, StftConfig{}), SizeError);
  StftConfig bad;
  bad.overlap = 1.0;
  EXPECT_THROW(validate(bad), ParameterError);
  bad = StftConfig{};
  bad.fft_length = 128;
  EXPECT_THROW(validate(bad), ParameterError);
}

TEST(Envelope, RecoversAmModulation) {
  // (1 + 0.5 cos(2π·10 t))·sin(2π·1000 t); all components on-bin.
  const double rate = 8000.0;
  const std::size_t n = 8000;
  Signal s{std::vector<double>(n), rate};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i / rate;
    s.samples[i] = (1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * 10.0 * t)) *
                   std::sin(2.0 * std::numbers::pi * 1000.0 * t);
  }
  const Signal env = analytic_envelope(s);
  for (std::size_t i = 0; i < n; i += 97) {
    const double t = i / rate;
    EXPECT_NEAR(env.samples[i], 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * 10.0 * t), 1e-9);
  }
}

TEST(Envelope, OddLength) {
  const Signal s = tone(100.0, 1001.0, 1001, 2.0);
  const Signal env = analytic_envelope(s);
  for (std::size_t i = 0; i < env.size(); i += 50) EXPECT_NEAR(env.samples[i], 2.0, 1e-9);
}
