#pragma once

// Synthetic bearing-fault benchmark: a cyclic train of damped carrier bursts
// (the fault signature), sparse randomly placed high-amplitude bursts on a
// second carrier, and white Gaussian noise.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ntfdm/errors.hpp"
#include "ntfdm/signal.hpp"

namespace ntfdm {

struct SoiParams {
  double amplitude = 4.0;            // A_CI
  double fault_frequency = 25.0;     // Hz, impulse repetition rate
  double carrier_frequency = 2500.0; // Hz
  double decay = 500.0;              // 1/s
  double phase_origin = 0.0;         // s, onset of the first impulse
};

struct ImpulseNoiseParams {
  double amplitude_scale = 20.0;     // A_NCI
  double carrier_frequency = 6000.0; // Hz
  double decay = 1000.0;             // 1/s
  double expected_count_per_second = 1.5;
};

struct SimConfig {
  SoiParams soi;
  ImpulseNoiseParams impulses;
  double gaussian_sigma = 1.2;
  double sample_rate = 25000.0;
  double duration = 30.0;
  std::uint64_t rng_seed = 0;
};

/// Relative envelope level below which a burst is truncated.
inline constexpr double kImpulseTruncation = 1e-4;

/// A·sin(2π f_c t)·exp(−d t), with t measured from the impulse onset.
inline double soi_waveform(const SoiParams& p, double t) {
  return p.amplitude * std::sin(2.0 * std::numbers::pi * p.carrier_frequency * t) *
         std::exp(-p.decay * t);
}

inline void validate(const SimConfig& c) {
  auto fail = [](const std::string& what) { throw ParameterError("simulation: " + what); };
  if (!(c.sample_rate > 0.0)) fail("sample_rate must be > 0");
  if (!(c.duration > 0.0)) fail("duration must be > 0");
  if (!(c.gaussian_sigma >= 0.0)) fail("gaussian_sigma must be >= 0");
  const double nyq = 0.5 * c.sample_rate;
  if (!(c.soi.amplitude >= 0.0)) fail("SOI amplitude must be >= 0");
  if (!(c.soi.fault_frequency > 0.0)) fail("fault_frequency must be > 0");
  if (!(c.soi.carrier_frequency > 0.0 && c.soi.carrier_frequency < nyq))
    fail("SOI carrier must lie in (0, Nyquist)");
  if (!(c.soi.decay >= 0.0)) fail("SOI decay must be >= 0");
  if (!(c.soi.phase_origin >= 0.0)) fail("phase_origin must be >= 0");
  if (!(c.impulses.amplitude_scale >= 0.0)) fail("impulse amplitude must be >= 0");
  if (!(c.impulses.carrier_frequency > 0.0 && c.impulses.carrier_frequency < nyq))
    fail("impulse carrier must lie in (0, Nyquist)");
  if (!(c.impulses.decay >= 0.0)) fail("impulse decay must be >= 0");
  if (!(c.impulses.expected_count_per_second >= 0.0))
    fail("expected_count_per_second must be >= 0");
  if (std::llround(c.sample_rate / c.soi.fault_frequency) < 1)
    fail("fault_frequency exceeds the sample rate");
}

/// The three additive parts of a simulated record, kept separate for inspection.
struct SimComponents {
  std::vector<double> soi;
  std::vector<double> impulses;
  std::vector<double> noise;
  std::vector<std::size_t> soi_onsets;
  std::vector<std::size_t> impulse_onsets;
};

namespace detail {

inline std::size_t burst_length(double decay, double sample_rate, std::size_t remaining) {
  if (decay <= 0.0) return remaining;
  const double t_max = std::log(1.0 / kImpulseTruncation) / decay;
  const auto n = static_cast<std::size_t>(std::ceil(t_max * sample_rate)) + 1;
  return std::min(n, remaining);
}

/// Adds one burst starting at `onset`, scaled by `gain`.
inline void add_burst(std::vector<double>& out, std::size_t onset, double gain, double carrier,
                      double decay, double sample_rate) {
  const std::size_t len = burst_length(decay, sample_rate, out.size() - onset);
  const double w = 2.0 * std::numbers::pi * carrier;
  for (std::size_t k = 0; k < len; ++k) {
    const double t = static_cast<double>(k) / sample_rate;
    out[onset + k] += gain * std::sin(w * t) * std::exp(-decay * t);
  }
}

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

}  // namespace detail

inline SimComponents simulate_components(const SimConfig& config) {
  validate(config);
  const auto n = static_cast<std::size_t>(std::llround(config.duration * config.sample_rate));
  if (n == 0) throw SizeError("simulation: duration shorter than one sample");

  SimComponents out;
  out.soi.assign(n, 0.0);
  out.impulses.assign(n, 0.0);
  out.noise.assign(n, 0.0);

  // Cyclic fault impulses.
  const auto period = static_cast<std::size_t>(
      std::llround(config.sample_rate / config.soi.fault_frequency));
  for (auto onset = static_cast<std::size_t>(std::llround(config.soi.phase_origin *
                                                          config.sample_rate));
       onset < n; onset += period) {
    out.soi_onsets.push_back(onset);
    detail::add_burst(out.soi, onset, config.soi.amplitude, config.soi.carrier_frequency,
                      config.soi.decay, config.sample_rate);
  }

  // Non-cyclic impulses: Poisson count, uniform onsets, amplitude uniform on
  // [0.5, 1.5]·A_NCI with a random sign.
  {
    auto rng = detail::stream(config.rng_seed, 1);
    std::poisson_distribution<long> count_dist(config.impulses.expected_count_per_second *
                                               config.duration);
    const long count =
        config.impulses.expected_count_per_second > 0.0 ? count_dist(rng) : 0L;
    std::uniform_int_distribution<std::size_t> onset_dist(0, n - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (long i = 0; i < count; ++i) {
      const std::size_t onset = onset_dist(rng);
      const double magnitude = config.impulses.amplitude_scale * (0.5 + unit(rng));
      const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
      out.impulse_onsets.push_back(onset);
      detail::add_burst(out.impulses, onset, sign * magnitude, config.impulses.carrier_frequency,
                        config.impulses.decay, config.sample_rate);
    }
  }

  if (config.gaussian_sigma > 0.0) {
    auto rng = detail::stream(config.rng_seed, 2);
    std::normal_distribution<double> gauss(0.0, config.gaussian_sigma);
    for (double& v : out.noise) v = gauss(rng);
  }
  return out;
}

/// x = SOI + impulsive noise + Gaussian noise.
inline Signal simulate(const SimConfig& config) {
  SimComponents parts = simulate_components(config);
  Signal s;
  s.sample_rate = config.sample_rate;
  s.samples.resize(parts.soi.size());
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    s.samples[i] = parts.soi[i] + parts.impulses[i] + parts.noise[i];
  }
  return s;
}

}  // namespace ntfdm
