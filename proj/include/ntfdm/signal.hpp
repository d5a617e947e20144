#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ntfdm/errors.hpp"

namespace ntfdm {

/// Uniformly sampled real time series.
struct Signal {
  std::vector<double> samples;
  double sample_rate = 0.0;  // Hz

  std::size_t size() const { return samples.size(); }
  double nyquist() const { return 0.5 * sample_rate; }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

inline void validate(const Signal& signal) {
  if (!(signal.sample_rate > 0.0) || !std::isfinite(signal.sample_rate)) {
    throw ParameterError("signal sample rate must be positive, got " +
                         std::to_string(signal.sample_rate));
  }
  if (signal.samples.empty()) throw SizeError("signal is empty");
  for (std::size_t i = 0; i < signal.samples.size(); ++i) {
    if (!std::isfinite(signal.samples[i])) {
      throw NumericalError("signal sample " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace ntfdm
