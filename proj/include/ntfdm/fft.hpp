#pragma once

// Thin RAII layer over FFTW3. Plans are created with FFTW_ESTIMATE so the
// arithmetic is reproducible run to run; planning and plan destruction are
// serialized because FFTW's planner is not thread-safe.

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

namespace ntfdm::fft {

using cplx = std::complex<double>;

namespace detail {
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename T>
struct FftwDeleter {
  void operator()(T* p) const { fftw_free(p); }
};
}  // namespace detail

/// Real-to-complex forward transform of fixed length n (n/2+1 output bins),
/// with the matching unnormalized complex-to-real inverse.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    std::lock_guard lock(detail::planner_mutex());
    fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, spec_, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_, real_, FFTW_ESTIMATE);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() {
    {
      std::lock_guard lock(detail::planner_mutex());
      fftw_destroy_plan(fwd_);
      fftw_destroy_plan(inv_);
    }
    fftw_free(real_);
    fftw_free(spec_);
  }

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// `in` may be shorter than n; the remainder is zero-padded.
  void forward(std::span<const double> in, std::span<cplx> out) {
    const std::size_t m = std::min(in.size(), n_);
    std::copy_n(in.begin(), m, real_);
    std::fill(real_ + m, real_ + n_, 0.0);
    fftw_execute(fwd_);
    for (std::size_t k = 0; k < bins(); ++k) out[k] = {spec_[k][0], spec_[k][1]};
  }

  /// Unnormalized inverse (scaled by n). Imaginary parts of DC/Nyquist are ignored.
  void inverse(std::span<const cplx> in, std::span<double> out) {
    for (std::size_t k = 0; k < bins(); ++k) {
      spec_[k][0] = in[k].real();
      spec_[k][1] = in[k].imag();
    }
    fftw_execute(inv_);
    std::copy_n(real_, n_, out.begin());
  }

 private:
  std::size_t n_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

/// In-place complex transform of fixed length n. Backward is unnormalized.
class ComplexFft {
 public:
  explicit ComplexFft(std::size_t n) : n_(n) {
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    std::lock_guard lock(detail::planner_mutex());
    fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;
  ~ComplexFft() {
    {
      std::lock_guard lock(detail::planner_mutex());
      fftw_destroy_plan(fwd_);
      fftw_destroy_plan(bwd_);
    }
    fftw_free(buf_);
  }

  void forward(std::span<cplx> data) { run(fwd_, data); }
  void backward(std::span<cplx> data) { run(bwd_, data); }

 private:
  void run(fftw_plan plan, std::span<cplx> data) {
    for (std::size_t i = 0; i < n_; ++i) {
      buf_[i][0] = data[i].real();
      buf_[i][1] = data[i].imag();
    }
    fftw_execute(plan);
    for (std::size_t i = 0; i < n_; ++i) data[i] = {buf_[i][0], buf_[i][1]};
  }

  std::size_t n_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

inline std::vector<cplx> rfft(std::span<const double> x) {
  RealFft plan(x.size());
  std::vector<cplx> out(plan.bins());
  plan.forward(x, out);
  return out;
}

/// Normalized inverse of rfft for a length-n real signal.
inline std::vector<double> irfft(std::span<const cplx> spectrum, std::size_t n) {
  RealFft plan(n);
  std::vector<double> out(n);
  plan.inverse(spectrum, out);
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace ntfdm::fft
