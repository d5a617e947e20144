#pragma once

// McCulloch (1986) quantile estimator of the stable-law index α.
// The tabulated function α = ψ1(v_α, v_β) with
//   v_α = (q.95 − q.05) / (q.75 − q.25),
//   v_β = (q.95 + q.05 − 2 q.50) / (q.95 − q.05),
// interpolated bilinearly and clamped at the grid boundary.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ntfdm/stats.hpp"

namespace ntfdm::mcculloch {

inline constexpr std::array<double, 15> kNuAlpha = {2.439, 2.5, 2.6, 2.7, 2.8, 3.0, 3.2, 3.5,
                                                    4.0,   5.0, 6.0, 8.0, 10.0, 15.0, 25.0};
inline constexpr std::array<double, 7> kNuBeta = {0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0};

// Rows follow kNuAlpha, columns kNuBeta.
inline constexpr double kAlpha[15][7] = {
    {2.000, 2.000, 2.000, 2.000, 2.000, 2.000, 2.000},
    {1.916, 1.924, 1.924, 1.924, 1.924, 1.924, 1.924},
    {1.808, 1.813, 1.829, 1.829, 1.829, 1.829, 1.829},
    {1.729, 1.730, 1.737, 1.745, 1.745, 1.745, 1.745},
    {1.664, 1.663, 1.663, 1.668, 1.676, 1.676, 1.676},
    {1.563, 1.560, 1.553, 1.548, 1.547, 1.547, 1.547},
    {1.484, 1.480, 1.471, 1.460, 1.448, 1.438, 1.438},
    {1.391, 1.386, 1.378, 1.364, 1.337, 1.318, 1.318},
    {1.279, 1.273, 1.266, 1.250, 1.210, 1.184, 1.150},
    {1.128, 1.121, 1.114, 1.101, 1.067, 1.027, 0.973},
    {1.029, 1.021, 1.014, 1.004, 0.974, 0.935, 0.874},
    {0.896, 0.892, 0.884, 0.883, 0.855, 0.823, 0.769},
    {0.818, 0.812, 0.806, 0.801, 0.780, 0.756, 0.691},
    {0.698, 0.695, 0.692, 0.689, 0.676, 0.656, 0.597},
    {0.593, 0.590, 0.588, 0.586, 0.579, 0.563, 0.513},
};

namespace detail {
template <std::size_t N>
void bracket(const std::array<double, N>& grid, double x, std::size_t& lo, double& frac) {
  if (x <= grid.front()) {
    lo = 0;
    frac = 0.0;
    return;
  }
  if (x >= grid.back()) {
    lo = N - 2;
    frac = 1.0;
    return;
  }
  lo = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), x) - grid.begin()) - 1;
  frac = (x - grid[lo]) / (grid[lo + 1] - grid[lo]);
}
}  // namespace detail

/// ψ1 lookup. |v_β| is used (α does not depend on the sign of the skew).
inline double alpha_from_ratios(double nu_alpha, double nu_beta) {
  if (std::isnan(nu_alpha)) return 2.0;
  nu_beta = std::isnan(nu_beta) ? 0.0 : std::abs(nu_beta);
  std::size_t ia = 0, ib = 0;
  double fa = 0.0, fb = 0.0;
  detail::bracket(kNuAlpha, nu_alpha, ia, fa);
  detail::bracket(kNuBeta, nu_beta, ib, fb);
  const double top = (1.0 - fb) * kAlpha[ia][ib] + fb * kAlpha[ia][ib + 1];
  const double bottom = (1.0 - fb) * kAlpha[ia + 1][ib] + fb * kAlpha[ia + 1][ib + 1];
  return (1.0 - fa) * top + fa * bottom;
}

struct QuantileRatios {
  double nu_alpha = 0.0;
  double nu_beta = 0.0;
};

inline QuantileRatios quantile_ratios(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double q05 = stats::quantile_sorted(s, 0.05);
  const double q25 = stats::quantile_sorted(s, 0.25);
  const double q50 = stats::quantile_sorted(s, 0.50);
  const double q75 = stats::quantile_sorted(s, 0.75);
  const double q95 = stats::quantile_sorted(s, 0.95);
  QuantileRatios r;
  const double wide = q95 - q05;
  const double iqr = q75 - q25;
  r.nu_alpha = iqr > 0.0 ? wide / iqr : (wide > 0.0 ? INFINITY : NAN);
  r.nu_beta = wide > 0.0 ? (q95 + q05 - 2.0 * q50) / wide : 0.0;
  return r;
}

/// α̂ in [0.513, 2]; a constant sample yields 2.
inline double estimate_alpha(std::span<const double> x) {
  const QuantileRatios r = quantile_ratios(x);
  return alpha_from_ratios(r.nu_alpha, r.nu_beta);
}

}  // namespace ntfdm::mcculloch
