#pragma once

// Rank-K non-negative CP factorization  C ≈ Σ_k w_k ∘ h_k ∘ q_k  fitted by
// minimizing the β-divergence with multiplicative updates.
//
// β follows the convention in which β = 1 is the squared Euclidean cost,
// β = 0 the generalized Kullback-Leibler divergence and β = -1 Itakura-Saito.
// Every factor update has the form
//
//   w_ik <- w_ik · Σ_{j,m} h_jk q_mk c ĉ^(β-1)  /  Σ_{j,m} h_jk q_mk ĉ^β
//
// (and likewise for H and Q), with ĉ recomputed before each factor is updated.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ntfdm/array.hpp"
#include "ntfdm/errors.hpp"

namespace ntfdm {

struct NtfConfig {
  std::size_t rank = 4;
  double beta = -1.0;
  std::size_t max_iterations = 1000;
  double tolerance = 1e-8;            // relative objective decrease ...
  std::size_t tolerance_window = 10;  // ... measured over this many iterations
  double epsilon = 1e-12;             // floor applied to ĉ
  std::uint64_t seed = 0;
  std::size_t restarts = 1;
};

struct NtfFactors {
  Matrix w;  // dim0 x K
  Matrix h;  // dim1 x K
  Matrix q;  // dim2 x K
  std::vector<double> objective_trace;  // [initial, after iteration 1, ...]
  std::size_t iterations_run = 0;

  std::size_t rank() const { return w.cols; }
  double final_objective() const {
    return objective_trace.empty() ? std::numeric_limits<double>::quiet_NaN()
                                   : objective_trace.back();
  }
};

inline void validate_beta(double beta) {
  if (!(beta == -1.0 || beta == 0.0 || beta > 0.0) || !std::isfinite(beta)) {
    throw ParameterError("beta must be -1, 0 or a positive real, got " + std::to_string(beta));
  }
}

inline void validate(const NtfConfig& c) {
  validate_beta(c.beta);
  if (c.rank < 1) throw ParameterError("NTF rank must be >= 1");
  if (c.max_iterations < 1) throw ParameterError("NTF max_iterations must be >= 1");
  if (!(c.epsilon > 0.0)) throw ParameterError("NTF epsilon must be > 0");
  if (!(c.tolerance >= 0.0)) throw ParameterError("NTF tolerance must be >= 0");
  if (c.tolerance_window < 1) throw ParameterError("NTF tolerance window must be >= 1");
  if (c.restarts < 1) throw ParameterError("NTF restarts must be >= 1");
}

inline void check_shapes(const Tensor3& c, const NtfFactors& f) {
  const std::size_t k = f.w.cols;
  if (k == 0 || f.h.cols != k || f.q.cols != k || f.w.rows != c.dim0 || f.h.rows != c.dim1 ||
      f.q.rows != c.dim2) {
    throw ParameterError("NTF factor shapes do not match the tensor");
  }
}

/// ĉ_ijm = Σ_k w_ik h_jk q_mk.
inline Tensor3 reconstruct(const NtfFactors& f) {
  Tensor3 out(f.w.rows, f.h.rows, f.q.rows);
  const std::size_t rank = f.rank();
  for (std::size_t i = 0; i < out.dim0; ++i)
    for (std::size_t j = 0; j < out.dim1; ++j)
      for (std::size_t m = 0; m < out.dim2; ++m) {
        double s = 0.0;
        for (std::size_t k = 0; k < rank; ++k) s += f.w(i, k) * f.h(j, k) * f.q(m, k);
        out(i, j, m) = s;
      }
  return out;
}

/// ‖C − Ĉ‖_F / ‖C‖_F.
inline double relative_error(const Tensor3& c, const NtfFactors& f) {
  const Tensor3 r = reconstruct(f);
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < c.data.size(); ++n) {
    const double d = c.data[n] - r.data[n];
    num += d * d;
    den += c.data[n] * c.data[n];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

/// Scalar β-divergence d(c | ĉ) for one entry; ĉ is floored at eps, and so is
/// c in the Itakura-Saito branch where c = 0 is otherwise undefined.
inline double beta_divergence_term(double c, double chat, double beta, double eps) {
  chat = std::max(chat, eps);
  if (beta == -1.0) {
    c = std::max(c, eps);
    return std::log(chat / c) + c / chat - 1.0;
  }
  if (beta == 0.0) {
    return (c > 0.0 ? c * std::log(c / chat) : 0.0) - c + chat;
  }
  if (beta == 1.0) {
    const double d = c - chat;
    return 0.5 * d * d;
  }
  return c * (std::pow(c, beta) - std::pow(chat, beta)) / beta -
         (std::pow(c, beta + 1.0) - std::pow(chat, beta + 1.0)) / (beta + 1.0);
}

/// Σ over all entries of d(c | ĉ) for the matching branch of the β family.
inline double beta_divergence(const Tensor3& c, const NtfFactors& f, double beta,
                              double eps = 1e-12) {
  validate_beta(beta);
  check_shapes(c, f);
  const Tensor3 chat = reconstruct(f);
  double total = 0.0;
  for (std::size_t n = 0; n < c.data.size(); ++n) {
    total += beta_divergence_term(c.data[n], chat.data[n], beta, eps);
  }
  if (!std::isfinite(total)) throw NumericalError("beta divergence is not finite");
  return total;
}

namespace detail {

// Each tensor row C(i, :, :) is handled as an M x dim1 column-major block, so
// ĉ, the update numerators and denominators become small dense products.
using Block = Eigen::ArrayXXd;
using RowMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Per-entry ingredients of the multiplicative rules: r1 = c·ĉ^(β-1) (numerator
// weight) and r2 = ĉ^β (denominator weight).
struct ItakuraSaito {
  static void floor_data(Block& c, double eps) { c = c.max(eps); }
  void weights(const Block& c, const Block& chat, Block& r1, Block& r2) const {
    r2 = chat.inverse();
    r1 = c * r2.square();
  }
  double objective(const Block& c, const Block& chat) const {
    double total = (c / chat - 1.0).sum();
    // Σ_m ln(ĉ/c) per fibre as the log of a product; exact-fit ratios are exactly 1.
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      const double prod = (chat.col(j) / c.col(j)).prod();
      total += std::isnormal(prod) ? std::log(prod) : (chat.col(j) / c.col(j)).log().sum();
    }
    return total;
  }
};

struct KullbackLeibler {
  static void floor_data(Block&, double) {}
  void weights(const Block& c, const Block& chat, Block& r1, Block& r2) const {
    r1 = c / chat;
    r2.setOnes(c.rows(), c.cols());
  }
  double objective(const Block& c, const Block& chat) const {
    return ((c > 0.0).select(c * (c / chat).log(), 0.0) - c + chat).sum();
  }
};

struct Euclidean {
  static void floor_data(Block&, double) {}
  void weights(const Block& c, const Block& chat, Block& r1, Block& r2) const {
    r1 = c;
    r2 = chat;
  }
  double objective(const Block& c, const Block& chat) const { return 0.5 * (c - chat).square().sum(); }
};

struct GeneralBeta {
  double beta;
  static void floor_data(Block&, double) {}
  void weights(const Block& c, const Block& chat, Block& r1, Block& r2) const {
    r2 = chat.pow(beta - 1.0);
    r1 = c * r2;
    r2 *= chat;
  }
  double objective(const Block& c, const Block& chat) const {
    return (c * (c.pow(beta) - chat.pow(beta)) / beta -
            (c.pow(beta + 1.0) - chat.pow(beta + 1.0)) / (beta + 1.0))
        .sum();
  }
};

/// Reusable buffers for one factorization run.
struct Workspace {
  Eigen::MatrixXd a;     // dim1 x K, a(j, k) = w(i, k) h(j, k)
  Eigen::MatrixXd chat;  // M x dim1
  Block data, r1, r2;    // M x dim1
  Eigen::MatrixXd s1, s2;
  Eigen::MatrixXd num, den;  // target rows x K
};

/// One sweep over the tensor accumulating the numerator and denominator of the
/// update rule for `mode` (0 = W, 1 = H, 2 = Q). Returns the divergence of the
/// current factors when `with_objective` is set.
template <class Rule>
double sweep(const Tensor3& c, const NtfFactors& f, int mode, const Rule& rule, double eps,
             bool with_objective, Workspace& ws) {
  const auto rank = static_cast<Eigen::Index>(f.rank());
  const auto mm = static_cast<Eigen::Index>(c.dim2);
  const auto jj = static_cast<Eigen::Index>(c.dim1);
  const RowMap w(f.w.data.data(), static_cast<Eigen::Index>(f.w.rows), rank);
  const RowMap h(f.h.data.data(), jj, rank);
  const RowMap q(f.q.data.data(), mm, rank);
  const Matrix& target = mode == 0 ? f.w : (mode == 1 ? f.h : f.q);
  ws.num.setZero(static_cast<Eigen::Index>(target.rows), rank);
  ws.den.setZero(static_cast<Eigen::Index>(target.rows), rank);

  double objective = 0.0;
  for (std::size_t i = 0; i < c.dim0; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    ws.a = (h.array().rowwise() * w.row(ii).array()).matrix();
    ws.chat.noalias() = q * ws.a.transpose();
    ws.chat = ws.chat.array().max(eps).matrix();
    ws.data = Eigen::Map<const Eigen::ArrayXXd>(c.data.data() + i * c.dim1 * c.dim2, mm, jj);
    Rule::floor_data(ws.data, eps);
    rule.weights(ws.data, ws.chat.array(), ws.r1, ws.r2);
    if (with_objective) objective += rule.objective(ws.data, ws.chat.array());

    if (mode == 2) {
      ws.num.noalias() += ws.r1.matrix() * ws.a;
      ws.den.noalias() += ws.r2.matrix() * ws.a;
      continue;
    }
    ws.s1.noalias() = ws.r1.matrix().transpose() * q;  // dim1 x K
    ws.s2.noalias() = ws.r2.matrix().transpose() * q;
    if (mode == 0) {
      ws.num.row(ii) = (ws.s1.array() * h.array()).colwise().sum().matrix();
      ws.den.row(ii) = (ws.s2.array() * h.array()).colwise().sum().matrix();
    } else {
      ws.num.array() += ws.s1.array().rowwise() * w.row(ii).array();
      ws.den.array() += ws.s2.array().rowwise() * w.row(ii).array();
    }
  }
  return objective;
}

inline void apply_ratio(Matrix& target, const Workspace& ws) {
  for (std::size_t r = 0; r < target.rows; ++r) {
    for (std::size_t k = 0; k < target.cols; ++k) {
      const auto rr = static_cast<Eigen::Index>(r), kk = static_cast<Eigen::Index>(k);
      const double d = ws.den(rr, kk);
      if (d > 0.0) target(r, k) *= ws.num(rr, kk) / d;
    }
  }
}

template <class Rule>
void update_in_place(const Tensor3& c, NtfFactors& f, const Rule& rule, double eps, Workspace& ws) {
  sweep(c, f, 0, rule, eps, false, ws);
  apply_ratio(f.w, ws);
  sweep(c, f, 1, rule, eps, false, ws);
  apply_ratio(f.h, ws);
  sweep(c, f, 2, rule, eps, false, ws);
  apply_ratio(f.q, ws);
}

/// Calls fn with the rule object matching beta.
template <class Fn>
decltype(auto) with_rule(double beta, Fn&& fn) {
  if (beta == -1.0) return fn(ItakuraSaito{});
  if (beta == 0.0) return fn(KullbackLeibler{});
  if (beta == 1.0) return fn(Euclidean{});
  return fn(GeneralBeta{beta});
}

template <class Rule>
void run_decomposition(const Tensor3& c, NtfFactors& f, const NtfConfig& cfg, const Rule& rule) {
  Workspace ws;
  f.objective_trace.clear();
  f.iterations_run = 0;
  for (;;) {
    const double d = sweep(c, f, 0, rule, cfg.epsilon, true, ws);
    if (!std::isfinite(d)) {
      throw NumericalError("NTF objective became non-finite at iteration " +
                           std::to_string(f.iterations_run));
    }
    f.objective_trace.push_back(d);
    const std::size_t n = f.objective_trace.size();
    if (f.iterations_run >= cfg.max_iterations || d == 0.0) break;
    if (n > cfg.tolerance_window) {
      const double old = f.objective_trace[n - 1 - cfg.tolerance_window];
      if (old - d <= cfg.tolerance * std::abs(old)) break;
    }
    apply_ratio(f.w, ws);
    sweep(c, f, 1, rule, cfg.epsilon, false, ws);
    apply_ratio(f.h, ws);
    sweep(c, f, 2, rule, cfg.epsilon, false, ws);
    apply_ratio(f.q, ws);
    ++f.iterations_run;
  }
}

}  // namespace detail

/// Seeded strictly positive start: entries i.i.d. uniform on (0.1, 1.1].
inline NtfFactors initialize_factors(std::size_t dim0, std::size_t dim1, std::size_t dim2,
                                     std::size_t rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  NtfFactors f;
  f.w = Matrix(dim0, rank);
  f.h = Matrix(dim1, rank);
  f.q = Matrix(dim2, rank);
  for (Matrix* m : {&f.w, &f.h, &f.q})
    for (double& v : m->data) v = 1.1 - unit(rng);
  return f;
}

/// One multiplicative round: W, then H, then Q, recomputing ĉ in between.
/// The objective trace is left untouched.
inline NtfFactors update_step(const Tensor3& c, NtfFactors factors, double beta,
                              double eps = 1e-12) {
  validate_beta(beta);
  check_shapes(c, factors);
  detail::Workspace ws;
  detail::with_rule(beta, [&](const auto& rule) {
    detail::update_in_place(c, factors, rule, eps, ws);
  });
  return factors;
}

/// Rescales each H column to unit maximum, compensating in W; Ĉ is unchanged.
inline void normalize_h_columns(NtfFactors& f) {
  for (std::size_t k = 0; k < f.rank(); ++k) {
    double peak = 0.0;
    for (std::size_t j = 0; j < f.h.rows; ++j) peak = std::max(peak, f.h(j, k));
    if (!(peak > 0.0)) continue;
    for (std::size_t j = 0; j < f.h.rows; ++j) f.h(j, k) /= peak;
    for (std::size_t i = 0; i < f.w.rows; ++i) f.w(i, k) *= peak;
  }
}

/// Iterates from `start` until max_iterations or until the objective falls by
/// less than tolerance (relative) over tolerance_window iterations.
inline NtfFactors refine(const Tensor3& c, NtfFactors start, const NtfConfig& config) {
  validate(config);
  check_shapes(c, start);
  detail::with_rule(config.beta, [&](const auto& rule) {
    detail::run_decomposition(c, start, config, rule);
  });
  return start;
}

/// Seeded factorization; with restarts > 1 the lowest-objective run is kept
/// (ties go to the earliest restart). H columns are max-normalized on return.
inline NtfFactors decompose(const Tensor3& c, const NtfConfig& config) {
  validate(config);
  for (double v : c.data) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("NTF input must be non-negative and finite");
  }
  NtfFactors best;
  for (std::size_t r = 0; r < config.restarts; ++r) {
    NtfFactors start = initialize_factors(c.dim0, c.dim1, c.dim2, config.rank, config.seed + r);
    NtfFactors run = refine(c, std::move(start), config);
    if (r == 0 || run.final_objective() < best.final_objective()) best = std::move(run);
  }
  normalize_h_columns(best);
  return best;
}

}  // namespace ntfdm
