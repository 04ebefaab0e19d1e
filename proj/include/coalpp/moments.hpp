// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "coalpp/coupling.hpp"
#include "coalpp/errors.hpp"
#include "coalpp/geometry.hpp"
#include "coalpp/harmonic.hpp"

namespace coalpp {

namespace detail {

inline std::uint64_t moment_scale(std::uint64_t n, double t2) {
  if (n < 2) throw invalid_parameter("moments: n must be at least 2");
  if (!(t2 >= 0.0)) throw invalid_parameter("moments: t2 must be nonnegative");
  const std::uint64_t m = floor_pow(n, t2);
  if (m > kMaxCoalescentSize) throw scale_limit("moments: floor(n^t2) exceeds 1e7");
  return m;
}

inline void check_rate(double t1) {
  if (!(t1 >= 0.0) || !std::isfinite(t1)) throw invalid_parameter("moments: t1 must be finite and nonnegative");
}

}  // namespace detail

/// E S = t1 H_{m-1} with m = floor(n^{t2}). Pass t1/log n to get the mean of
/// the rescaled corner process.
inline double mean_s(std::uint64_t n, double t1, double t2) {
  const std::uint64_t m = detail::moment_scale(n, t2);
  detail::check_rate(t1);
  return t1 * harmonic(m - 1, 1);
}

/// Var S = t1 H_{m-1} + t1^2 H^{(2)}_{m-1}.
inline double var_s(std::uint64_t n, double t1, double t2) {
  const std::uint64_t m = detail::moment_scale(n, t2);
  detail::check_rate(t1);
  return t1 * harmonic(m - 1, 1) + t1 * t1 * harmonic(m - 1, 2);
}

/// E K = 1 + sum_{k=2}^m t1/(t1+k-1); the corner-process mean is this - 1.
inline double mean_k(std::uint64_t n, double t1, double t2) {
  const std::uint64_t m = detail::moment_scale(n, t2);
  detail::check_rate(t1);
  double sum = 1.0;
  for (std::uint64_t k = 2; k <= m; ++k) sum += t1 / (t1 + static_cast<double>(k - 1));
  return sum;
}

/// Var(S - K) = sum_{k=2}^m t1^2 (t1^2 + 3 t1 (k-1) + (k-1)^2)
///                           / ((k-1)^2 (k-1+t1)^2).
inline double var_s_minus_k(std::uint64_t n, double t1, double t2) {
  const std::uint64_t m = detail::moment_scale(n, t2);
  detail::check_rate(t1);
  double sum = 0.0;
  for (std::uint64_t k = 2; k <= m; ++k) {
    const double j = static_cast<double>(k - 1);
    sum += t1 * t1 * (t1 * t1 + 3.0 * t1 * j + j * j) / (j * j * (j + t1) * (j + t1));
  }
  return sum;
}

/// E[pi_S - pi_K] on the corner rectangle [0, t). With theta = t1/log n this
/// is sum_{j=1}^{m-1} theta^2/(j (j+theta)): the exact difference of the S and
/// K corner means, bounded by theta^2 H^{(2)}_{m-1} and decreasing in n.
inline double mean_delta(std::uint64_t n, double t1, double t2) {
  const std::uint64_t m = detail::moment_scale(n, t2);
  detail::check_rate(t1);
  const double theta = t1 / std::log(static_cast<double>(n));
  double sum = 0.0;
  for (std::uint64_t j = 1; j < m; ++j) {
    const double jd = static_cast<double>(j);
    sum += theta * theta / (jd * (jd + theta));
  }
  return sum;
}

/// exp(-area(u)): the void probability of the unit-intensity limit process.
inline double limit_void_probability(const RectUnion& u) { return std::exp(-area(u)); }

/// Void probability of the S process on one rectangle, conditional on the two
/// tree lengths spanning its t2 side.
inline double conditional_void_probability(const Rect& r, double length_low, double length_high, std::uint64_t n) {
  if (n < 2) throw invalid_parameter("conditional_void_probability: n must be at least 2");
  if (!(length_high >= length_low)) throw invalid_parameter("conditional_void_probability: lengths out of order");
  return std::exp(-r.width() * (length_high - length_low) / (2.0 * std::log(static_cast<double>(n))));
}

/// area(u): the mean of the limit process.
inline double limit_mean(const RectUnion& u) { return area(u); }

/// Flat record of the closed forms at one parameter point. Serializes to a
/// key-value list consumed by the CLI writers.
struct MomentReport {
  std::uint64_t n = 2;
  double t1 = 0.0;
  double t2 = 0.0;
  double mean_s = 0.0;
  double var_s = 0.0;
  double mean_k = 0.0;
  double var_s_minus_k = 0.0;
  double mean_delta = 0.0;
  double limit_mean = 0.0;
  double limit_void = 0.0;

  std::vector<std::pair<std::string, double>> to_kv() const {
    return {{"n", static_cast<double>(n)},
            {"t1", t1},
            {"t2", t2},
            {"mean_s", mean_s},
            {"var_s", var_s},
            {"mean_k", mean_k},
            {"var_s_minus_k", var_s_minus_k},
            {"mean_delta", mean_delta},
            {"limit_mean", limit_mean},
            {"limit_void", limit_void}};
  }
};

inline MomentReport compute_moment_report(std::uint64_t n, double t1, double t2) {
  MomentReport r;
  r.n = n;
  r.t1 = t1;
  r.t2 = t2;
  r.mean_s = mean_s(n, t1, t2);
  r.var_s = var_s(n, t1, t2);
  r.mean_k = mean_k(n, t1, t2);
  r.var_s_minus_k = var_s_minus_k(n, t1, t2);
  r.mean_delta = mean_delta(n, t1, t2);
  r.limit_mean = t1 * t2;
  r.limit_void = std::exp(-t1 * t2);
  return r;
}

}  // namespace coalpp
