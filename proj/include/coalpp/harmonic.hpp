// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "coalpp/errors.hpp"

namespace coalpp {

/// H^{(b)}_n = sum_{k=1}^n 1/k^b by forward summation; 0 for n = 0.
inline double harmonic(std::uint64_t n, unsigned order = 1) {
  if (order == 0) throw invalid_parameter("harmonic: order must be positive");
  double sum = 0.0;
  if (order == 1) {
    for (std::uint64_t k = 1; k <= n; ++k) sum += 1.0 / static_cast<double>(k);
  } else if (order == 2) {
    for (std::uint64_t k = 1; k <= n; ++k) {
      const double kd = static_cast<double>(k);
      sum += 1.0 / (kd * kd);
    }
  } else {
    for (std::uint64_t k = 1; k <= n; ++k) sum += std::pow(static_cast<double>(k), -static_cast<double>(order));
  }
  return sum;
}

/// H*_n = sum_{k=2}^n 1/k; 0 for n in {0, 1}.
inline double hstar(std::uint64_t n) {
  double sum = 0.0;
  for (std::uint64_t k = 2; k <= n; ++k) sum += 1.0 / static_cast<double>(k);
  return sum;
}

/// Returned by floor_pow when n^t overflows any sane scale; callers cap far
/// below this.
inline constexpr std::uint64_t kFloorPowHuge = std::numeric_limits<std::uint64_t>::max();

/// floor(n^t) computed as floor(exp(t log n)) with a relative 1e-12 guard so
/// that mathematically integral powers (say 100^0.5) do not floor one short.
inline std::uint64_t floor_pow(std::uint64_t n, double t) {
  if (n == 0) throw invalid_parameter("floor_pow: base must be positive");
  if (!(t >= 0.0) || !std::isfinite(t)) throw invalid_parameter("floor_pow: exponent must be finite and nonnegative");
  if (n == 1 || t == 0.0) return 1;
  const double e = t * std::log(static_cast<double>(n));
  if (e >= 43.0) return kFloorPowHuge;  // e^43 > 4.7e18
  return static_cast<std::uint64_t>(std::floor(std::exp(e) * (1.0 + 1e-12)));
}

/// F_n(t) = H*_{floor(n^t)-1} / log n. A distribution-function value with
/// F_n(t) <= t for all t >= 0.
inline double fn_cdf(std::uint64_t n, double t) {
  if (n < 2) throw invalid_parameter("fn_cdf: n must be at least 2");
  if (!(t >= 0.0)) throw invalid_parameter("fn_cdf: t must be nonnegative");
  const std::uint64_t m = floor_pow(n, t);
  return hstar(m - 1) / std::log(static_cast<double>(n));
}

/// Cached prefix sums H^{(b)}_1..H^{(b)}_N for O(1) lookups. Immutable after
/// construction; safe for concurrent reads.
class HarmonicCache {
 public:
  HarmonicCache(std::uint64_t max_n, unsigned order = 1) : order_(order) {
    if (order == 0) throw invalid_parameter("HarmonicCache: order must be positive");
    values_.reserve(max_n);
    double sum = 0.0;
    for (std::uint64_t k = 1; k <= max_n; ++k) {
      if (order == 1) {
        sum += 1.0 / static_cast<double>(k);
      } else if (order == 2) {
        const double kd = static_cast<double>(k);
        sum += 1.0 / (kd * kd);
      } else {
        sum += std::pow(static_cast<double>(k), -static_cast<double>(order));
      }
      values_.push_back(sum);
    }
  }

  unsigned order() const { return order_; }
  std::uint64_t max_n() const { return values_.size(); }

  /// H^{(b)}_k; k = 0 is the empty sum.
  double at(std::uint64_t k) const {
    if (k == 0) return 0.0;
    if (k > values_.size()) throw invalid_parameter("HarmonicCache::at: index beyond cache");
    return values_[k - 1];
  }

  /// H*_k = H_k - 1 for k >= 1; order-1 caches only.
  double hstar_at(std::uint64_t k) const {
    if (order_ != 1) throw invalid_parameter("HarmonicCache::hstar_at: needs an order-1 cache");
    return k == 0 ? 0.0 : at(k) - 1.0;
  }

 private:
  unsigned order_;
  std::vector<double> values_;
};

/// fn_cdf through a cache; the cache must cover floor(n^t) - 1.
inline double fn_cdf(std::uint64_t n, double t, const HarmonicCache& cache) {
  if (n < 2) throw invalid_parameter("fn_cdf: n must be at least 2");
  if (!(t >= 0.0)) throw invalid_parameter("fn_cdf: t must be nonnegative");
  const std::uint64_t m = floor_pow(n, t);
  return cache.hstar_at(m - 1) / std::log(static_cast<double>(n));
}

}  // namespace coalpp
