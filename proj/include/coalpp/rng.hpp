// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "coalpp/errors.hpp"

namespace coalpp {

/// Default seed for every command-line entry point, fixed so that bare
/// invocations are reproducible.
inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

using RngStream = std::mt19937_64;

namespace detail {

/// SplitMix64 finalizer; bijective 64-bit mixer.
inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// 64-bit seed for a named substream of a run (distinct purposes give
/// unrelated streams for the same user seed).
inline constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t purpose) noexcept {
  return detail::mix64(seed ^ detail::mix64(purpose ^ 0xC2B2AE3D27D4EB4FULL));
}

/// Stream for one replicate of a run. Streams of distinct replicates are
/// statistically independent, and the mapping does not depend on how
/// replicates are scheduled onto threads.
inline RngStream make_stream(std::uint64_t seed, std::uint64_t replicate) {
  return RngStream(detail::mix64(seed + 0x9E3779B97F4A7C15ULL * (replicate + 1)));
}

/// Uniform on [0, 1) with 53-bit resolution.
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform on (0, 1]; safe to pass to log.
template <class Rng>
double uniform01_pos(Rng& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

template <class Rng>
bool bernoulli_draw(Rng& rng, double p) {
  return uniform01(rng) < p;
}

/// Exponential draw by inverse CDF, -log(U)/rate with U in (0,1].
template <class Rng>
double exponential_draw(Rng& rng, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw invalid_parameter("exponential_draw: rate must be positive and finite");
  return -std::log(uniform01_pos(rng)) / rate;
}

namespace detail {

// Knuth inversion by multiplication; valid while exp(-mean) is far from the
// subnormal range.
template <class Rng>
std::uint64_t poisson_small(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  const double limit = std::exp(-mean);
  std::uint64_t count = 0;
  double prod = uniform01_pos(rng);
  while (prod > limit) {
    ++count;
    prod *= uniform01_pos(rng);
  }
  return count;
}

}  // namespace detail

/// Poisson draw with arbitrary finite mean. Large means are split additively
/// into chunks of at most 12, so the result is exactly Poisson for any mean.
template <class Rng>
std::uint64_t poisson_draw(Rng& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw invalid_parameter("poisson_draw: mean must be finite and nonnegative");
  std::uint64_t total = 0;
  while (mean > 12.0) {
    total += detail::poisson_small(rng, 12.0);
    mean -= 12.0;
  }
  return total + detail::poisson_small(rng, mean);
}

}  // namespace coalpp
