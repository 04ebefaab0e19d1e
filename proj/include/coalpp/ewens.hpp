// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "coalpp/coalescent.hpp"
#include "coalpp/errors.hpp"
#include "coalpp/harmonic.hpp"
#include "coalpp/rng.hpp"

namespace coalpp {

/// Permutation of [n] in one-line form; map[i] is the 0-based image of i.
struct Permutation {
  std::vector<std::uint32_t> map;
  std::uint32_t size() const { return static_cast<std::uint32_t>(map.size()); }
};

/// Number of disjoint cycles, fixed points included. Index-chasing with a
/// visited mask; validates that map is a bijection.
inline std::uint64_t cycle_count(const Permutation& p) {
  const std::size_t n = p.map.size();
  std::vector<bool> image(n, false);
  for (std::uint32_t v : p.map) {
    if (v >= n || image[v]) throw invalid_parameter("cycle_count: not a permutation");
    image[v] = true;
  }
  std::vector<bool> seen(n, false);
  std::uint64_t cycles = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i]) continue;
    ++cycles;
    std::size_t j = i;
    while (!seen[j]) {
      seen[j] = true;
      j = p.map[j];
    }
  }
  return cycles;
}

/// x(x+1)...(x+n-1); 1 for n = 0.
inline double rising_factorial(double x, std::uint64_t n) {
  double prod = 1.0;
  for (std::uint64_t i = 0; i < n; ++i) prod *= x + static_cast<double>(i);
  return prod;
}

/// Probability of one fixed permutation of [n] with the given cycle count,
/// under the measure weighting permutations by t1^{#cycles}.
inline double ewens_pmf(std::uint64_t n, double t1, std::uint64_t cycles) {
  if (n == 0) throw invalid_parameter("ewens_pmf: n must be at least 1");
  if (!(t1 > 0.0) || !std::isfinite(t1)) throw invalid_parameter("ewens_pmf: t1 must be positive and finite");
  if (cycles < 1 || cycles > n) throw invalid_parameter("ewens_pmf: cycle count out of range");
  return std::pow(t1, static_cast<double>(cycles)) / rising_factorial(t1, n);
}

/// Sequential insertion sampler: element i+1 opens a new cycle with
/// probability t1/(t1+i), else is spliced after a uniformly chosen earlier
/// element. The result is the t1-weighted measure on permutations of [n].
template <class Rng>
Permutation sample_crp(std::uint64_t n, double t1, Rng& rng) {
  if (n == 0) throw invalid_parameter("sample_crp: n must be at least 1");
  if (!(t1 > 0.0) || !std::isfinite(t1)) throw invalid_parameter("sample_crp: t1 must be positive and finite");
  Permutation p;
  p.map.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (uniform01(rng) * (t1 + static_cast<double>(i)) < t1) {
      p.map[i] = i;
    } else {
      auto j = static_cast<std::uint32_t>(uniform01(rng) * static_cast<double>(i));
      if (j >= i) j = i - 1;
      p.map[i] = p.map[j];
      p.map[j] = i;
    }
  }
  return p;
}

/// 1 + sum of independent Bernoulli(theta/(theta+k-1)), k = 2..m: the cycle
/// count of the t1-weighted measure without building the permutation.
template <class Rng>
std::uint64_t feller_cycle_count(std::uint64_t m, double theta, Rng& rng) {
  if (m == 0) throw invalid_parameter("feller_cycle_count: m must be at least 1");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw invalid_parameter("feller_cycle_count: theta must be positive and finite");
  std::uint64_t cycles = 1;
  for (std::uint64_t k = 2; k <= m; ++k)
    if (uniform01(rng) * (theta + static_cast<double>(k - 1)) < theta) ++cycles;
  return cycles;
}

/// Exact cycle-count law: probs[k-1] = P(#cycles = k).
struct CyclePmf {
  std::uint64_t n = 0;
  double t1 = 0.0;
  std::vector<double> probs;

  double at(std::uint64_t k) const {
    if (k < 1 || k > probs.size()) throw invalid_parameter("CyclePmf::at: cycle count out of range");
    return probs[k - 1];
  }
};

/// Exact pmf from the unsigned-Stirling recurrence
/// |s(n,k)| = |s(n-1,k-1)| + (n-1)|s(n-1,k)|; n capped at 20 so double
/// precision stays ample for pmf ratios.
inline CyclePmf exact_cycle_pmf(std::uint64_t n, double t1) {
  if (n == 0) throw invalid_parameter("exact_cycle_pmf: n must be at least 1");
  if (!(t1 > 0.0) || !std::isfinite(t1)) throw invalid_parameter("exact_cycle_pmf: t1 must be positive and finite");
  if (n > 20) throw oracle_range("exact_cycle_pmf: n capped at 20");
  std::vector<double> row{1.0};  // |s(0, .)|, k = 0
  for (std::uint64_t i = 1; i <= n; ++i) {
    std::vector<double> next(i + 1, 0.0);
    for (std::uint64_t k = 1; k <= i; ++k) {
      const double carry = (k < row.size()) ? row[k] : 0.0;
      next[k] = row[k - 1] + static_cast<double>(i - 1) * carry;
    }
    row = std::move(next);
  }
  CyclePmf pmf;
  pmf.n = n;
  pmf.t1 = t1;
  pmf.probs.resize(n);
  const double norm = rising_factorial(t1, n);
  double weight = 1.0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    weight *= t1;
    pmf.probs[k - 1] = row[k] * weight / norm;
  }
  return pmf;
}

/// 1 + sum_{k=2}^{floor(n^{t2})} t1/(t1+k-1): the expected cycle count.
inline double expected_cycles(std::uint64_t n, double t1, double t2) {
  if (n < 2) throw invalid_parameter("expected_cycles: n must be at least 2");
  if (!(t1 >= 0.0) || !(t2 >= 0.0)) throw invalid_parameter("expected_cycles: t must be nonnegative");
  const std::uint64_t m = floor_pow(n, t2);
  double sum = 1.0;
  for (std::uint64_t k = 2; k <= m; ++k) sum += t1 / (t1 + static_cast<double>(k - 1));
  return sum;
}

/// Direct (non-coupled) draw of the segregating-site count: a Poisson count
/// with mean (theta/2) L_m over a fresh tree.
template <class Rng>
std::uint64_t sample_segregating_sites(std::uint64_t m, double theta, Rng& rng) {
  if (m == 0) throw invalid_parameter("sample_segregating_sites: m must be at least 1");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw invalid_parameter("sample_segregating_sites: theta must be positive and finite");
  const TreeLengths tl = sample_increments(m, rng);
  return poisson_draw(rng, 0.5 * theta * tl.total());
}

}  // namespace coalpp
