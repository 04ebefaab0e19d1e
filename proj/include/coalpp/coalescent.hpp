// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "coalpp/errors.hpp"
#include "coalpp/harmonic.hpp"
#include "coalpp/rng.hpp"

namespace coalpp {

/// Cumulative Kingman tree lengths L_1..L_m with L_1 = 0. The increment
/// L_k - L_{k-1} is exponential with rate (k-1)/2: the total branch length
/// gained while the sample grows from k-1 to k leaves.
struct TreeLengths {
  std::vector<double> lengths;  // lengths[k-1] = L_k

  std::uint64_t size() const { return lengths.size(); }
  double total() const { return lengths.empty() ? 0.0 : lengths.back(); }

  /// L_k, 1-based.
  double at(std::uint64_t k) const {
    if (k == 0 || k > lengths.size()) throw invalid_parameter("TreeLengths::at: index out of range");
    return lengths[k - 1];
  }
};

/// Samples the m-1 increments and returns prefix sums; m = 1 gives the single
/// entry L_1 = 0.
template <class Rng>
TreeLengths sample_increments(std::uint64_t m, Rng& rng) {
  if (m == 0) throw invalid_parameter("sample_increments: m must be at least 1");
  TreeLengths tl;
  tl.lengths.resize(m);
  tl.lengths[0] = 0.0;
  double acc = 0.0;
  for (std::uint64_t k = 2; k <= m; ++k) {
    acc += exponential_draw(rng, 0.5 * static_cast<double>(k - 1));
    tl.lengths[k - 1] = acc;
  }
  return tl;
}

/// E L_m = 2 H_{m-1}.
inline double expected_tree_length(std::uint64_t m) {
  if (m == 0) throw invalid_parameter("expected_tree_length: m must be at least 1");
  return 2.0 * harmonic(m - 1, 1);
}

/// L_m/2 - log m; approximately standard Gumbel for large m.
inline double gumbel_residual(const TreeLengths& tl) {
  if (tl.size() < 2) throw invalid_parameter("gumbel_residual: need m >= 2");
  return 0.5 * tl.total() - std::log(static_cast<double>(tl.size()));
}

/// E L_{floor(n^{t2})} / (2 log n); tends to t2 as n grows.
inline double expected_normalized_length(std::uint64_t n, double t2) {
  if (n < 2) throw invalid_parameter("expected_normalized_length: n must be at least 2");
  if (!(t2 >= 0.0)) throw invalid_parameter("expected_normalized_length: t2 must be nonnegative");
  return expected_tree_length(floor_pow(n, t2)) / (2.0 * std::log(static_cast<double>(n)));
}

}  // namespace coalpp
