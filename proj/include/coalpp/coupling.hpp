// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "coalpp/coalescent.hpp"
#include "coalpp/errors.hpp"
#include "coalpp/geometry.hpp"
#include "coalpp/harmonic.hpp"
#include "coalpp/poisson_field.hpp"
#include "coalpp/rng.hpp"

namespace coalpp {

/// Resource guard on m = floor(n^{t2}).
inline constexpr std::uint64_t kMaxCoalescentSize = 10'000'000;

enum class Process { S, K };

/// One coupled realization: tree lengths up to m = floor(n^{t2_max}) plus a
/// Poisson field on [0, L_m) x [0, t1_max/log n). Both processes are count
/// queries against this one field, so every comparison between them happens
/// on the same randomness. Immutable after construction; queries are pure.
struct CouplingContext {
  std::uint64_t n = 2;
  double t1_max = 0.0;
  double t2_max = 0.0;
  double log_n = 0.0;
  TreeLengths tree;
  PoissonField field;

  std::uint64_t m() const { return tree.size(); }
};

template <class Rng>
CouplingContext build_context(std::uint64_t n, double t1_max, double t2_max, Rng& rng) {
  if (n < 2) throw invalid_parameter("build_context: n must be at least 2");
  if (!(t1_max > 0.0) || !std::isfinite(t1_max) || !(t2_max > 0.0) || !std::isfinite(t2_max))
    throw invalid_parameter("build_context: evaluation bounds must be positive and finite");
  const std::uint64_t m = floor_pow(n, t2_max);
  if (m > kMaxCoalescentSize) throw scale_limit("build_context: floor(n^t2_max) exceeds 1e7");

  CouplingContext ctx;
  ctx.n = n;
  ctx.t1_max = t1_max;
  ctx.t2_max = t2_max;
  ctx.log_n = std::log(static_cast<double>(n));
  ctx.tree = sample_increments(m, rng);
  const double height = t1_max / ctx.log_n;
  const double width = ctx.tree.total();
  if (width > 0.0)
    ctx.field = sample_field(width, height, rng);
  else
    ctx.field = PoissonField(0.0, height, {});  // m = 1: zero-width window
  return ctx;
}

/// Assembles a context from parts; lets tests fix the tree while resampling
/// the field.
inline CouplingContext make_context(std::uint64_t n, double t1_max, double t2_max,
                                    TreeLengths tree, PoissonField field) {
  if (n < 2) throw invalid_parameter("make_context: n must be at least 2");
  if (!(t1_max > 0.0) || !(t2_max > 0.0)) throw invalid_parameter("make_context: bounds must be positive");
  if (tree.size() != floor_pow(n, t2_max)) throw invalid_parameter("make_context: tree size does not match floor(n^t2_max)");
  if (field.window_x() != tree.total()) throw invalid_parameter("make_context: field window does not match the tree length");
  CouplingContext ctx;
  ctx.n = n;
  ctx.t1_max = t1_max;
  ctx.t2_max = t2_max;
  ctx.log_n = std::log(static_cast<double>(n));
  ctx.tree = std::move(tree);
  ctx.field = std::move(field);
  return ctx;
}

namespace detail {

inline void check_corner(const CouplingContext& ctx, double t1, double t2) {
  if (!(t1 >= 0.0) || !(t2 >= 0.0) || t1 > ctx.t1_max || t2 > ctx.t2_max)
    throw out_of_window("corner query outside the evaluation bounds");
}

/// Strip holding x: the index p with L_p <= x < L_{p+1} (so the strip id is
/// p+1 in 1-based terms). Half-open boundaries match the rectangle semantics.
inline std::uint64_t strip_of(const TreeLengths& tree, double x) {
  const auto it = std::upper_bound(tree.lengths.begin(), tree.lengths.end(), x);
  return static_cast<std::uint64_t>(it - tree.lengths.begin());
}

inline std::uint64_t distinct_count(std::vector<std::uint64_t>& v) {
  std::sort(v.begin(), v.end());
  return static_cast<std::uint64_t>(std::unique(v.begin(), v.end()) - v.begin());
}

}  // namespace detail

/// Count of field points in [0, L_{floor(n^{t2})}) x [0, t1/log n).
inline std::uint64_t pi_s_corner(const CouplingContext& ctx, double t1, double t2) {
  detail::check_corner(ctx, t1, t2);
  const std::uint64_t mq = floor_pow(ctx.n, t2);
  if (mq <= 1 || t1 <= 0.0) return 0;
  const double x_hi = ctx.tree.at(mq);
  const double y_hi = t1 / ctx.log_n;
  if (x_hi <= 0.0) return 0;
  return count_in(ctx.field, Rect{0.0, x_hi, 0.0, y_hi});
}

/// Number of strips [L_{k-1}, L_k), k = 2..floor(n^{t2}), holding at least
/// one field point below t1/log n.
inline std::uint64_t pi_k_corner(const CouplingContext& ctx, double t1, double t2) {
  detail::check_corner(ctx, t1, t2);
  const std::uint64_t mq = floor_pow(ctx.n, t2);
  if (mq <= 1 || t1 <= 0.0) return 0;
  const double x_hi = ctx.tree.at(mq);
  const double y_hi = t1 / ctx.log_n;
  std::vector<std::uint64_t> strips;
  for (const FieldPoint& p : ctx.field.points())
    if (p.y < y_hi && p.x < x_hi) strips.push_back(detail::strip_of(ctx.tree, p.x));
  return detail::distinct_count(strips);
}

inline std::uint64_t pi_corner(const CouplingContext& ctx, Process which, double t1, double t2) {
  return which == Process::S ? pi_s_corner(ctx, t1, t2) : pi_k_corner(ctx, t1, t2);
}

namespace detail {

inline void check_rect(const CouplingContext& ctx, const Rect& r) {
  if (r.u1 > ctx.t1_max || r.u2 > ctx.t2_max)
    throw out_of_window("rectangle outside the evaluation bounds");
}

}  // namespace detail

/// Direct-count evaluation of the S process on a rectangle: the number of
/// field points in the image region. Equals pi_rect(S) on every realization.
inline std::uint64_t pi_s_rect_direct(const CouplingContext& ctx, const Rect& r) {
  detail::check_rect(ctx, r);
  const std::uint64_t m_lo = floor_pow(ctx.n, r.s2);
  const std::uint64_t m_hi = floor_pow(ctx.n, r.u2);
  if (m_hi <= m_lo || r.width() <= 0.0) return 0;
  const double x_lo = ctx.tree.at(m_lo);
  const double x_hi = ctx.tree.at(m_hi);
  return count_in(ctx.field, Rect{x_lo, x_hi, r.s1 / ctx.log_n, r.u1 / ctx.log_n});
}

/// Direct strip-telescoped evaluation of the K process on a rectangle: over
/// strips k in (floor(n^{s2}), floor(n^{u2})], the number whose lowest point
/// sits in the band [s1/log n, u1/log n). Equals pi_rect(K) on every
/// realization.
inline std::uint64_t pi_k_rect_direct(const CouplingContext& ctx, const Rect& r) {
  detail::check_rect(ctx, r);
  const std::uint64_t m_lo = floor_pow(ctx.n, r.s2);
  const std::uint64_t m_hi = floor_pow(ctx.n, r.u2);
  if (m_hi <= m_lo || r.width() <= 0.0) return 0;
  const double x_lo = ctx.tree.at(m_lo);
  const double x_hi = ctx.tree.at(m_hi);
  const double y_hi = r.u1 / ctx.log_n;
  const double y_lo = r.s1 / ctx.log_n;
  std::vector<std::uint64_t> below_hi;
  std::vector<std::uint64_t> below_lo;
  for (const FieldPoint& p : ctx.field.points()) {
    if (p.x < x_lo || p.x >= x_hi) continue;
    if (p.y < y_hi) below_hi.push_back(detail::strip_of(ctx.tree, p.x));
    if (p.y < y_lo) below_lo.push_back(detail::strip_of(ctx.tree, p.x));
  }
  return detail::distinct_count(below_hi) - detail::distinct_count(below_lo);
}

/// Inclusion-exclusion evaluation over the four corner rectangles. The corner
/// functions are coordinatewise monotone on a fixed realization, so the
/// signed sum is a nonnegative integer for both processes.
inline std::uint64_t pi_rect(const CouplingContext& ctx, Process which, const Rect& r) {
  detail::check_rect(ctx, r);
  const auto value = static_cast<std::int64_t>(pi_corner(ctx, which, r.u1, r.u2)) +
                     static_cast<std::int64_t>(pi_corner(ctx, which, r.s1, r.s2)) -
                     static_cast<std::int64_t>(pi_corner(ctx, which, r.u1, r.s2)) -
                     static_cast<std::int64_t>(pi_corner(ctx, which, r.s1, r.u2));
  assert(value >= 0);
  assert(value == static_cast<std::int64_t>(which == Process::S ? pi_s_rect_direct(ctx, r)
                                                                : pi_k_rect_direct(ctx, r)));
  return static_cast<std::uint64_t>(value);
}

/// Finite additivity over the members of a validated disjoint union.
inline std::uint64_t pi_union(const CouplingContext& ctx, Process which, const RectUnion& u) {
  std::uint64_t sum = 0;
  for (const Rect& r : u) sum += pi_rect(ctx, which, r);
  return sum;
}

/// pi_s_corner - pi_k_corner; nonnegative since each strip contributes at
/// most its point count.
inline std::uint64_t delta_corner(const CouplingContext& ctx, double t1, double t2) {
  const std::uint64_t s = pi_s_corner(ctx, t1, t2);
  const std::uint64_t k = pi_k_corner(ctx, t1, t2);
  assert(k <= s);
  return s - k;
}

/// One coupled draw of (segregating sites, cycle count) at fixed scale m and
/// rate theta: per strip, a Poisson count over the exponential strip width
/// feeds both the site total and the new-cycle indicator.
struct CoupledCounts {
  std::uint64_t sites = 0;
  std::uint64_t cycles = 1;
};

template <class Rng>
CoupledCounts sample_coupled_counts(std::uint64_t m, double theta, Rng& rng) {
  if (m == 0) throw invalid_parameter("sample_coupled_counts: m must be at least 1");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw invalid_parameter("sample_coupled_counts: theta must be positive and finite");
  CoupledCounts out;
  for (std::uint64_t k = 2; k <= m; ++k) {
    const double width = exponential_draw(rng, 0.5 * static_cast<double>(k - 1));
    const std::uint64_t c = poisson_draw(rng, 0.5 * theta * width);
    out.sites += c;
    out.cycles += (c > 0);
  }
  return out;
}

}  // namespace coalpp
