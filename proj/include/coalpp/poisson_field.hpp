// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "coalpp/errors.hpp"
#include "coalpp/geometry.hpp"
#include "coalpp/rng.hpp"

namespace coalpp {

struct FieldPoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const FieldPoint&, const FieldPoint&) = default;
};

/// Realized rate-1/2 Poisson point set on the half-open window
/// [0, window_x) x [0, window_y). Immutable once built; count queries are safe
/// to run concurrently. Fields with many points carry a sorted-by-x index so
/// rectangle counts bisect instead of scanning.
class PoissonField {
 public:
  PoissonField() = default;

  PoissonField(double window_x, double window_y, std::vector<FieldPoint> points)
      : wx_(window_x), wy_(window_y), points_(std::move(points)) {
    if (!(wx_ >= 0.0) || !(wy_ >= 0.0) || !std::isfinite(wx_) || !std::isfinite(wy_))
      throw invalid_parameter("PoissonField: window must be finite and nonnegative");
    for (const FieldPoint& p : points_)
      if (!(p.x >= 0.0 && p.x < wx_ && p.y >= 0.0 && p.y < wy_))
        throw invalid_parameter("PoissonField: point outside the window");
    check_simple();
    if (points_.size() >= kIndexThreshold) {
      by_x_ = points_;
      std::sort(by_x_.begin(), by_x_.end(), [](const FieldPoint& a, const FieldPoint& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
      });
    }
  }

  double window_x() const { return wx_; }
  double window_y() const { return wy_; }
  const std::vector<FieldPoint>& points() const { return points_; }
  std::uint64_t size() const { return points_.size(); }

  /// Number of realized points inside r; r must stay within the window.
  std::uint64_t count(const Rect& r) const {
    if (r.u1 > wx_ || r.u2 > wy_) throw out_of_window("count_in: rectangle exceeds the field window");
    std::uint64_t n = 0;
    if (!by_x_.empty()) {
      auto it = std::lower_bound(by_x_.begin(), by_x_.end(), r.s1,
                                 [](const FieldPoint& p, double x) { return p.x < x; });
      for (; it != by_x_.end() && it->x < r.u1; ++it)
        if (it->y >= r.s2 && it->y < r.u2) ++n;
      return n;
    }
    for (const FieldPoint& p : points_)
      if (r.contains(p.x, p.y)) ++n;
    return n;
  }

 private:
  // The process is simple: a duplicate point means the stream went wrong.
  void check_simple() const {
    if (points_.size() < 2) return;
    std::vector<FieldPoint> sorted = points_;
    std::sort(sorted.begin(), sorted.end(), [](const FieldPoint& a, const FieldPoint& b) {
      return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    for (std::size_t i = 1; i < sorted.size(); ++i)
      if (sorted[i] == sorted[i - 1]) throw error("PoissonField: duplicate point in realization");
  }

  static constexpr std::size_t kIndexThreshold = 10'000;

  double wx_ = 0.0;
  double wy_ = 0.0;
  std::vector<FieldPoint> points_;
  std::vector<FieldPoint> by_x_;
};

/// Draws N ~ Poisson(window area / 2), then N i.i.d. uniform points.
template <class Rng>
PoissonField sample_field(double window_x, double window_y, Rng& rng) {
  if (!(window_x > 0.0) || !(window_y > 0.0) || !std::isfinite(window_x) || !std::isfinite(window_y))
    throw invalid_parameter("sample_field: window dimensions must be positive and finite");
  const std::uint64_t n = poisson_draw(rng, 0.5 * window_x * window_y);
  std::vector<FieldPoint> pts(n);
  for (FieldPoint& p : pts) {
    p.x = uniform01(rng) * window_x;
    p.y = uniform01(rng) * window_y;
    // scaling may round onto the open boundary
    if (p.x >= window_x) p.x = std::nextafter(window_x, 0.0);
    if (p.y >= window_y) p.y = std::nextafter(window_y, 0.0);
  }
  return PoissonField(window_x, window_y, std::move(pts));
}

inline std::uint64_t count_in(const PoissonField& field, const Rect& r) { return field.count(r); }

}  // namespace coalpp
