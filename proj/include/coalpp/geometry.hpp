// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coalpp/errors.hpp"

namespace coalpp {

/// Half-open axis-aligned rectangle [s1,u1) x [s2,u2) in the closed positive
/// quadrant. Degenerate (zero-area) rectangles are allowed and carry no mass.
struct Rect {
  double s1 = 0.0;
  double u1 = 0.0;
  double s2 = 0.0;
  double u2 = 0.0;

  double width() const { return u1 - s1; }
  double height() const { return u2 - s2; }
  double area() const { return width() * height(); }
  bool degenerate() const { return s1 >= u1 || s2 >= u2; }
  bool contains(double x, double y) const { return x >= s1 && x < u1 && y >= s2 && y < u2; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

inline Rect make_rect(double s1, double u1, double s2, double u2) {
  const bool finite = std::isfinite(s1) && std::isfinite(u1) && std::isfinite(s2) && std::isfinite(u2);
  if (!finite || s1 < 0.0 || s2 < 0.0 || u1 < s1 || u2 < s2)
    throw invalid_rect("rectangle must satisfy 0 <= s1 <= u1 and 0 <= s2 <= u2 with finite coordinates");
  return Rect{s1, u1, s2, u2};
}

/// True when the two half-open rectangles share mass. Touching edges do not
/// count, and degenerate rectangles never overlap anything.
inline bool overlaps(const Rect& a, const Rect& b) {
  if (a.degenerate() || b.degenerate()) return false;
  return a.s1 < b.u1 && b.s1 < a.u1 && a.s2 < b.u2 && b.s2 < a.u2;
}

/// Signed corner split of [s,u): for any finite measure with a corner
/// evaluator, measure([s,u)) equals the signed sum over these four
/// origin-anchored rectangles.
inline std::array<std::pair<Rect, int>, 4> corner_decompose(const Rect& r) {
  return {{{Rect{0.0, r.u1, 0.0, r.u2}, +1},
           {Rect{0.0, r.s1, 0.0, r.s2}, +1},
           {Rect{0.0, r.u1, 0.0, r.s2}, -1},
           {Rect{0.0, r.s1, 0.0, r.u2}, -1}}};
}

/// Finite disjoint union of rectangles (an element of the rectangle ring).
/// Construction goes through validate_union, so disjointness always holds.
class RectUnion {
 public:
  RectUnion() = default;

  const std::vector<Rect>& rects() const { return rects_; }
  std::size_t size() const { return rects_.size(); }
  bool empty() const { return rects_.empty(); }
  auto begin() const { return rects_.begin(); }
  auto end() const { return rects_.end(); }

  friend RectUnion validate_union(std::vector<Rect> rects);

 private:
  explicit RectUnion(std::vector<Rect> rects) : rects_(std::move(rects)) {}
  std::vector<Rect> rects_;
};

/// Accepts iff the rectangles are pairwise disjoint under half-open
/// semantics; keeps the input order. O(m^2) pairwise test.
inline RectUnion validate_union(std::vector<Rect> rects) {
  for (std::size_t i = 0; i < rects.size(); ++i)
    for (std::size_t j = i + 1; j < rects.size(); ++j)
      if (overlaps(rects[i], rects[j])) throw not_disjoint(i, j);
  return RectUnion(std::move(rects));
}

inline double area(const RectUnion& u) {
  double sum = 0.0;
  for (const Rect& r : u) sum += r.area();
  return sum;
}

// --- textual syntax: "s1,u1,s2,u2", rectangles joined by ';' ---

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline double parse_coordinate(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw invalid_rect("cannot parse coordinate '" + std::string(text) + "'");
  return value;
}

}  // namespace detail

inline Rect parse_rect(std::string_view text) {
  std::array<double, 4> coord{};
  std::size_t field = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',') {
      if (field >= 4) throw invalid_rect("rectangle needs exactly four coordinates: '" + std::string(text) + "'");
      coord[field++] = detail::parse_coordinate(text.substr(start, i - start));
      start = i + 1;
    }
  }
  if (field != 4) throw invalid_rect("rectangle needs exactly four coordinates: '" + std::string(text) + "'");
  return make_rect(coord[0], coord[1], coord[2], coord[3]);
}

/// Parses ';'-joined rectangles; the empty string is the empty union.
inline RectUnion parse_union(std::string_view text) {
  std::vector<Rect> rects;
  if (!detail::trim(text).empty()) {
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
      if (i == text.size() || text[i] == ';') {
        rects.push_back(parse_rect(text.substr(start, i - start)));
        start = i + 1;
      }
    }
  }
  return validate_union(std::move(rects));
}

inline std::string to_string(const Rect& r) {
  auto fmt = [](double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  };
  return fmt(r.s1) + "," + fmt(r.u1) + "," + fmt(r.s2) + "," + fmt(r.u2);
}

}  // namespace coalpp
