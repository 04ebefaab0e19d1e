// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "coalpp/geometry.hpp"
#include "coalpp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace coalpp;
using Catch::Approx;

TEST_CASE("make_rect validation", "[geometry]") {
  const Rect unit = make_rect(0, 1, 0, 1);
  REQUIRE(unit.area() == 1.0);
  const Rect degenerate = make_rect(0.5, 0.5, 0, 2);
  REQUIRE(degenerate.area() == 0.0);
  REQUIRE(degenerate.degenerate());
  REQUIRE_THROWS_AS(make_rect(1, 0, 0, 1), invalid_rect);
  REQUIRE_THROWS_AS(make_rect(-0.1, 1, 0, 1), invalid_rect);
  REQUIRE_THROWS_AS(make_rect(0, std::numeric_limits<double>::infinity(), 0, 1), invalid_rect);
}

TEST_CASE("corner decomposition reproduces Lebesgue mass", "[geometry]") {
  auto signed_area = [](const Rect& r) {
    double sum = 0.0;
    for (const auto& [corner, sign] : corner_decompose(r)) sum += sign * corner.area();
    return sum;
  };
  // corner rectangle: three terms vanish
  REQUIRE(signed_area(make_rect(0, 0.7, 0, 0.3)) == Approx(0.21).epsilon(1e-14));
  REQUIRE(signed_area(make_rect(1, 2, 1, 3)) == Approx(2.0).epsilon(1e-14));
  REQUIRE(signed_area(make_rect(0.5, 0.5, 0, 2)) == Approx(0.0).margin(1e-14));

  RngStream rng = make_stream(11, 0);
  for (int i = 0; i < 10000; ++i) {
    const double a = uniform01(rng) * 5, b = uniform01(rng) * 5;
    const double c = uniform01(rng) * 5, d = uniform01(rng) * 5;
    const Rect r = make_rect(std::min(a, b), std::max(a, b), std::min(c, d), std::max(c, d));
    const double expect = r.area();
    if (std::fabs(signed_area(r) - expect) > 1e-12 * std::max(1.0, expect))
      FAIL("corner decomposition off for " << to_string(r));
  }
  SUCCEED();
}

TEST_CASE("validate_union half-open semantics", "[geometry]") {
  // shared edge is not an overlap
  REQUIRE_NOTHROW(validate_union({make_rect(0, 1, 0, 1), make_rect(1, 2, 0, 1)}));
  REQUIRE_NOTHROW(validate_union({}));
  try {
    validate_union({make_rect(0, 1, 0, 1), make_rect(0.5, 1.5, 0, 1)});
    FAIL("expected not_disjoint");
  } catch (const not_disjoint& e) {
    REQUIRE(e.first == 0);
    REQUIRE(e.second == 1);
  }
  // degenerate rectangles overlap nothing
  REQUIRE_NOTHROW(validate_union({make_rect(0, 1, 0, 1), make_rect(0.5, 0.5, 0, 3)}));
}

TEST_CASE("validate_union is order-insensitive", "[geometry]") {
  std::vector<Rect> rects{make_rect(0, 1, 0, 1), make_rect(1, 2, 0, 1), make_rect(0, 2, 1, 1.5),
                          make_rect(2.5, 3, 0, 4)};
  RngStream rng = make_stream(12, 0);
  for (int i = 0; i < 100; ++i) {
    for (std::size_t j = rects.size(); j > 1; --j)
      std::swap(rects[j - 1], rects[static_cast<std::size_t>(uniform01(rng) * j)]);
    REQUIRE_NOTHROW(validate_union(rects));
  }
  std::vector<Rect> bad{make_rect(0, 1, 0, 1), make_rect(2, 3, 0, 1), make_rect(0.9, 1.1, 0.5, 0.7)};
  for (int i = 0; i < 100; ++i) {
    for (std::size_t j = bad.size(); j > 1; --j)
      std::swap(bad[j - 1], bad[static_cast<std::size_t>(uniform01(rng) * j)]);
    REQUIRE_THROWS_AS(validate_union(bad), not_disjoint);
  }
}

TEST_CASE("union area", "[geometry]") {
  REQUIRE(area(validate_union({make_rect(0, 1, 0, 1)})) == 1.0);
  REQUIRE(area(validate_union({make_rect(0, 1, 0, 1), make_rect(2, 3, 0, 2)})) == Approx(3.0));
  REQUIRE(area(RectUnion{}) == 0.0);
}

TEST_CASE("rectangle text syntax", "[geometry]") {
  const Rect r = parse_rect("0.25,1.5,0,2");
  REQUIRE(r == make_rect(0.25, 1.5, 0, 2));
  REQUIRE(parse_rect(" 0 , 1 , 0 , 1 ") == make_rect(0, 1, 0, 1));
  const RectUnion u = parse_union("0,1,0,1;1,2,0,1");
  REQUIRE(u.size() == 2);
  REQUIRE(parse_union("").empty());
  REQUIRE_THROWS_AS(parse_rect("1,0,0,1"), invalid_rect);
  REQUIRE_THROWS_AS(parse_rect("0,1,0"), invalid_rect);
  REQUIRE_THROWS_AS(parse_rect("a,1,0,1"), invalid_rect);
  REQUIRE_THROWS_AS(parse_union("0,1,0,1;0.5,1.5,0,1"), not_disjoint);
  // round-trip through the formatter
  REQUIRE(parse_rect(to_string(r)) == r);
}
