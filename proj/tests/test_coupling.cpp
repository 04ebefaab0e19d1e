// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "coalpp/coupling.hpp"
#include "coalpp/gof.hpp"
#include "coalpp/moments.hpp"

#include <cmath>
#include <map>
#include <vector>

using namespace coalpp;
using Catch::Approx;

TEST_CASE("build_context validation and degenerate scale", "[coupling]") {
  RngStream rng = make_stream(51, 0);
  // floor(100^0.01) = 1: empty context, zero-width window
  const CouplingContext empty = build_context(100, 1.0, 0.01, rng);
  REQUIRE(empty.m() == 1);
  REQUIRE(empty.field.size() == 0);
  REQUIRE(pi_s_corner(empty, 1.0, 0.01) == 0);
  REQUIRE(pi_k_corner(empty, 1.0, 0.01) == 0);
  REQUIRE(delta_corner(empty, 1.0, 0.01) == 0);

  REQUIRE_THROWS_AS(build_context(1, 1.0, 1.0, rng), invalid_parameter);
  REQUIRE_THROWS_AS(build_context(100, 0.0, 1.0, rng), invalid_parameter);
  REQUIRE_THROWS_AS(build_context(100000, 2.0, 1.5, rng), scale_limit);
}

TEST_CASE("window width matches the expected tree length", "[coupling]") {
  const int reps = 3000;
  std::vector<double> widths(reps);
  for (int r = 0; r < reps; ++r) {
    RngStream rng = make_stream(52, static_cast<std::uint64_t>(r));
    widths[r] = build_context(100, 1.0, 1.0, rng).field.window_x();
  }
  const MeanSe ms = mean_and_se(widths);
  REQUIRE(std::fabs(ms.mean - 10.35475503527924) <= 3.5 * ms.se);
}

TEST_CASE("corner evaluations at the axes vanish", "[coupling]") {
  RngStream rng = make_stream(53, 0);
  const CouplingContext ctx = build_context(100, 2.0, 1.0, rng);
  REQUIRE(pi_s_corner(ctx, 0.0, 1.0) == 0);
  REQUIRE(pi_s_corner(ctx, 1.0, 0.0) == 0);
  REQUIRE(pi_k_corner(ctx, 0.0, 1.0) == 0);
  REQUIRE(pi_k_corner(ctx, 1.0, 0.0) == 0);
  REQUIRE_THROWS_AS(pi_s_corner(ctx, 2.5, 1.0), out_of_window);
  REQUIRE_THROWS_AS(pi_k_corner(ctx, 1.0, 1.5), out_of_window);
}

TEST_CASE("K never exceeds S and both are coordinatewise monotone", "[coupling]") {
  RngStream rng = make_stream(54, 0);
  for (int c = 0; c < 20; ++c) {
    const CouplingContext ctx = build_context(200, 2.0, 1.0, rng);
    for (int i = 0; i < 50; ++i) {
      const double t1 = uniform01(rng) * 2.0, t2 = uniform01(rng);
      const double u1 = t1 + uniform01(rng) * (2.0 - t1);
      const double u2 = t2 + uniform01(rng) * (1.0 - t2);
      if (pi_k_corner(ctx, t1, t2) > pi_s_corner(ctx, t1, t2)) FAIL("K exceeded S");
      if (pi_s_corner(ctx, t1, t2) > pi_s_corner(ctx, u1, u2)) FAIL("S not monotone");
      if (pi_k_corner(ctx, t1, t2) > pi_k_corner(ctx, u1, u2)) FAIL("K not monotone");
    }
  }
  SUCCEED();
}

TEST_CASE("inclusion-exclusion equals the direct oracle", "[coupling]") {
  RngStream rng = make_stream(55, 0);
  for (int c = 0; c < 20; ++c) {
    const CouplingContext ctx = build_context(100, 2.0, 1.0, rng);
    for (int i = 0; i < 50; ++i) {
      const double a = uniform01(rng) * 2.0, b = uniform01(rng) * 2.0;
      const double cc = uniform01(rng), d = uniform01(rng);
      const Rect r = make_rect(std::min(a, b), std::max(a, b), std::min(cc, d), std::max(cc, d));
      if (pi_rect(ctx, Process::S, r) != pi_s_rect_direct(ctx, r)) FAIL("S mismatch on " << to_string(r));
      if (pi_rect(ctx, Process::K, r) != pi_k_rect_direct(ctx, r)) FAIL("K mismatch on " << to_string(r));
    }
  }
  // the fixed seeded example rectangle
  RngStream fixed = make_stream(0x5EED, 7);
  const CouplingContext ctx = build_context(100, 1.0, 1.0, fixed);
  const Rect r = make_rect(0.2, 0.8, 0.3, 0.9);
  REQUIRE(pi_rect(ctx, Process::S, r) == pi_s_rect_direct(ctx, r));
  REQUIRE(pi_rect(ctx, Process::K, r) == pi_k_rect_direct(ctx, r));
}

TEST_CASE("corner rectangles reduce to the corner evaluators", "[coupling]") {
  RngStream rng = make_stream(56, 0);
  const CouplingContext ctx = build_context(300, 2.0, 1.0, rng);
  const Rect corner = make_rect(0, 1.3, 0, 0.8);
  REQUIRE(pi_rect(ctx, Process::S, corner) == pi_s_corner(ctx, 1.3, 0.8));
  REQUIRE(pi_rect(ctx, Process::K, corner) == pi_k_corner(ctx, 1.3, 0.8));
  REQUIRE(pi_rect(ctx, Process::S, make_rect(0.5, 0.5, 0, 1)) == 0);
}

TEST_CASE("pi_union additivity", "[coupling]") {
  RngStream rng = make_stream(57, 0);
  const CouplingContext ctx = build_context(500, 2.0, 1.0, rng);
  REQUIRE(pi_union(ctx, Process::S, RectUnion{}) == 0);

  const Rect whole = make_rect(0.2, 1.8, 0.1, 0.9);
  const RectUnion split = validate_union({make_rect(0.2, 1.0, 0.1, 0.9), make_rect(1.0, 1.8, 0.1, 0.9)});
  REQUIRE(pi_union(ctx, Process::S, split) == pi_rect(ctx, Process::S, whole));
  REQUIRE(pi_union(ctx, Process::K, split) == pi_rect(ctx, Process::K, whole));

  const RectUnion quads = validate_union({make_rect(0, 0.5, 0, 0.5), make_rect(0.5, 1, 0, 0.5),
                                          make_rect(0, 0.5, 0.5, 1), make_rect(0.5, 1, 0.5, 1)});
  REQUIRE(pi_union(ctx, Process::S, quads) == pi_s_corner(ctx, 1.0, 1.0));
  // never more mass than realized points
  REQUIRE(pi_union(ctx, Process::S, validate_union({make_rect(0, 2, 0, 1)})) <= ctx.field.size());
}

TEST_CASE("delta counts multiplicity beyond the first point per strip", "[coupling]") {
  RngStream rng = make_stream(58, 0);
  for (int c = 0; c < 50; ++c) {
    const CouplingContext ctx = build_context(100, 2.0, 1.0, rng);
    const std::uint64_t s = pi_s_corner(ctx, 1.5, 1.0);
    const std::uint64_t k = pi_k_corner(ctx, 1.5, 1.0);
    REQUIRE(delta_corner(ctx, 1.5, 1.0) == s - k);
    // recompute per-strip occupancy directly
    std::map<std::uint64_t, int> occupancy;
    const double y_hi = 1.5 / ctx.log_n;
    for (const FieldPoint& p : ctx.field.points())
      if (p.y < y_hi) occupancy[detail::strip_of(ctx.tree, p.x)]++;
    bool all_single = true;
    for (const auto& [strip, cnt] : occupancy)
      if (cnt > 1) all_single = false;
    if (all_single) REQUIRE(delta_corner(ctx, 1.5, 1.0) == 0);
  }
}

TEST_CASE("strip counts are independent given the tree", "[coupling]") {
  // one fixed tree, many fields resampled on the same window
  RngStream tree_rng = make_stream(59, 0);
  const std::uint64_t n = 100;
  TreeLengths tree = sample_increments(floor_pow(n, 1.0), tree_rng);
  const double height = 2.0 / std::log(static_cast<double>(n));
  const int reps = 4000;
  std::vector<double> strip2(reps), strip5(reps), strip50(reps);
  for (int r = 0; r < reps; ++r) {
    RngStream rng = make_stream(60, static_cast<std::uint64_t>(r));
    TreeLengths copy = tree;
    PoissonField field = sample_field(tree.total(), height, rng);
    const CouplingContext ctx = make_context(n, 2.0, 1.0, std::move(copy), std::move(field));
    strip2[r] = static_cast<double>(count_in(ctx.field, make_rect(ctx.tree.at(1), ctx.tree.at(2), 0, height)));
    strip5[r] = static_cast<double>(count_in(ctx.field, make_rect(ctx.tree.at(4), ctx.tree.at(5), 0, height)));
    strip50[r] = static_cast<double>(count_in(ctx.field, make_rect(ctx.tree.at(49), ctx.tree.at(50), 0, height)));
  }
  REQUIRE(std::fabs(pearson_correlation(strip2, strip5)) < 0.06);
  REQUIRE(std::fabs(pearson_correlation(strip2, strip50)) < 0.06);
  REQUIRE(std::fabs(pearson_correlation(strip5, strip50)) < 0.06);
}

TEST_CASE("make_context validates its parts", "[coupling]") {
  RngStream rng = make_stream(61, 0);
  TreeLengths tree = sample_increments(100, rng);
  const double total = tree.total();
  REQUIRE_THROWS_AS(make_context(100, 1.0, 1.0, TreeLengths{{0.0}}, PoissonField(0.0, 1.0, {})),
                    invalid_parameter);  // tree size mismatch
  TreeLengths tree2 = tree;
  REQUIRE_THROWS_AS(make_context(100, 1.0, 1.0, std::move(tree2), PoissonField(total + 1.0, 1.0, {})),
                    invalid_parameter);  // window mismatch
}

TEST_CASE("corner means match the closed forms at n = 1e4", "[coupling]") {
  const std::uint64_t n = 10000;
  const int reps = 10000;
  std::vector<double> s_counts(reps), k_counts(reps);
  for (int r = 0; r < reps; ++r) {
    RngStream rng = make_stream(62, static_cast<std::uint64_t>(r));
    const CouplingContext ctx = build_context(n, 1.0, 1.0, rng);
    s_counts[r] = static_cast<double>(pi_s_corner(ctx, 1.0, 1.0));
    k_counts[r] = static_cast<double>(pi_k_corner(ctx, 1.0, 1.0));
  }
  // independent oracle sums
  const double log_n = std::log(static_cast<double>(n));
  double h = 0.0;
  for (std::uint64_t k = 1; k <= n - 1; ++k) h += 1.0 / static_cast<double>(k);
  double ek = 0.0;
  for (std::uint64_t k = 2; k <= n; ++k) ek += (1.0 / log_n) / (1.0 / log_n + static_cast<double>(k - 1));
  const MeanSe s_ms = mean_and_se(s_counts);
  const MeanSe k_ms = mean_and_se(k_counts);
  REQUIRE(std::fabs(s_ms.mean - h / log_n) <= 3.0 * s_ms.se);
  REQUIRE(std::fabs(k_ms.mean - ek) <= 3.0 * k_ms.se);
}

TEST_CASE("coupled fixed-scale draws match the closed forms", "[coupling]") {
  RngStream rng = make_stream(63, 0);
  const CoupledCounts trivial = sample_coupled_counts(1, 1.0, rng);
  REQUIRE(trivial.sites == 0);
  REQUIRE(trivial.cycles == 1);

  const int reps = 20000;
  std::vector<double> sites(reps), cycles(reps);
  for (int r = 0; r < reps; ++r) {
    const CoupledCounts c = sample_coupled_counts(100, 1.0, rng);
    sites[r] = static_cast<double>(c.sites);
    cycles[r] = static_cast<double>(c.cycles);
  }
  const MeanSe s_ms = mean_and_se(sites);
  const MeanSe k_ms = mean_and_se(cycles);
  REQUIRE(std::fabs(s_ms.mean - mean_s(100, 1.0, 1.0)) <= 3.5 * s_ms.se);
  REQUIRE(std::fabs(k_ms.mean - mean_k(100, 1.0, 1.0)) <= 3.5 * k_ms.se);
}
