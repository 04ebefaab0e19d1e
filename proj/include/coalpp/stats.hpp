// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "coalpp/coupling.hpp"
#include "coalpp/errors.hpp"
#include "coalpp/ewens.hpp"
#include "coalpp/geometry.hpp"
#include "coalpp/gof.hpp"
#include "coalpp/moments.hpp"
#include "coalpp/rng.hpp"

namespace coalpp {

/// Monte Carlo run configuration. Replicate r always uses the stream derived
/// from (seed, r), so results are identical for every thread count.
struct MCConfig {
  std::uint64_t n = 100'000;
  std::uint64_t replicates = 20'000;
  std::uint64_t seed = kDefaultSeed;
  double t1_max = 2.0;
  double t2_max = 1.0;
};

inline void validate_config(const MCConfig& cfg) {
  if (cfg.n < 2) throw invalid_parameter("config: n must be at least 2");
  if (cfg.replicates < 100) throw invalid_parameter("config: at least 100 replicates required for interval reports");
  if (!(cfg.t1_max > 0.0) || !(cfg.t2_max > 0.0)) throw invalid_parameter("config: evaluation bounds must be positive");
  if (floor_pow(cfg.n, cfg.t2_max) > kMaxCoalescentSize) throw scale_limit("config: floor(n^t2_max) exceeds 1e7");
}

/// One verification check: estimate vs reference with the tolerance that was
/// actually enforced, plus enough provenance to re-run it.
struct TestReport {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::uint64_t replicates = 0;
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
};

inline TestReport make_report(std::string name, double estimate, double std_error, double reference,
                              double tolerance, std::uint64_t replicates, std::uint64_t seed, std::uint64_t n) {
  TestReport r;
  r.name = std::move(name);
  r.estimate = estimate;
  r.std_error = std_error;
  r.reference = reference;
  r.tolerance = tolerance;
  r.passed = std::fabs(estimate - reference) <= tolerance;
  r.replicates = replicates;
  r.seed = seed;
  r.n = n;
  return r;
}

namespace stream_purpose {
inline constexpr std::uint64_t kContextSweep = 1;
inline constexpr std::uint64_t kOracleSweep = 2;
inline constexpr std::uint64_t kGumbel = 3;
inline constexpr std::uint64_t kEwensCrp = 4;
inline constexpr std::uint64_t kEwensFeller = 5;
inline constexpr std::uint64_t kStructure = 6;
inline constexpr std::uint64_t kHarmonic = 7;
}  // namespace stream_purpose

/// Runs fn(replicate, rng) for every replicate index. Workers pull indices
/// from a shared counter and write into preallocated slots, so the returned
/// rows are in replicate order and bit-identical for any thread count.
template <class Fn>
auto parallel_replicates(std::uint64_t seed, std::uint64_t replicates, unsigned threads, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::uint64_t, RngStream&>> {
  using Row = std::invoke_result_t<Fn&, std::uint64_t, RngStream&>;
  std::vector<Row> rows(replicates);
  if (threads <= 1) {
    for (std::uint64_t r = 0; r < replicates; ++r) {
      RngStream rng = make_stream(seed, r);
      rows[r] = fn(r, rng);
    }
    return rows;
  }
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::uint64_t r = next.fetch_add(1, std::memory_order_relaxed);
      if (r >= replicates) return;
      try {
        RngStream rng = make_stream(seed, r);
        rows[r] = fn(r, rng);
      } catch (...) {
        const std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return rows;
}

// --- fixed evaluation regions of the verify battery ---

inline constexpr double kBatteryT1Max = 2.0;
inline constexpr double kBatteryT2Max = 1.0;
inline constexpr Rect kUnitSquare{0.0, 1.0, 0.0, 1.0};
inline constexpr Rect kBandRect{1.0, 2.0, 0.0, 1.0};
// L-shaped, three rectangles, area 1.5
inline constexpr std::array<Rect, 3> kLShapeRects{Rect{0.0, 1.0, 0.0, 1.0}, Rect{1.0, 1.5, 0.5, 1.0},
                                                  Rect{1.5, 2.0, 0.5, 1.0}};
inline constexpr std::array<Rect, 4> kQuadrantRects{Rect{0.0, 0.5, 0.0, 0.5}, Rect{0.5, 1.0, 0.0, 0.5},
                                                    Rect{0.0, 0.5, 0.5, 1.0}, Rect{0.5, 1.0, 0.5, 1.0}};

namespace detail {

struct BatteryRow {
  std::uint32_t s_corner = 0;
  std::uint32_t k_corner = 0;
  std::uint32_t s_band = 0;
  std::uint32_t k_band = 0;
  std::uint32_t s_lshape = 0;
  std::uint8_t quad_equal = 1;
};

template <class Rows, class Get>
std::vector<double> column(const Rows& rows, Get&& get) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(static_cast<double>(get(row)));
  return out;
}

template <class Rows, class Pred>
std::pair<double, double> fraction_and_se(const Rows& rows, Pred&& pred) {
  double hits = 0.0;
  for (const auto& row : rows) hits += pred(row) ? 1.0 : 0.0;
  const double p = hits / static_cast<double>(rows.size());
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(rows.size()));
  return {p, se};
}

/// Sample variance plus the asymptotic standard error of the variance,
/// sqrt((m4 - var^2)/R).
struct VarSe {
  double var = 0.0;
  double se = 0.0;
};

inline VarSe var_and_se(const std::vector<double>& x) {
  const MeanSe ms = mean_and_se(x);
  const double n = static_cast<double>(x.size());
  double m4 = 0.0;
  for (double v : x) {
    const double d = v - ms.mean;
    m4 += d * d * d * d;
  }
  m4 /= n;
  VarSe out;
  out.var = ms.sd * ms.sd;
  out.se = std::sqrt(std::max(0.0, m4 - out.var * out.var) / n);
  return out;
}

}  // namespace detail

/// One battery sweep: per replicate, a coupled realization evaluated on all
/// fixed regions. Shared by the void, mean, coupling and poisson suites; the
/// command-line simulate path uses the same streams, so per-region means
/// agree bit for bit across entry points.
inline std::vector<detail::BatteryRow> battery_sweep(std::uint64_t n, std::uint64_t replicates,
                                                     std::uint64_t seed, unsigned threads) {
  static const RectUnion lshape = validate_union(std::vector<Rect>(kLShapeRects.begin(), kLShapeRects.end()));
  const std::uint64_t sweep_seed = substream_seed(seed, stream_purpose::kContextSweep);
  return parallel_replicates(sweep_seed, replicates, threads, [n](std::uint64_t, RngStream& rng) {
    const CouplingContext ctx = build_context(n, kBatteryT1Max, kBatteryT2Max, rng);
    detail::BatteryRow row;
    row.s_corner = static_cast<std::uint32_t>(pi_s_corner(ctx, 1.0, 1.0));
    row.k_corner = static_cast<std::uint32_t>(pi_k_corner(ctx, 1.0, 1.0));
    row.s_band = static_cast<std::uint32_t>(pi_rect(ctx, Process::S, kBandRect));
    row.k_band = static_cast<std::uint32_t>(pi_rect(ctx, Process::K, kBandRect));
    row.s_lshape = static_cast<std::uint32_t>(pi_union(ctx, Process::S, lshape));
    for (const Rect& cell : kQuadrantRects) {
      if (pi_rect(ctx, Process::S, cell) != pi_rect(ctx, Process::K, cell)) {
        row.quad_equal = 0;
        break;
      }
    }
    return row;
  });
}

// --- generic estimators (each runs its own sweep) ---

/// Fraction of replicates with pi(u) = 0, against exp(-area(u)).
inline TestReport estimate_void_probability(const MCConfig& cfg, const RectUnion& u, Process which,
                                            std::string name, double tolerance, unsigned threads = 1) {
  validate_config(cfg);
  const std::uint64_t sweep_seed = substream_seed(cfg.seed, stream_purpose::kContextSweep);
  const auto rows = parallel_replicates(sweep_seed, cfg.replicates, threads, [&](std::uint64_t, RngStream& rng) {
    const CouplingContext ctx = build_context(cfg.n, cfg.t1_max, cfg.t2_max, rng);
    return static_cast<std::uint32_t>(pi_union(ctx, which, u));
  });
  const auto [p, se] = detail::fraction_and_se(rows, [](std::uint32_t c) { return c == 0; });
  return make_report(std::move(name), p, se, limit_void_probability(u), tolerance, cfg.replicates, cfg.seed, cfg.n);
}

/// Sample mean of pi(u) against the limit intensity area(u), with tolerance
/// max(0.05 * area, 3 SE).
inline TestReport estimate_mean_count(const MCConfig& cfg, const RectUnion& u, Process which,
                                      std::string name, unsigned threads = 1) {
  validate_config(cfg);
  const std::uint64_t sweep_seed = substream_seed(cfg.seed, stream_purpose::kContextSweep);
  const auto rows = parallel_replicates(sweep_seed, cfg.replicates, threads, [&](std::uint64_t, RngStream& rng) {
    const CouplingContext ctx = build_context(cfg.n, cfg.t1_max, cfg.t2_max, rng);
    return static_cast<std::uint32_t>(pi_union(ctx, which, u));
  });
  const MeanSe ms = mean_and_se(detail::column(rows, [](std::uint32_t c) { return c; }));
  const double ref = limit_mean(u);
  const double tol = std::max(0.05 * ref, 3.0 * ms.se);
  return make_report(std::move(name), ms.mean, ms.se, ref, tol, cfg.replicates, cfg.seed, cfg.n);
}

/// Corner mean, reported twice: against the exact finite-n value (3 SE) and
/// against the limit area t1*t2 (max(0.05 * area, 3 SE)).
inline std::pair<TestReport, TestReport> estimate_mean_corner(const MCConfig& cfg, double t1, double t2,
                                                              Process which, const std::string& name_prefix,
                                                              unsigned threads = 1) {
  validate_config(cfg);
  const std::uint64_t sweep_seed = substream_seed(cfg.seed, stream_purpose::kContextSweep);
  const auto rows = parallel_replicates(sweep_seed, cfg.replicates, threads, [&](std::uint64_t, RngStream& rng) {
    const CouplingContext ctx = build_context(cfg.n, cfg.t1_max, cfg.t2_max, rng);
    return static_cast<std::uint32_t>(pi_corner(ctx, which, t1, t2));
  });
  const MeanSe ms = mean_and_se(detail::column(rows, [](std::uint32_t c) { return c; }));
  const double theta = t1 / std::log(static_cast<double>(cfg.n));
  const double exact = which == Process::S ? mean_s(cfg.n, theta, t2) : mean_k(cfg.n, theta, t2) - 1.0;
  const double ref_area = t1 * t2;
  TestReport vs_exact = make_report(name_prefix + "_vs_exact", ms.mean, ms.se, exact, 3.0 * ms.se,
                                    cfg.replicates, cfg.seed, cfg.n);
  TestReport vs_area = make_report(name_prefix + "_vs_area", ms.mean, ms.se, ref_area,
                                   std::max(0.05 * ref_area, 3.0 * ms.se), cfg.replicates, cfg.seed, cfg.n);
  return {std::move(vs_exact), std::move(vs_area)};
}

/// Coupling discrepancy at a corner point: mean of Delta against the closed
/// form (3 SE), the positivity probability against the 0.01 gate, and the
/// closed-form magnitude against the 0.005 gate.
inline std::vector<TestReport> coupling_discrepancy(const MCConfig& cfg, double t1, double t2,
                                                    unsigned threads = 1) {
  validate_config(cfg);
  const std::uint64_t sweep_seed = substream_seed(cfg.seed, stream_purpose::kContextSweep);
  const auto rows = parallel_replicates(sweep_seed, cfg.replicates, threads, [&](std::uint64_t, RngStream& rng) {
    const CouplingContext ctx = build_context(cfg.n, cfg.t1_max, cfg.t2_max, rng);
    return static_cast<std::uint32_t>(delta_corner(ctx, t1, t2));
  });
  const double ref = mean_delta(cfg.n, t1, t2);
  const MeanSe ms = mean_and_se(detail::column(rows, [](std::uint32_t c) { return c; }));
  const auto [p_pos, se_pos] = detail::fraction_and_se(rows, [](std::uint32_t c) { return c > 0; });
  std::vector<TestReport> out;
  out.push_back(make_report("coupling_delta_mean", ms.mean, ms.se, ref, 3.0 * ms.se, cfg.replicates, cfg.seed, cfg.n));
  out.push_back(make_report("coupling_delta_positive", p_pos, se_pos, 0.0, 0.01, cfg.replicates, cfg.seed, cfg.n));
  out.push_back(make_report("coupling_delta_bound", ref, 0.0, 0.0, 0.005, cfg.replicates, cfg.seed, cfg.n));
  return out;
}

/// Empirical mean of Delta along a ladder of n values; passes iff strictly
/// decreasing. The estimate is the number of adjacent non-decreases.
inline TestReport coupling_delta_monotone(const std::vector<std::uint64_t>& points, std::uint64_t replicates,
                                          std::uint64_t seed, unsigned threads = 1,
                                          const std::vector<detail::BatteryRow>* battery = nullptr,
                                          std::uint64_t battery_n = 0) {
  if (points.size() < 2) throw invalid_parameter("coupling_delta_monotone: need at least two points");
  std::vector<double> means;
  for (std::uint64_t n_i : points) {
    if (battery != nullptr && n_i == battery_n) {
      means.push_back(mean_and_se(detail::column(*battery, [](const detail::BatteryRow& r) {
                        return r.s_corner - r.k_corner;
                      })).mean);
      continue;
    }
    const auto rows = battery_sweep(n_i, replicates, seed, threads);
    means.push_back(mean_and_se(detail::column(rows, [](const detail::BatteryRow& r) {
                      return r.s_corner - r.k_corner;
                    })).mean);
  }
  double violations = 0.0;
  for (std::size_t i = 1; i < means.size(); ++i)
    if (!(means[i] < means[i - 1])) violations += 1.0;
  return make_report("coupling_delta_monotone", violations, 0.0, 0.0, 0.0, replicates, seed, points.back());
}

/// Two-sided KS distance of the centered tree-length residuals against the
/// standard Gumbel CDF; tolerance is the 1% critical value 1.63/sqrt(R).
inline TestReport gumbel_ks(const MCConfig& cfg, unsigned threads = 1) {
  validate_config(cfg);
  const std::uint64_t m = floor_pow(cfg.n, cfg.t2_max);
  if (m < 100) throw invalid_parameter("gumbel_ks: floor(n^t2_max) must be at least 100");
  if (m > kMaxCoalescentSize) throw scale_limit("gumbel_ks: floor(n^t2_max) exceeds 1e7");
  const std::uint64_t sweep_seed = substream_seed(cfg.seed, stream_purpose::kGumbel);
  auto residuals = parallel_replicates(sweep_seed, cfg.replicates, threads, [m](std::uint64_t, RngStream& rng) {
    const TreeLengths tl = sample_increments(m, rng);
    return gumbel_residual(tl);
  });
  const double d = ks_statistic(std::move(residuals), [](double x) { return std::exp(-std::exp(-x)); });
  const double tol = 1.63 / std::sqrt(static_cast<double>(cfg.replicates));
  return make_report("gumbel_ks", d, 0.0, 0.0, tol, cfg.replicates, cfg.seed, cfg.n);
}

/// Per-rectangle chi-square of the count histogram against Poisson(area),
/// tail-bucketed at count >= 5, plus pairwise correlations. A chi-square row
/// passes when its p-value exceeds 0.01; a correlation row when |corr| <=
/// 0.05.
inline std::vector<TestReport> poisson_gof(const MCConfig& cfg, const std::vector<Rect>& rects,
                                           unsigned threads = 1) {
  validate_config(cfg);
  const RectUnion u = validate_union(rects);  // enforces pairwise disjointness
  const std::uint64_t sweep_seed = substream_seed(cfg.seed, stream_purpose::kContextSweep);
  const auto rows = parallel_replicates(sweep_seed, cfg.replicates, threads, [&](std::uint64_t, RngStream& rng) {
    const CouplingContext ctx = build_context(cfg.n, cfg.t1_max, cfg.t2_max, rng);
    std::vector<std::uint32_t> counts(rects.size());
    for (std::size_t i = 0; i < rects.size(); ++i)
      counts[i] = static_cast<std::uint32_t>(pi_rect(ctx, Process::S, rects[i]));
    return counts;
  });
  std::vector<TestReport> out;
  constexpr std::size_t kTailCap = 5;
  for (std::size_t i = 0; i < rects.size(); ++i) {
    std::vector<std::uint64_t> sample;
    sample.reserve(rows.size());
    for (const auto& row : rows) sample.push_back(row[i]);
    const std::vector<double> observed = histogram_with_tail(sample, kTailCap);
    std::vector<double> expected = poisson_cells(rects[i].area(), kTailCap);
    for (double& e : expected) e *= static_cast<double>(cfg.replicates);
    const Chi2Result chi = chi_square_gof(observed, expected);
    out.push_back(make_report("poisson_gof_rect" + std::to_string(i), chi.p_value, 0.0, 1.0, 0.99,
                              cfg.replicates, cfg.seed, cfg.n));
  }
  for (std::size_t i = 0; i < rects.size(); ++i) {
    for (std::size_t j = i + 1; j < rects.size(); ++j) {
      const double corr = pearson_correlation(
          detail::column(rows, [i](const std::vector<std::uint32_t>& r) { return r[i]; }),
          detail::column(rows, [j](const std::vector<std::uint32_t>& r) { return r[j]; }));
      out.push_back(make_report("poisson_corr_rect" + std::to_string(i) + "_rect" + std::to_string(j), corr,
                                0.0, 0.0, 0.05, cfg.replicates, cfg.seed, cfg.n));
    }
  }
  return out;
}

/// P(pi_S r = pi_K r for every r) against reference 1; tolerance is the
/// Markov bound at the corner envelope plus 3 SE.
inline TestReport joint_equality(const MCConfig& cfg, const std::vector<Rect>& rects, unsigned threads = 1) {
  validate_config(cfg);
  double env_t1 = 0.0, env_t2 = 0.0;
  for (const Rect& r : rects) {
    env_t1 = std::max(env_t1, r.u1);
    env_t2 = std::max(env_t2, r.u2);
  }
  const std::uint64_t sweep_seed = substream_seed(cfg.seed, stream_purpose::kContextSweep);
  const auto rows = parallel_replicates(sweep_seed, cfg.replicates, threads, [&](std::uint64_t, RngStream& rng) {
    const CouplingContext ctx = build_context(cfg.n, cfg.t1_max, cfg.t2_max, rng);
    for (const Rect& r : rects)
      if (pi_rect(ctx, Process::S, r) != pi_rect(ctx, Process::K, r)) return std::uint8_t{0};
    return std::uint8_t{1};
  });
  const auto [p, se] = detail::fraction_and_se(rows, [](std::uint8_t e) { return e != 0; });
  const double markov = mean_delta(cfg.n, env_t1, env_t2);
  return make_report("joint_equality", p, se, 1.0, markov + 3.0 * se, cfg.replicates, cfg.seed, cfg.n);
}

/// Fixed-scale moment agreement: coupled draws at (m, t1) in
/// {(100, 1), (1000, 0.5)} against the closed forms for E S, Var S, E K and
/// Var(S - K), all at 3 standard errors.
inline std::vector<TestReport> oracle_agreement_reports(std::uint64_t seed, std::uint64_t replicates,
                                                        unsigned threads = 1) {
  if (replicates < 100) throw invalid_parameter("oracle_agreement_reports: at least 100 replicates");
  std::vector<TestReport> reports;
  for (const auto& [m, t1] : std::array<std::pair<std::uint64_t, double>, 2>{{{100, 1.0}, {1000, 0.5}}}) {
    const auto rows = parallel_replicates(substream_seed(seed, stream_purpose::kOracleSweep + m),
                                          replicates, threads, [m = m, t1 = t1](std::uint64_t, RngStream& rng) {
                                            return sample_coupled_counts(m, t1, rng);
                                          });
    const std::string suffix = "_m" + std::to_string(m);
    const auto sites = detail::column(rows, [](const CoupledCounts& c) { return c.sites; });
    const auto cycles = detail::column(rows, [](const CoupledCounts& c) { return c.cycles; });
    std::vector<double> diff(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      diff[i] = static_cast<double>(rows[i].sites) - static_cast<double>(rows[i].cycles);
    const MeanSe s_ms = mean_and_se(sites);
    const MeanSe k_ms = mean_and_se(cycles);
    const detail::VarSe s_vs = detail::var_and_se(sites);
    const detail::VarSe d_vs = detail::var_and_se(diff);
    reports.push_back(make_report("oracle_s_mean" + suffix, s_ms.mean, s_ms.se, mean_s(m, t1, 1.0),
                                  3.0 * s_ms.se, replicates, seed, m));
    reports.push_back(make_report("oracle_s_var" + suffix, s_vs.var, s_vs.se, var_s(m, t1, 1.0),
                                  3.0 * s_vs.se, replicates, seed, m));
    reports.push_back(make_report("oracle_k_mean" + suffix, k_ms.mean, k_ms.se, mean_k(m, t1, 1.0),
                                  3.0 * k_ms.se, replicates, seed, m));
    reports.push_back(make_report("oracle_smk_var" + suffix, d_vs.var, d_vs.se, var_s_minus_k(m, t1, 1.0),
                                  3.0 * d_vs.se, replicates, seed, m));
  }
  return reports;
}

/// Chi-square of sequential-sampler and Bernoulli-sum cycle counts against
/// the exact pmf; both must pass at the 1% level.
inline std::pair<TestReport, TestReport> ewens_consistency(std::uint64_t n_sub, double t1,
                                                           std::uint64_t replicates, std::uint64_t seed,
                                                           unsigned threads = 1) {
  if (n_sub == 0 || n_sub > 12) throw invalid_parameter("ewens_consistency: n_sub must be in 1..12");
  if (replicates < 100) throw invalid_parameter("ewens_consistency: at least 100 replicates");
  const CyclePmf pmf = exact_cycle_pmf(n_sub, t1);
  std::vector<double> expected(n_sub);
  for (std::uint64_t k = 1; k <= n_sub; ++k) expected[k - 1] = pmf.at(k) * static_cast<double>(replicates);

  auto run_one = [&](std::uint64_t purpose, auto&& draw, const char* name) {
    const auto counts = parallel_replicates(substream_seed(seed, purpose), replicates, threads,
                                            [&](std::uint64_t, RngStream& rng) {
                                              return static_cast<std::uint32_t>(draw(rng));
                                            });
    std::vector<double> observed(n_sub, 0.0);
    for (std::uint32_t c : counts) observed[c - 1] += 1.0;
    const Chi2Result chi = chi_square_gof(observed, expected);
    return make_report(name, chi.p_value, 0.0, 1.0, 0.99, replicates, seed, n_sub);
  };

  TestReport crp = run_one(stream_purpose::kEwensCrp,
                           [&](RngStream& rng) { return cycle_count(sample_crp(n_sub, t1, rng)); },
                           "ewens_crp_chi2");
  TestReport feller = run_one(stream_purpose::kEwensFeller,
                              [&](RngStream& rng) { return feller_cycle_count(n_sub, t1, rng); },
                              "ewens_feller_chi2");
  crp.name += "_t1_" + std::to_string(t1).substr(0, 4);
  feller.name += "_t1_" + std::to_string(t1).substr(0, 4);
  return {std::move(crp), std::move(feller)};
}

/// Max absolute pmf error between brute-force enumeration of all n!
/// permutations (n <= 6) and the Stirling-recurrence pmf, over
/// t1 in {0.5, 1, 2}.
inline TestReport ewens_enumeration_exactness() {
  double worst = 0.0;
  for (std::uint64_t n = 1; n <= 6; ++n) {
    std::vector<std::uint32_t> line(n);
    for (std::uint32_t i = 0; i < n; ++i) line[i] = i;
    std::vector<std::vector<double>> weight_by_t1(3, std::vector<double>(n + 1, 0.0));
    const std::array<double, 3> t1s{0.5, 1.0, 2.0};
    std::vector<std::uint32_t> perm = line;
    do {
      const std::uint64_t c = cycle_count(Permutation{perm});
      for (std::size_t ti = 0; ti < t1s.size(); ++ti)
        weight_by_t1[ti][c] += std::pow(t1s[ti], static_cast<double>(c));
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (std::size_t ti = 0; ti < t1s.size(); ++ti) {
      const CyclePmf pmf = exact_cycle_pmf(n, t1s[ti]);
      const double norm = rising_factorial(t1s[ti], n);
      for (std::uint64_t k = 1; k <= n; ++k)
        worst = std::max(worst, std::fabs(weight_by_t1[ti][k] / norm - pmf.at(k)));
    }
  }
  return make_report("ewens_enumeration_exact", worst, 0.0, 0.0, 1e-10, 0, 0, 6);
}

/// Exact structural property suite: inclusion-exclusion vs direct counts,
/// additivity over partitions, corner domination and nonnegativity, over
/// seeded realizations and random rectangles. Estimates are violation counts.
inline std::vector<TestReport> measure_structure_suite(std::uint64_t seed, std::uint64_t realizations = 100,
                                                       std::uint64_t rects_per_realization = 10) {
  constexpr std::uint64_t kN = 100;
  constexpr double kT1Max = 2.0;
  constexpr double kT2Max = 1.2;
  double ie_mismatch = 0.0, additivity = 0.0, k_exceeds_s = 0.0, negative = 0.0;
  for (std::uint64_t rep = 0; rep < realizations; ++rep) {
    RngStream rng = make_stream(substream_seed(seed, stream_purpose::kStructure), rep);
    const CouplingContext ctx = build_context(kN, kT1Max, kT2Max, rng);
    for (std::uint64_t q = 0; q < rects_per_realization; ++q) {
      const double a1 = uniform01(rng) * kT1Max, b1 = uniform01(rng) * kT1Max;
      const double a2 = uniform01(rng) * kT2Max, b2 = uniform01(rng) * kT2Max;
      const Rect r = make_rect(std::min(a1, b1), std::max(a1, b1), std::min(a2, b2), std::max(a2, b2));

      for (Process which : {Process::S, Process::K}) {
        const auto corner = [&](double t1, double t2) {
          return static_cast<std::int64_t>(pi_corner(ctx, which, t1, t2));
        };
        const std::int64_t signed_ie = corner(r.u1, r.u2) + corner(r.s1, r.s2) - corner(r.u1, r.s2) - corner(r.s1, r.u2);
        if (signed_ie < 0) negative += 1.0;
        const std::uint64_t direct = which == Process::S ? pi_s_rect_direct(ctx, r) : pi_k_rect_direct(ctx, r);
        if (signed_ie != static_cast<std::int64_t>(direct)) ie_mismatch += 1.0;

        // random 2x2 partition of r
        const double c1 = r.s1 + uniform01(rng) * r.width();
        const double c2 = r.s2 + uniform01(rng) * r.height();
        const RectUnion parts = validate_union({Rect{r.s1, c1, r.s2, c2}, Rect{c1, r.u1, r.s2, c2},
                                                Rect{r.s1, c1, c2, r.u2}, Rect{c1, r.u1, c2, r.u2}});
        if (pi_union(ctx, which, parts) != pi_rect(ctx, which, r)) additivity += 1.0;
      }

      const double t1 = uniform01(rng) * kT1Max;
      const double t2 = uniform01(rng) * kT2Max;
      if (pi_k_corner(ctx, t1, t2) > pi_s_corner(ctx, t1, t2)) k_exceeds_s += 1.0;
    }
  }
  const std::uint64_t total = realizations * rects_per_realization;
  std::vector<TestReport> out;
  out.push_back(make_report("structure_ie_matches_direct", ie_mismatch, 0.0, 0.0, 0.0, total, seed, kN));
  out.push_back(make_report("structure_additivity", additivity, 0.0, 0.0, 0.0, total, seed, kN));
  out.push_back(make_report("structure_k_le_s", k_exceeds_s, 0.0, 0.0, 0.0, total, seed, kN));
  out.push_back(make_report("structure_nonnegative", negative, 0.0, 0.0, 0.0, total, seed, kN));
  return out;
}

/// The harmonic increment bound asserted verbatim: over random (n, s, t) with
/// s <= t, count violations of (H*_{[n^t]-1} - H*_{[n^s]-1})/log n <= t - s.
/// The estimate is the violation count (reference 0, tolerance 0).
inline TestReport harmonic_bound_report(std::uint64_t seed, std::uint64_t samples = 10'000) {
  static const HarmonicCache cache(1'000'000, 1);
  RngStream rng = make_stream(substream_seed(seed, stream_purpose::kHarmonic), 0);
  const double max_log_m = std::log(1e6);
  double violations = 0.0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const std::uint64_t n = 2 + static_cast<std::uint64_t>(std::floor(std::exp(uniform01(rng) * max_log_m)));
    const double log_n = std::log(static_cast<double>(n));
    const double t_cap = std::min(3.0, max_log_m / log_n);
    double s = uniform01(rng) * t_cap;
    double t = uniform01(rng) * t_cap;
    if (s > t) std::swap(s, t);
    const double lhs = (cache.hstar_at(floor_pow(n, t) - 1) - cache.hstar_at(floor_pow(n, s) - 1)) / log_n;
    if (lhs > (t - s) + 1e-12) violations += 1.0;
  }
  return make_report("harmonic_increment_bound", violations, 0.0, 0.0, 0.0, samples, seed, 0);
}

// --- verify suites ---

enum class Suite { Void, Mean, Coupling, Gumbel, Poisson, Ewens };

struct VerifyOptions {
  /// Pin the per-criterion parameters (gumbel m=1e4/5000 reps, ewens 1e5
  /// draws) the way the full battery does, regardless of cfg.
  bool acceptance_params = false;
  unsigned threads = 1;
};

namespace detail {

inline const std::vector<detail::BatteryRow>& battery_cache(const MCConfig& cfg, unsigned threads,
                                                            std::vector<detail::BatteryRow>& storage) {
  if (storage.empty()) storage = battery_sweep(cfg.n, cfg.replicates, cfg.seed, threads);
  return storage;
}

}  // namespace detail

/// Runs the requested suites and returns their reports in canonical order.
/// The void/mean/coupling/poisson suites share one battery sweep at the
/// pinned envelope t1_max = 2, t2_max = 1.
inline std::vector<TestReport> run_verify(const MCConfig& user_cfg, const std::vector<Suite>& suites,
                                          const VerifyOptions& opt = {}) {
  MCConfig cfg = user_cfg;
  cfg.t1_max = kBatteryT1Max;
  cfg.t2_max = kBatteryT2Max;
  validate_config(cfg);
  const unsigned threads = opt.threads == 0 ? 1 : opt.threads;

  auto wants = [&suites](Suite s) { return std::find(suites.begin(), suites.end(), s) != suites.end(); };
  std::vector<detail::BatteryRow> battery;
  const bool needs_battery = wants(Suite::Void) || wants(Suite::Mean) || wants(Suite::Coupling) || wants(Suite::Poisson);
  if (needs_battery) detail::battery_cache(cfg, threads, battery);

  std::vector<TestReport> reports;
  auto add_mean_report = [&](const char* name, const std::vector<double>& xs, double ref, bool vs_area) {
    const MeanSe ms = mean_and_se(xs);
    const double tol = vs_area ? std::max(0.05 * ref, 3.0 * ms.se) : 3.0 * ms.se;
    reports.push_back(make_report(name, ms.mean, ms.se, ref, tol, cfg.replicates, cfg.seed, cfg.n));
  };

  if (wants(Suite::Void)) {
    const auto add_void = [&](const char* name, auto&& pred, double ref, double tol) {
      const auto [p, se] = detail::fraction_and_se(battery, pred);
      reports.push_back(make_report(name, p, se, ref, tol, cfg.replicates, cfg.seed, cfg.n));
    };
    const double e1 = std::exp(-1.0), e2 = std::exp(-2.0);
    add_void("void_s_unit_square", [](const detail::BatteryRow& r) { return r.s_corner == 0; }, e1, 0.02);
    add_void("void_k_unit_square", [](const detail::BatteryRow& r) { return r.k_corner == 0; }, e1, 0.02);
    add_void("void_s_two_squares", [](const detail::BatteryRow& r) { return r.s_corner + r.s_band == 0; }, e2, 0.03);
    add_void("void_k_two_squares", [](const detail::BatteryRow& r) { return r.k_corner + r.k_band == 0; }, e2, 0.03);
  }

  if (wants(Suite::Mean)) {
    const double theta = 1.0 / std::log(static_cast<double>(cfg.n));
    add_mean_report("mean_s_corner_vs_exact",
                    detail::column(battery, [](const detail::BatteryRow& r) { return r.s_corner; }),
                    mean_s(cfg.n, theta, 1.0), false);
    add_mean_report("mean_s_corner_vs_area",
                    detail::column(battery, [](const detail::BatteryRow& r) { return r.s_corner; }), 1.0, true);
    add_mean_report("mean_s_band_vs_area",
                    detail::column(battery, [](const detail::BatteryRow& r) { return r.s_band; }), 1.0, true);
    add_mean_report("mean_s_lshape_vs_area",
                    detail::column(battery, [](const detail::BatteryRow& r) { return r.s_lshape; }), 1.5, true);
    add_mean_report("mean_k_corner_vs_exact",
                    detail::column(battery, [](const detail::BatteryRow& r) { return r.k_corner; }),
                    mean_k(cfg.n, theta, 1.0) - 1.0, false);

    // fixed-scale moment agreement against the closed forms
    const std::uint64_t oracle_reps = opt.acceptance_params ? 100'000 : std::max<std::uint64_t>(cfg.replicates, 10'000);
    for (TestReport& r : oracle_agreement_reports(cfg.seed, oracle_reps, threads))
      reports.push_back(std::move(r));
  }

  if (wants(Suite::Coupling)) {
    const auto deltas = detail::column(battery, [](const detail::BatteryRow& r) { return r.s_corner - r.k_corner; });
    const MeanSe d_ms = mean_and_se(deltas);
    const double ref = mean_delta(cfg.n, 1.0, 1.0);
    const auto [p_pos, se_pos] =
        detail::fraction_and_se(battery, [](const detail::BatteryRow& r) { return r.s_corner != r.k_corner; });
    reports.push_back(make_report("coupling_delta_mean", d_ms.mean, d_ms.se, ref, 3.0 * d_ms.se,
                                  cfg.replicates, cfg.seed, cfg.n));
    reports.push_back(make_report("coupling_delta_positive", p_pos, se_pos, 0.0, 0.01, cfg.replicates,
                                  cfg.seed, cfg.n));
    reports.push_back(make_report("coupling_delta_bound", ref, 0.0, 0.0, 0.005, cfg.replicates, cfg.seed, cfg.n));
    reports.push_back(coupling_delta_monotone({100, 1000, 10'000, 100'000}, cfg.replicates, cfg.seed, threads,
                                              &battery, cfg.n));
    const auto [p_eq, se_eq] =
        detail::fraction_and_se(battery, [](const detail::BatteryRow& r) { return r.quad_equal != 0; });
    reports.push_back(make_report("joint_equality_quadrants", p_eq, se_eq, 1.0, ref + 3.0 * se_eq,
                                  cfg.replicates, cfg.seed, cfg.n));
  }

  if (wants(Suite::Gumbel)) {
    MCConfig gcfg = cfg;
    if (opt.acceptance_params) {
      gcfg.n = 10'000;
      gcfg.replicates = 5'000;
    }
    reports.push_back(gumbel_ks(gcfg, threads));
  }

  if (wants(Suite::Poisson)) {
    constexpr std::size_t kTailCap = 5;
    const std::array<std::pair<const char*, std::uint32_t detail::BatteryRow::*>, 2> rect_columns{
        {{"poisson_gof_unit_square", &detail::BatteryRow::s_corner},
         {"poisson_gof_band", &detail::BatteryRow::s_band}}};
    for (const auto& [name, member] : rect_columns) {
      std::vector<std::uint64_t> sample;
      sample.reserve(battery.size());
      for (const auto& row : battery) sample.push_back(row.*member);
      std::vector<double> expected = poisson_cells(1.0, kTailCap);
      for (double& e : expected) e *= static_cast<double>(cfg.replicates);
      const Chi2Result chi = chi_square_gof(histogram_with_tail(sample, kTailCap), expected);
      reports.push_back(make_report(name, chi.p_value, 0.0, 1.0, 0.99, cfg.replicates, cfg.seed, cfg.n));
    }
    const double corr = pearson_correlation(
        detail::column(battery, [](const detail::BatteryRow& r) { return r.s_corner; }),
        detail::column(battery, [](const detail::BatteryRow& r) { return r.s_band; }));
    reports.push_back(make_report("poisson_corr_pair", corr, 0.0, 0.0, 0.05, cfg.replicates, cfg.seed, cfg.n));
  }

  if (wants(Suite::Ewens)) {
    reports.push_back(ewens_enumeration_exactness());
    const std::uint64_t draws = opt.acceptance_params ? 100'000 : cfg.replicates;
    for (double t1 : {0.5, 1.0, 2.0}) {
      auto [crp, feller] = ewens_consistency(8, t1, draws, cfg.seed, threads);
      reports.push_back(std::move(crp));
      reports.push_back(std::move(feller));
    }
  }

  return reports;
}

}  // namespace coalpp
