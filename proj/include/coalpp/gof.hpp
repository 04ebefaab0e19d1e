// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "coalpp/errors.hpp"

namespace coalpp {

/// Upper regularized incomplete gamma Q(a, x); the chi-square survival
/// function is gamma_q(df/2, x/2). Series below a+1, Lentz continued fraction
/// above.
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw invalid_parameter("gamma_q: need a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  const double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < 2000; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    const double p = sum * std::exp(log_prefactor);
    return p >= 1.0 ? 0.0 : 1.0 - p;
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 2000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(log_prefactor) * h;
}

struct Chi2Result {
  double statistic = 0.0;
  std::uint64_t df = 0;
  double p_value = 1.0;
};

namespace detail {

/// Greedy forward merge so every bucket's expected count reaches at least 5;
/// a trailing underfull bucket joins its left neighbour.
inline void merge_buckets(const std::vector<double>& observed, const std::vector<double>& expected,
                          std::vector<double>& obs_out, std::vector<double>& exp_out) {
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    o += observed[i];
    e += expected[i];
    if (e >= 5.0) {
      obs_out.push_back(o);
      exp_out.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (!exp_out.empty()) {
      obs_out.back() += o;
      exp_out.back() += e;
    } else if (e > 0.0) {
      obs_out.push_back(o);
      exp_out.push_back(e);
    }
  }
}

}  // namespace detail

/// Pearson chi-square of observed cell counts against expected cell counts
/// (same total). Cells are merged until every expected count is at least 5.
inline Chi2Result chi_square_gof(const std::vector<double>& observed, const std::vector<double>& expected) {
  if (observed.size() != expected.size()) throw invalid_parameter("chi_square_gof: size mismatch");
  std::vector<double> obs, exp;
  detail::merge_buckets(observed, expected, obs, exp);
  Chi2Result result;
  if (exp.size() < 2) return result;  // everything in one bucket: trivially consistent
  for (std::size_t i = 0; i < exp.size(); ++i) {
    const double diff = obs[i] - exp[i];
    result.statistic += diff * diff / exp[i];
  }
  result.df = exp.size() - 1;
  result.p_value = gamma_q(0.5 * static_cast<double>(result.df), 0.5 * result.statistic);
  return result;
}

/// Two-sample homogeneity chi-square over aligned histograms. Columns are
/// merged until both pooled expectations reach 5.
inline Chi2Result chi_square_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw invalid_parameter("chi_square_two_sample: size mismatch");
  const double na = std::accumulate(a.begin(), a.end(), 0.0);
  const double nb = std::accumulate(b.begin(), b.end(), 0.0);
  if (na <= 0.0 || nb <= 0.0) throw invalid_parameter("chi_square_two_sample: empty sample");
  const double total = na + nb;
  // merge on the smaller of the two expected counts
  std::vector<double> ma, mb;
  double ca = 0.0, cb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += a[i];
    cb += b[i];
    const double col = ca + cb;
    if (std::min(col * na / total, col * nb / total) >= 5.0) {
      ma.push_back(ca);
      mb.push_back(cb);
      ca = cb = 0.0;
    }
  }
  if ((ca > 0.0 || cb > 0.0) && !ma.empty()) {
    ma.back() += ca;
    mb.back() += cb;
  }
  Chi2Result result;
  if (ma.size() < 2) return result;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    const double col = ma[i] + mb[i];
    const double ea = col * na / total;
    const double eb = col * nb / total;
    result.statistic += (ma[i] - ea) * (ma[i] - ea) / ea + (mb[i] - eb) * (mb[i] - eb) / eb;
  }
  result.df = ma.size() - 1;
  result.p_value = gamma_q(0.5 * static_cast<double>(result.df), 0.5 * result.statistic);
  return result;
}

/// Two-sided Kolmogorov-Smirnov distance of a sample against a continuous
/// CDF. 1% critical value at sample size N: 1.63/sqrt(N).
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
  if (sample.empty()) throw invalid_parameter("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::max(f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f));
  }
  return d;
}

struct MeanSe {
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
};

/// Sample mean with standard deviation and standard error (two-pass, summed
/// in index order so results do not depend on scheduling).
inline MeanSe mean_and_se(const std::vector<double>& x) {
  if (x.empty()) throw invalid_parameter("mean_and_se: empty sample");
  MeanSe out;
  double sum = 0.0;
  for (double v : x) sum += v;
  out.mean = sum / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - out.mean) * (v - out.mean);
  if (x.size() > 1) out.sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  out.se = out.sd / std::sqrt(static_cast<double>(x.size()));
  return out;
}

inline double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw invalid_parameter("pearson_correlation: need two samples of equal size >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

/// Poisson cell probabilities P(0), ..., P(cap-1) plus the pooled tail
/// P(>= cap) in the last cell.
inline std::vector<double> poisson_cells(double lambda, std::size_t cap) {
  if (!(lambda >= 0.0)) throw invalid_parameter("poisson_cells: lambda must be nonnegative");
  if (cap == 0) throw invalid_parameter("poisson_cells: need at least one cell");
  std::vector<double> cells(cap + 1, 0.0);
  double p = std::exp(-lambda);
  double head = 0.0;
  for (std::size_t k = 0; k < cap; ++k) {
    cells[k] = p;
    head += p;
    p *= lambda / static_cast<double>(k + 1);
  }
  cells[cap] = std::max(0.0, 1.0 - head);
  return cells;
}

/// Histogram of integer samples over 0..cap-1 with the tail pooled at cap.
inline std::vector<double> histogram_with_tail(const std::vector<std::uint64_t>& sample, std::size_t cap) {
  std::vector<double> h(cap + 1, 0.0);
  for (std::uint64_t v : sample) h[std::min<std::uint64_t>(v, cap)] += 1.0;
  return h;
}

}  // namespace coalpp
