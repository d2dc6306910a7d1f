// Copyright 2026 The cmchain Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CMCHAIN_ESTIMATORS_HPP_
#define CMCHAIN_ESTIMATORS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "cmchain/error.hpp"
#include "cmchain/rng.hpp"

namespace cmchain {

struct TailEstimate {
  double exponent = 0.0;
  double std_err = 0.0;
  std::string method;          // "hill", "loglog", "scaling"
  double window_lo = 0.0;      // k range (hill) or n range (loglog, scaling)
  double window_hi = 0.0;
  std::vector<std::pair<double, double>> diagnostics;  // (k or n, estimate)

  double ci_lo(double z = 1.96) const { return exponent - z * std_err; }
  double ci_hi(double z = 1.96) const { return exponent + z * std_err; }
};

// ---------------------------------------------------------------------------
// Basic sample statistics.

inline double mean(const std::vector<double>& x) {
  detail::require(!x.empty(), "mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Standard error of the mean.
inline double mean_stderr(const std::vector<double>& x) {
  detail::require(x.size() >= 2, "stderr needs two points");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
}

inline double quantile(std::vector<double> x, double p) {
  detail::require(!x.empty(), "quantile of an empty sample");
  detail::require(p >= 0.0 && p <= 1.0, "quantile level must be in [0, 1]");
  // Type-7 (linear interpolation between order statistics).
  const double h = (static_cast<double>(x.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(lo), x.end());
  const double xlo = x[lo];
  if (lo + 1 >= x.size()) return xlo;
  const double xhi = *std::min_element(x.begin() + static_cast<std::ptrdiff_t>(lo) + 1, x.end());
  return xlo + (h - static_cast<double>(lo)) * (xhi - xlo);
}

inline double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

inline double median_abs(const std::vector<double>& x) {
  std::vector<double> a(x.size());
  std::transform(x.begin(), x.end(), a.begin(), [](double v) { return std::abs(v); });
  return median(std::move(a));
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "pearson: paired samples needed");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

/// Lag-1 sample autocorrelation.
inline double lag1_correlation(const std::vector<double>& x) {
  detail::require(x.size() >= 3, "lag-1 correlation needs three points");
  std::vector<double> a(x.begin(), x.end() - 1), b(x.begin() + 1, x.end());
  return pearson(a, b);
}

/// Mid-ranks (ties get the average rank), 1-based.
inline std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

/// Pearson chi-square statistic and upper-tail p-value for counts against
/// probabilities; cells with expected count < 5 are pooled into one.
struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

inline ChiSquare chi_square(const std::vector<double>& counts,
                            const std::vector<double>& probs) {
  detail::require(counts.size() == probs.size() && !counts.empty(),
                  "chi_square: counts and probabilities differ in length");
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  double pooled_obs = 0.0, pooled_exp = 0.0;
  ChiSquare r;
  int cells = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = total * probs[i];
    if (e < 5.0) {
      pooled_obs += counts[i];
      pooled_exp += e;
      continue;
    }
    r.statistic += (counts[i] - e) * (counts[i] - e) / e;
    ++cells;
  }
  if (pooled_exp > 0.0) {
    r.statistic += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++cells;
  } else if (pooled_obs > 0.0) {
    r.statistic = std::numeric_limits<double>::infinity();
  }
  r.dof = std::max(1, cells - 1);
  if (std::isinf(r.statistic)) {
    r.p_value = 0.0;
  } else {
    boost::math::chi_squared_distribution<> d(r.dof);
    r.p_value = boost::math::cdf(boost::math::complement(d, r.statistic));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Tail estimators.

namespace detail {

inline std::vector<double> sorted_desc_positive(const std::vector<double>& samples) {
  std::vector<double> s(samples);
  for (double v : s) require(v > 0.0, "tail samples must be positive");
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

inline double hill_from_sorted(const std::vector<double>& s, std::size_t k) {
  const double threshold = std::log(s[k]);
  double h = 0.0;
  for (std::size_t i = 0; i < k; ++i) h += std::log(s[i]) - threshold;
  h /= static_cast<double>(k);
  require(h > 0.0, "hill: no tail variation above the threshold");
  return 1.0 / h;
}

}  // namespace detail

/// Hill estimate of the tail index from the k largest order statistics.
/// Diagnostics: the estimate across a decade of k centred on k.
inline TailEstimate hill(const std::vector<double>& samples, std::size_t k) {
  detail::require(k >= 1 && k < samples.size(), "hill: need 1 <= k < sample size");
  const auto s = detail::sorted_desc_positive(samples);
  TailEstimate t;
  t.method = "hill";
  t.exponent = detail::hill_from_sorted(s, k);
  t.std_err = t.exponent / std::sqrt(static_cast<double>(k));
  t.window_lo = t.window_hi = static_cast<double>(k);
  for (double f = -0.5; f <= 0.5001; f += 0.125) {
    const auto kk = static_cast<std::size_t>(std::llround(static_cast<double>(k) * std::pow(10.0, f)));
    if (kk < 1 || kk >= s.size()) continue;
    try {
      t.diagnostics.emplace_back(static_cast<double>(kk), detail::hill_from_sorted(s, kk));
    } catch (const InvalidArgument&) {
    }
  }
  return t;
}

/// Hill estimate with the default k = sqrt(sample size).
inline TailEstimate hill(const std::vector<double>& samples) {
  return hill(samples, static_cast<std::size_t>(std::sqrt(static_cast<double>(samples.size()))));
}

/// Empirical survival P{X > x} on a sorted-ascending sample.
inline double survival_sorted(const std::vector<double>& asc, double x) {
  const auto it = std::upper_bound(asc.begin(), asc.end(), x);
  return static_cast<double>(asc.end() - it) / static_cast<double>(asc.size());
}

namespace detail {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

// Weighted least squares of y on x; w = inverse variances. When
// `scale_by_residuals` the slope variance uses the residual scatter.
inline LineFit weighted_line(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& w, bool scale_by_residuals) {
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, "regression needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double var = 1.0 / sxx;
  if (scale_by_residuals) {
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += w[i] * r * r;
    }
    const double dof = static_cast<double>(x.size()) - 2.0;
    var *= dof > 0 ? rss / dof : 0.0;
  }
  f.slope_se = std::sqrt(var);
  return f;
}

}  // namespace detail

/// Tail exponent from the slope of log P{X > n} against log n over a
/// geometric grid of n in [n_lo, n_hi], weighted by binomial variances.
inline TailEstimate loglog_tail(const std::vector<double>& samples, double n_lo,
                                double n_hi, int points = 9) {
  detail::require(n_lo > 0.0 && n_hi > n_lo && points >= 2, "loglog_tail: bad window");
  std::vector<double> asc(samples);
  std::sort(asc.begin(), asc.end());
  const auto total = static_cast<double>(asc.size());
  std::vector<double> lx, ly, w;
  TailEstimate t;
  t.method = "loglog";
  t.window_lo = n_lo;
  t.window_hi = n_hi;
  for (int i = 0; i < points; ++i) {
    const double n = n_lo * std::pow(n_hi / n_lo, static_cast<double>(i) / (points - 1));
    const double s = survival_sorted(asc, n);
    t.diagnostics.emplace_back(n, s);
    if (s <= 0.0) continue;
    lx.push_back(std::log(n));
    ly.push_back(std::log(s));
    w.push_back(total * s / std::max(1.0 - s, 1e-12));  // 1 / Var(log S_hat)
  }
  detail::require(lx.size() >= 2, "loglog_tail: survival vanishes on the window");
  const auto fit = detail::weighted_line(lx, ly, w, false);
  t.exponent = -fit.slope;
  t.std_err = fit.slope_se;
  return t;
}

/// Slope of log statistic against log n by weighted least squares. With
/// per-point standard errors the weights are (statistic / stderr)^2 and the
/// slope error comes from them; without, the fit is unweighted and the slope
/// error comes from the residuals (floored at 1e-15 so it stays positive).
inline TailEstimate scaling_exponent(const std::vector<double>& statistic,
                                     const std::vector<double>& n_grid,
                                     const std::vector<double>& stderrs = {}) {
  detail::require(statistic.size() == n_grid.size(), "scaling_exponent: length mismatch");
  detail::require(n_grid.size() >= 4, "scaling_exponent: need at least 4 grid points");
  const auto [mn, mx] = std::minmax_element(n_grid.begin(), n_grid.end());
  detail::require(*mn > 0.0 && *mx / *mn >= 1000.0 * (1.0 - 1e-12),
                  "scaling_exponent: grid must span at least 3 decades");
  const bool weighted = !stderrs.empty();
  if (weighted) detail::require(stderrs.size() == n_grid.size(), "scaling_exponent: stderr length");
  std::vector<double> lx, ly, w;
  TailEstimate t;
  t.method = "scaling";
  t.window_lo = *mn;
  t.window_hi = *mx;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    detail::require(statistic[i] > 0.0, "scaling_exponent: statistic must be positive");
    lx.push_back(std::log(n_grid[i]));
    ly.push_back(std::log(statistic[i]));
    if (weighted) {
      detail::require(stderrs[i] > 0.0, "scaling_exponent: stderr must be positive");
      const double rel = stderrs[i] / statistic[i];
      w.push_back(1.0 / (rel * rel));
    } else {
      w.push_back(1.0);
    }
    t.diagnostics.emplace_back(n_grid[i], statistic[i]);
  }
  const auto fit = detail::weighted_line(lx, ly, w, !weighted);
  t.exponent = fit.slope;
  t.std_err = std::max(fit.slope_se, 1e-15);
  return t;
}

// ---------------------------------------------------------------------------
// Empirical distribution functions and the Kolmogorov-Smirnov distance.

/// Sorted sample values with cumulative weights (ties merged).
class EcdfTable {
 public:
  EcdfTable() = default;

  static EcdfTable from_samples(std::vector<double> x) {
    detail::require(!x.empty(), "ecdf of an empty sample");
    std::sort(x.begin(), x.end());
    EcdfTable t;
    const auto n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i + 1 < x.size() && x[i + 1] == x[i]) continue;
      t.values_.push_back(x[i]);
      t.cum_.push_back(static_cast<double>(i + 1) / n);
    }
    t.cum_.back() = 1.0;
    return t;
  }

  /// Builds a table from explicit (value, probability) atoms.
  static EcdfTable from_atoms(std::vector<std::pair<double, double>> atoms) {
    detail::require(!atoms.empty(), "ecdf of an empty atom list");
    std::sort(atoms.begin(), atoms.end());
    EcdfTable t;
    double acc = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      acc += atoms[i].second;
      if (i + 1 < atoms.size() && atoms[i + 1].first == atoms[i].first) continue;
      t.values_.push_back(atoms[i].first);
      t.cum_.push_back(acc);
    }
    detail::require(std::abs(t.cum_.back() - 1.0) < 1e-9, "atoms must sum to 1");
    t.cum_.back() = 1.0;
    return t;
  }

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& cumulative() const { return cum_; }
  bool empty() const { return values_.empty(); }

  /// F(x) = P{X <= x}.
  double cdf(double x) const {
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    if (it == values_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - values_.begin()) - 1];
  }

  /// Left-continuous inverse at level p in (0, 1].
  double quantile(double p) const {
    const auto it = std::lower_bound(cum_.begin(), cum_.end(), p - 1e-15);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cum_.begin()),
                                         values_.size() - 1);
    return values_[i];
  }

  /// Quantiles at the 1024 levels (i + 0.5) / 1024.
  std::vector<double> quantile_table(int points = 1024) const {
    std::vector<double> q(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) q[static_cast<std::size_t>(i)] = quantile((i + 0.5) / points);
    return q;
  }

 private:
  std::vector<double> values_;
  std::vector<double> cum_;
};

/// sup |F_a - F_b| over all jump points of both tables.
inline double ks_distance(const EcdfTable& a, const EcdfTable& b) {
  detail::require(!a.empty() && !b.empty(), "ks_distance: empty table");
  double d = 0.0;
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0;
  const auto& va = a.values();
  const auto& vb = b.values();
  while (i < va.size() || j < vb.size()) {
    double x;
    if (j >= vb.size() || (i < va.size() && va[i] <= vb[j])) {
      x = va[i];
    } else {
      x = vb[j];
    }
    while (i < va.size() && va[i] == x) fa = a.cumulative()[i++];
    while (j < vb.size() && vb[j] == x) fb = b.cumulative()[j++];
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

/// sup |F_a - F| against a reference cdf. For a continuous F leave
/// `cdf_left` empty; for a reference with atoms pass its left limit
/// F(x-) so both sides of every sample jump are compared.
inline double ks_distance(const EcdfTable& a, const std::function<double(double)>& cdf,
                          const std::function<double(double)>& cdf_left = {}) {
  detail::require(!a.empty(), "ks_distance: empty table");
  double d = 0.0;
  double prev = 0.0;
  const auto& v = a.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    const double fl = cdf_left ? cdf_left(v[i]) : f;
    d = std::max({d, std::abs(a.cumulative()[i] - f), std::abs(prev - fl)});
    prev = a.cumulative()[i];
  }
  return d;
}

inline double ks_distance(const std::vector<double>& a, const std::vector<double>& b) {
  return ks_distance(EcdfTable::from_samples(a), EcdfTable::from_samples(b));
}

/// Asymptotic two-sample KS critical value at level `alpha`.
inline double ks_critical(std::size_t n, std::size_t m, double alpha = 0.01) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const auto nn = static_cast<double>(n), mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

/// Factor that maps `sample` onto `reference` by matching the medians of
/// their absolute values (scale-only calibration).
inline double median_scale(const std::vector<double>& sample,
                           const std::vector<double>& reference) {
  const double ms = median_abs(sample);
  const double mr = median_abs(reference);
  detail::require(ms > 0.0 && mr > 0.0, "median_scale: zero median");
  return mr / ms;
}

// ---------------------------------------------------------------------------
// Independence diagnostics.

struct IndependenceDiag {
  double pearson = 0.0;
  double spearman = 0.0;      // Spearman of (x, y)
  double spearman_abs = 0.0;  // Spearman of (|x|, y)
  double rank_statistic = 0.0;  // max(|spearman|, |spearman_abs|)
  double p_value = 1.0;       // permutation p-value of rank_statistic
  int permutations = 0;
  double distance_correlation = 0.0;  // on a subsample of <= 2048 pairs
};

namespace detail {

inline double centred_dot(const std::vector<double>& a, const std::vector<double>& b,
                          const std::vector<std::size_t>* perm) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[perm ? (*perm)[i] : i];
  return s;
}

inline double distance_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  auto centred = [n](const std::vector<double>& v) {
    std::vector<double> d(n * n);
    std::vector<double> row(n, 0.0);
    double all = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double dij = std::abs(v[i] - v[j]);
        d[i * n + j] = dij;
        row[i] += dij;
      }
    for (std::size_t i = 0; i < n; ++i) {
      all += row[i];
      row[i] /= static_cast<double>(n);
    }
    all /= static_cast<double>(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i * n + j] += all - row[i] - row[j];
    return d;
  };
  const auto a = centred(x);
  const auto b = centred(y);
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  if (aa <= 0.0 || bb <= 0.0) return 0.0;
  return std::sqrt(std::max(0.0, ab) / std::sqrt(aa * bb));
}

}  // namespace detail

/// Pearson correlation plus a rank dependence test: the statistic
/// max(|Spearman(x, y)|, |Spearman(|x|, y)|) catches both monotone and
/// sign-symmetric (scale) dependence; its p-value comes from permuting y.
inline IndependenceDiag independence_diag(const std::vector<double>& x,
                                          const std::vector<double>& y, RngStream& rng,
                                          int permutations = 1999) {
  detail::require(x.size() == y.size(), "independence_diag: samples differ in length");
  detail::require(x.size() >= 1000, "independence_diag: need at least 1000 pairs");
  IndependenceDiag r;
  r.pearson = pearson(x, y);
  std::vector<double> ax(x.size());
  std::transform(x.begin(), x.end(), ax.begin(), [](double v) { return std::abs(v); });
  auto centre_ranks = [](const std::vector<double>& v) {
    auto rk = ranks(v);
    const double m = mean(rk);
    double ss = 0.0;
    for (double& e : rk) {
      e -= m;
      ss += e * e;
    }
    const double s = std::sqrt(ss);
    for (double& e : rk) e /= s;
    return rk;
  };
  const auto rx = centre_ranks(x);
  const auto rax = centre_ranks(ax);
  const auto ry = centre_ranks(y);
  r.spearman = detail::centred_dot(rx, ry, nullptr);
  r.spearman_abs = detail::centred_dot(rax, ry, nullptr);
  r.rank_statistic = std::max(std::abs(r.spearman), std::abs(r.spearman_abs));
  std::vector<std::size_t> perm(x.size());
  std::iota(perm.begin(), perm.end(), 0);
  int exceed = 0;
  for (int p = 0; p < permutations; ++p) {
    std::shuffle(perm.begin(), perm.end(), rng);
    const double s1 = std::abs(detail::centred_dot(rx, ry, &perm));
    const double s2 = std::abs(detail::centred_dot(rax, ry, &perm));
    if (std::max(s1, s2) >= r.rank_statistic) ++exceed;
  }
  r.permutations = permutations;
  r.p_value = (1.0 + exceed) / (1.0 + permutations);
  const std::size_t m = std::min<std::size_t>(x.size(), 2048);
  std::vector<double> xs(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m));
  std::vector<double> ys(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(m));
  r.distance_correlation = detail::distance_correlation(xs, ys);
  return r;
}

}  // namespace cmchain

#endif  // CMCHAIN_ESTIMATORS_HPP_
