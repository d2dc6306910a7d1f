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

#ifndef CMCHAIN_FIRST_PASSAGE_HPP_
#define CMCHAIN_FIRST_PASSAGE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "cmchain/error.hpp"
#include "cmchain/rng.hpp"

namespace cmchain {

/// Discrete time. Durations are heavy tailed (tail ~ n^-1/4 for the
/// three-agent cycles), so every sum saturates at kTimeCap instead of
/// wrapping; a saturated value means "beyond any horizon we simulate".
using Time = std::uint64_t;
inline constexpr Time kTimeCap = Time{1} << 62;

constexpr Time sat_add(Time a, Time b) {
  return (a >= kTimeCap || b >= kTimeCap || a + b >= kTimeCap) ? kTimeCap
                                                               : a + b;
}

namespace detail {

inline constexpr std::int64_t kTauTableSize = std::int64_t{1} << 16;

// a[j] = P{tau_1 > 2j - 1} = C(2j, j) / 4^j, j < kTauTableSize.
inline const std::vector<double>& tau1_survival_table() {
  static const std::vector<double> table = [] {
    std::vector<double> a(static_cast<std::size_t>(kTauTableSize));
    a[0] = 1.0;
    for (std::size_t j = 1; j < a.size(); ++j) {
      const double jj = static_cast<double>(j);
      a[j] = a[j - 1] * (2.0 * jj - 1.0) / (2.0 * jj);
    }
    return a;
  }();
  return table;
}

// Large-j expansion of Gamma(j + 1/2) / (sqrt(pi) Gamma(j + 1)).
inline double tau1_survival_asymptotic(double j) {
  const double x = 1.0 / j;
  const double series =
      1.0 + x * (-1.0 / 8 + x * (1.0 / 128 + x * (5.0 / 1024 - x * 21.0 / 32768)));
  return series / std::sqrt(3.14159265358979323846 * j);
}

inline double tau1_survival_half(double j) {
  if (j < static_cast<double>(kTauTableSize))
    return tau1_survival_table()[static_cast<std::size_t>(j)];
  return tau1_survival_asymptotic(j);
}

inline double std_normal_pdf(double x) {
  return 0.3989422804014326779 * std::exp(-0.5 * x * x);
}

}  // namespace detail

/// P{tau_1 > t} for the first passage of a simple random walk from 0 to +1.
inline double tau1_survival(Time t) {
  // tau_1 is odd, so P{tau_1 > 2j - 1} = P{tau_1 > 2j}.
  const Time j = t / 2 + (t % 2);
  return detail::tau1_survival_half(static_cast<double>(j));
}

/// P{-m <= S_t <= m - 1} = P{tau_m > t} for a simple random walk S, using
/// the symmetric-binomial Edgeworth term and a midpoint lattice correction.
/// Relative error is below 1e-7 for m >= 64 and at rounding level for
/// m >= 1000 throughout the bulk of the law.
inline double tau_survival_normal(std::uint64_t m, double t) {
  if (t < static_cast<double>(m)) return 1.0;
  const auto ti = static_cast<std::uint64_t>(t);
  const double dm = static_cast<double>(m);
  // Extreme lattice points in [-m, m-1] with the parity of t.
  const double lo = ((m % 2) == (ti % 2)) ? -dm : -dm + 1.0;
  const double hi = (((m + 1) % 2) == (ti % 2)) ? dm - 1.0 : dm - 2.0;
  const double sd = std::sqrt(t);
  const double a = (lo - 1.0) / sd;
  const double b = (hi + 1.0) / sd;
  const double base =
      0.5 * (std::erf(b * 0.70710678118654752440) -
             std::erf(a * 0.70710678118654752440));
  const double corr = (detail::std_normal_pdf(b) * (b * b * b - b) -
                       detail::std_normal_pdf(a) * (a * a * a - a)) /
                      (12.0 * t);
  return std::clamp(base + corr, 0.0, 1.0);
}

/// Exact tau_1 draw by inverting the closed-form survival function.
inline Time sample_tau1(RngStream& rng) {
  const double u = rng.uniform_open();
  // J = min{j >= 1 : a_j <= u}, tau_1 = 2J - 1.
  const auto& a = detail::tau1_survival_table();
  if (u >= a.back()) {
    // a is decreasing: find the first entry <= u.
    const auto it = std::lower_bound(a.begin() + 1, a.end(), u,
                                     [](double x, double v) { return x > v; });
    const auto j = static_cast<Time>(it - a.begin());
    return 2 * j - 1;
  }
  const double guess = 1.0 / (3.14159265358979323846 * u * u);
  if (guess > 0x1.0p61) return kTimeCap;
  // Past 2^50 the 1/j corrections are below double resolution (and j += 1
  // would stall beyond 2^53): j = guess - 1/4 solves the two-term series.
  if (guess > 0x1.0p50) return 2 * static_cast<Time>(std::ceil(guess - 0.25)) - 1;
  double j = std::max(std::ceil(guess - 0.25),
                      static_cast<double>(detail::kTauTableSize));
  while (detail::tau1_survival_asymptotic(j) > u) j += 1.0;
  while (j - 1.0 >= static_cast<double>(detail::kTauTableSize) &&
         detail::tau1_survival_asymptotic(j - 1.0) <= u)
    j -= 1.0;
  const double t = 2.0 * j - 1.0;
  return t >= static_cast<double>(kTimeCap) ? kTimeCap : static_cast<Time>(t);
}

enum class TauMethod {
  inversion,  // closed-form inversion (default)
  walk,       // walk step by step up to a cutoff, then invert the residual
};

struct TauOptions {
  TauMethod method = TauMethod::inversion;
  Time walk_cutoff = 1'000'000;
};

namespace detail {

// tau_m for large m: invert the window survival over t = m, m + 2, ...
inline Time sample_tau_large(std::uint64_t m, RngStream& rng) {
  const double u = rng.uniform_open();
  const double dm = static_cast<double>(m);
  if (dm * dm > 0x1.0p64) {
    // Even the median exceeds kTimeCap by a wide margin unless u ~ 1.
    const double e = boost::math::erf_inv(u);
    const double t0 = dm * dm / (2.0 * e * e);
    if (t0 > 0x1.0p62) return kTimeCap;
  }
  auto surv = [&](std::uint64_t i) {
    return tau_survival_normal(m, dm + 2.0 * static_cast<double>(i));
  };
  if (surv(0) <= u) return m;
  // Levy approximation P{tau_m > t} ~ erf(m / sqrt(2t)) gives the bracket.
  const double e = boost::math::erf_inv(u);
  const double t0 = std::max(dm, dm * dm / (2.0 * e * e));
  const double max_i = (0x1.0p62 - dm) / 2.0;
  std::uint64_t lo = 0;
  double hi_d = std::min(max_i, std::max(1.0, (2.0 * t0 - dm) / 2.0));
  auto hi = static_cast<std::uint64_t>(hi_d);
  while (surv(hi) > u) {
    lo = hi;
    if (hi_d >= max_i) return kTimeCap;
    hi_d = std::min(max_i, hi_d * 4.0);
    hi = static_cast<std::uint64_t>(hi_d);
  }
  // Tighten lo from the guess when possible.
  const auto mid0 = static_cast<std::uint64_t>(std::max(0.0, (t0 / 4.0 - dm) / 2.0));
  if (mid0 > lo && mid0 < hi && surv(mid0) > u) lo = mid0;
  // Invariant: surv(lo) > u >= surv(hi).
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (surv(mid) > u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const Time t = m + 2 * hi;
  return std::min(t, kTimeCap);
}

}  // namespace detail

/// Number of tau_1 summands below which tau_m is drawn as an exact sum.
inline constexpr std::uint64_t kTauExactSumLimit = 1024;

/// First-passage time of a simple random walk from 0 to level m >= 1.
inline Time sample_tau(std::uint64_t m, RngStream& rng,
                       const TauOptions& opts = {}) {
  detail::require(m >= 1, "sample_tau: level must be >= 1");
  if (m >= kTimeCap) return kTimeCap;
  if (opts.method == TauMethod::walk) {
    // Walk until level m or the cutoff; by the strong Markov property the
    // remainder is an independent passage over the missing distance.
    std::int64_t pos = 0;
    const auto target = static_cast<std::int64_t>(m);
    Time steps = 0;
    while (steps < opts.walk_cutoff) {
      pos += rng.sign();
      ++steps;
      if (pos == target) return steps;
    }
    const auto rest = static_cast<std::uint64_t>(target - pos);
    return sat_add(steps, sample_tau(rest, rng));
  }
  if (m <= kTauExactSumLimit) {
    Time total = 0;
    for (std::uint64_t i = 0; i < m && total < kTimeCap; ++i)
      total = sat_add(total, sample_tau1(rng));
    return total;
  }
  return detail::sample_tau_large(m, rng);
}

}  // namespace cmchain

#endif  // CMCHAIN_FIRST_PASSAGE_HPP_
