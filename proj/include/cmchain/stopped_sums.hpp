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

#ifndef CMCHAIN_STOPPED_SUMS_HPP_
#define CMCHAIN_STOPPED_SUMS_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "cmchain/error.hpp"
#include "cmchain/first_passage.hpp"
#include "cmchain/limit.hpp"
#include "cmchain/rng.hpp"

namespace cmchain {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Largest k and n for which pmf values are produced as exact rationals.
inline constexpr std::int64_t kExactPmfLimit = 1000;

struct PmfValue {
  double value = 0.0;
  std::optional<Rational> exact;  // set below kExactPmfLimit
};

namespace detail {

inline BigInt binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

inline Rational pow2_inv(std::int64_t e) {
  BigInt d = 1;
  d <<= static_cast<unsigned>(e);
  return Rational(BigInt(1), d);
}

// P{Bin(n, 1/2) = k} in floating point, relative error ~1e-14.
inline double binomial_half_pdf(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0.0;
  if (n == 0) return 1.0;
  boost::math::binomial_distribution<> b(static_cast<double>(n), 0.5);
  return boost::math::pdf(b, static_cast<double>(k));
}

}  // namespace detail

/// P{tau_m = t} for the first passage of a simple random walk to level m:
/// (m / t) C(t, (t + m) / 2) 2^-t. Throws when t and m differ in parity.
inline PmfValue first_passage_pmf(std::int64_t m, std::int64_t t) {
  detail::require(m >= 1 && t >= 1, "first_passage_pmf: m and t must be >= 1");
  detail::require((t - m) % 2 == 0,
                  "first_passage_pmf: tau_m has the parity of m");
  PmfValue out;
  if (t < m) {
    out.exact = Rational(0);
    return out;
  }
  const std::int64_t up = (t + m) / 2;
  if (t <= 2 * kExactPmfLimit) {
    out.exact = Rational(BigInt(m), BigInt(t)) * Rational(detail::binomial(t, up)) *
                detail::pow2_inv(t);
    out.value = static_cast<double>(*out.exact);
  } else {
    out.value = static_cast<double>(m) / static_cast<double>(t) *
                detail::binomial_half_pdf(t, up);
  }
  return out;
}

/// P{tau^(k) = 2n}, tau^(k) the time of the k-th return of a simple random
/// walk to its start: (k / (2n - k)) C(2n - k, n) 2^-(2n - k).
///
/// tau^(k) is supported on {2k, 2k + 2, ...}; for k <= 2n < 2k the value is 0
/// (the closed form degenerates to 0/0 at 2n = k). 2n < k is rejected.
/// Exact rationals for k, n <= kExactPmfLimit, floating point beyond.
inline PmfValue tau_k_pmf(std::int64_t k, std::int64_t n) {
  detail::require(k >= 1 && n >= 1, "tau_k_pmf: k and n must be >= 1");
  detail::require(2 * n >= k, "tau_k_pmf: need 2n >= k");
  PmfValue out;
  if (n < k) {
    out.exact = Rational(0);
    return out;
  }
  const std::int64_t len = 2 * n - k;
  if (k <= kExactPmfLimit && n <= kExactPmfLimit) {
    out.exact = Rational(BigInt(k), BigInt(len)) *
                Rational(detail::binomial(len, n)) * detail::pow2_inv(len);
    out.value = static_cast<double>(*out.exact);
  } else {
    out.value = static_cast<double>(k) / static_cast<double>(len) *
                detail::binomial_half_pdf(len, n);
  }
  return out;
}

/// P{tau_m > t} from the binomial cdf (slow for huge t; reference values).
inline double tau_survival_exact(std::int64_t m, std::int64_t t) {
  if (t < m) return 1.0;
  // -m <= 2K - t <= m - 1  <=>  ceil((t - m) / 2) <= K <= floor((t + m - 1) / 2)
  const std::int64_t klo = (t - m + 1) / 2;
  const std::int64_t khi = std::min<std::int64_t>((t + m - 1) / 2, t);
  boost::math::binomial_distribution<> b(static_cast<double>(t), 0.5);
  const double upper = boost::math::cdf(b, static_cast<double>(khi));
  const double lower = klo > 0 ? boost::math::cdf(b, static_cast<double>(klo - 1)) : 0.0;
  return upper - lower;
}

/// P{tau_m > t}: exact binomial below m = 64, corrected normal above.
inline double tau_survival(std::int64_t m, std::int64_t t) {
  if (m == 1) return tau1_survival(static_cast<Time>(t));
  if (m < 64) return tau_survival_exact(m, t);
  return tau_survival_normal(static_cast<std::uint64_t>(m), static_cast<double>(t));
}

/// Upper tail of the Levy law with location 0 and scale c:
/// P{X > x} = erf(sqrt(c / 2x)) (the cdf is erfc(sqrt(c / 2x))).
inline double levy_tail(double x, double scale = 1.0) {
  detail::require(x > 0.0, "levy_tail: x must be positive");
  detail::require(scale > 0.0, "levy_tail: scale must be positive");
  return std::erf(std::sqrt(scale / (2.0 * x)));
}

/// Law of a randomly stopped sum S_tau = xi_1 + ... + xi_tau.
struct StoppedSumSpec {
  enum class Increment {
    first_passage,  // xi = tau_1 (time from 1 to 0), tail index 1/2
    pareto,         // xi = floor(U^(-1/alpha)), P{xi > n} = (n + 1)^-alpha
  };
  enum class Stopping {
    constant,       // tau = k
    first_passage,  // tau = tau_1, P{tau = n} ~ c n^(-3/2)
    pareto,         // tau = floor(U^(-1/beta))
    geometric,      // P{tau = n} = (1 - p)^(n-1) p, n >= 1
  };

  Increment increment = Increment::first_passage;
  double alpha = 0.5;
  Stopping stopping = Stopping::first_passage;
  double beta = 0.5;
  double p = 0.5;
  std::uint64_t k = 1;

  void validate() const {
    if (increment == Increment::pareto)
      detail::require(alpha > 0.0 && alpha < 1.0, "increment alpha must be in (0, 1)");
    if (stopping == Stopping::pareto)
      detail::require(beta > 0.0 && beta < 1.0, "stopping beta must be in (0, 1)");
    if (stopping == Stopping::geometric)
      detail::require(p > 0.0 && p <= 1.0, "geometric p must be in (0, 1]");
    if (stopping == Stopping::constant) detail::require(k >= 1, "constant k must be >= 1");
  }

  /// Tail index of the increments.
  double increment_index() const {
    return increment == Increment::first_passage ? 0.5 : alpha;
  }
  /// Tail index of the stopping variable (0 when it has a finite mean).
  double stopping_index() const {
    switch (stopping) {
      case Stopping::first_passage: return 0.5;
      case Stopping::pareto: return beta;
      default: return 0.0;
    }
  }
  /// E tau, infinite for the heavy-tailed stopping laws.
  double stopping_mean() const {
    switch (stopping) {
      case Stopping::constant: return static_cast<double>(k);
      case Stopping::geometric: return 1.0 / p;
      default: return std::numeric_limits<double>::infinity();
    }
  }
};

/// Number of Pareto summands above which the sum is drawn from its stable
/// limit k^(1/alpha) (Gamma(1 - alpha))^(1/alpha) D, D with Laplace
/// exp(-s^alpha). First-passage increments never need this: their k-fold
/// sum is tau_k exactly.
inline constexpr std::uint64_t kParetoExactSumLimit = std::uint64_t{1} << 22;

inline Time sample_stopping(const StoppedSumSpec& spec, RngStream& rng) {
  using S = StoppedSumSpec::Stopping;
  switch (spec.stopping) {
    case S::constant:
      return spec.k;
    case S::first_passage:
      return sample_tau1(rng);
    case S::pareto: {
      const double v = std::floor(std::pow(rng.uniform_open(), -1.0 / spec.beta));
      return v >= 0x1.0p62 ? kTimeCap : static_cast<Time>(v);
    }
    case S::geometric: {
      if (spec.p >= 1.0) return 1;
      const double v =
          1.0 + std::floor(std::log(rng.uniform_open()) / std::log1p(-spec.p));
      return v >= 0x1.0p62 ? kTimeCap : static_cast<Time>(v);
    }
  }
  return 1;
}

/// Sum of k independent increments.
inline Time sample_increment_sum(const StoppedSumSpec& spec, Time k,
                                 RngStream& rng) {
  if (k == 0) return 0;
  if (spec.increment == StoppedSumSpec::Increment::first_passage)
    return sample_tau(k, rng);  // tau_1 + ... + tau_1 (k terms) =d tau_k
  const double a = spec.alpha;
  if (k > kParetoExactSumLimit) {
    const double c = std::pow(std::tgamma(1.0 - a), 1.0 / a);
    const double v = std::pow(static_cast<double>(k), 1.0 / a) * c *
                     sample_stable(subordinator_spec(a), rng);
    return v >= 0x1.0p62 ? kTimeCap : static_cast<Time>(v);
  }
  Time total = 0;
  for (Time i = 0; i < k && total < kTimeCap; ++i) {
    const double v = std::floor(std::pow(rng.uniform_open(), -1.0 / a));
    total = sat_add(total, v >= 0x1.0p62 ? kTimeCap : static_cast<Time>(v));
  }
  return total;
}

/// One draw of S_tau. The stopping variable and the increments use distinct
/// streams, so they are independent by construction.
inline Time sample_stopped_sum(const StoppedSumSpec& spec, RngStream& stop_rng,
                               RngStream& inc_rng) {
  spec.validate();
  return sample_increment_sum(spec, sample_stopping(spec, stop_rng), inc_rng);
}

struct AsympEquivResult {
  bool within_bound = false;
  double max_pointwise = 0.0;  // max |f / g - 1| over the window
  double weighted = 0.0;       // |sum f h / sum g h - 1|
};

/// Compares weighted sums of two positive tabulations over a common window.
/// If |f - g| <= eps g pointwise, then |sum f h - sum g h| <= eps sum g h for
/// any h >= 0; within_bound reports weighted <= bound.
inline AsympEquivResult asymp_equiv_check(const std::vector<double>& f,
                                          const std::vector<double>& g,
                                          const std::vector<double>& h,
                                          double bound) {
  detail::require(!f.empty(), "asymp_equiv_check: empty window");
  detail::require(f.size() == g.size() && g.size() == h.size(),
                  "asymp_equiv_check: tabulations differ in length");
  AsympEquivResult r;
  double sf = 0.0, sg = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    detail::require(g[i] > 0.0 && f[i] >= 0.0 && h[i] >= 0.0,
                    "asymp_equiv_check: tabulations must be positive");
    r.max_pointwise = std::max(r.max_pointwise, std::abs(f[i] / g[i] - 1.0));
    sf += f[i] * h[i];
    sg += g[i] * h[i];
  }
  r.weighted = sg > 0.0 ? std::abs(sf / sg - 1.0) : 0.0;
  r.within_bound = r.weighted <= bound;
  return r;
}

/// Split of P{S_tau > n} = sum_k P{tau = k} P{S_k > n} into the ranges
/// k < g n^a, g n^a <= k <= n^a / g, k > n^a / g (a the increment index).
struct ThreeRegime {
  double lower = 0.0;
  double middle = 0.0;
  double upper = 0.0;
  double total() const { return lower + middle + upper; }
};

/// Computed by direct summation for first-passage increments and
/// first-passage stopping (the case with closed-form pieces), g = n^-g_exp.
inline ThreeRegime three_regime_diagnostics(std::int64_t n, double g_exp = 0.125) {
  detail::require(n >= 1, "three_regime_diagnostics: n must be >= 1");
  const double g = std::pow(static_cast<double>(n), -g_exp);
  const double root = std::sqrt(static_cast<double>(n));
  const double k_lo = g * root;
  const double k_hi = root / g;
  ThreeRegime r;
  // tau = tau_1 is odd: P{tau_1 = 2j - 1} = a_{j-1} - a_j.
  double prev = 1.0;
  std::int64_t j = 1;
  for (;; ++j) {
    const double aj = detail::tau1_survival_half(static_cast<double>(j));
    const double p = prev - aj;
    prev = aj;
    const std::int64_t k = 2 * j - 1;
    const double s = tau_survival(k, n);
    const double c = p * s;
    const auto dk = static_cast<double>(k);
    if (dk < k_lo) {
      r.lower += c;
    } else if (dk <= k_hi) {
      r.middle += c;
    } else {
      r.upper += c;
    }
    // Beyond 40 standard deviations P{S_k > n} is 1 to double precision.
    if (dk > k_hi && dk > 40.0 * root) break;
  }
  r.upper += prev;  // every remaining k has P{S_k > n} = 1
  return r;
}

}  // namespace cmchain

#endif  // CMCHAIN_STOPPED_SUMS_HPP_
