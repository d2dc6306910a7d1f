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

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "cmchain/estimators.hpp"
#include "cmchain/exact.hpp"
#include "cmchain/stopped_sums.hpp"

namespace cmchain {
namespace {

constexpr double kPiD = 3.14159265358979323846;

TEST(TauKPmf, SmallValues) {
  EXPECT_EQ(*tau_k_pmf(1, 1).exact, Rational(1, 2));
  EXPECT_EQ(*tau_k_pmf(1, 2).exact, Rational(1, 8));
  // Two returns need at least four steps.
  EXPECT_EQ(*tau_k_pmf(2, 1).exact, Rational(0));
  EXPECT_EQ(*tau_k_pmf(2, 2).exact, Rational(1, 4));
  EXPECT_THROW(tau_k_pmf(3, 1), InvalidArgument);
  EXPECT_THROW(tau_k_pmf(0, 1), InvalidArgument);
}

TEST(TauKPmf, MatchesPathEnumeration) {
  const auto paths = enumerate_return_times(4, 10);
  for (int k = 1; k <= 4; ++k) {
    for (int n = (k + 1) / 2; n <= 10; ++n) {
      EXPECT_EQ(*tau_k_pmf(k, n).exact, paths.at({k, 2 * n})) << k << " " << n;
      EXPECT_EQ(paths.at({k, 2 * n - 1}), Rational(0));
    }
  }
}

TEST(TauKPmf, MassAccounting) {
  double mass = 0.0;
  for (std::int64_t n = 1; n <= 10000; ++n) mass += tau_k_pmf(1, n).value;
  EXPECT_GT(mass, 1.0 - std::sqrt(2.0 / (kPiD * 1e4)) - 1e-3);
  EXPECT_LE(mass, 1.0);
}

TEST(TauKPmf, FloatingPointBranchContinuesExactBranch) {
  const auto exact = tau_k_pmf(10, kExactPmfLimit).value;
  const auto fp = 10.0 / (2.0 * kExactPmfLimit - 10) * detail::binomial_half_pdf(2 * kExactPmfLimit - 10, kExactPmfLimit);
  EXPECT_NEAR(exact / fp, 1.0, 1e-12);
  EXPECT_FALSE(tau_k_pmf(10, kExactPmfLimit + 1).exact.has_value());
}

TEST(FirstPassagePmf, ClosedForm) {
  EXPECT_EQ(*first_passage_pmf(1, 1).exact, Rational(1, 2));
  EXPECT_EQ(*first_passage_pmf(1, 3).exact, Rational(1, 8));
  EXPECT_EQ(*first_passage_pmf(2, 2).exact, Rational(1, 4));
  EXPECT_EQ(*first_passage_pmf(3, 1).exact, Rational(0));
  EXPECT_THROW(first_passage_pmf(2, 3), InvalidArgument);
}

// S_k + k =d tau^(k), S_k a sum of k first-passage times.
TEST(TauKPmf, StoppedSumIdentity) {
  for (std::int64_t k : {1, 5, 50}) {
    RngStream rng(1, static_cast<std::uint64_t>(k));
    std::vector<double> x(200000);
    for (auto& v : x) v = static_cast<double>(sample_tau(static_cast<std::uint64_t>(k), rng) + k);
    std::sort(x.begin(), x.end());
    // Reference cdf up to the sample's 99th percentile, by summing the pmf.
    const double top = x[static_cast<std::size_t>(0.99 * x.size())];
    double d = 0.0, cdf = 0.0;
    std::size_t i = 0;
    for (std::int64_t n = (k + 1) / 2; 2.0 * n <= top; ++n) {
      const double t = 2.0 * n;
      while (i < x.size() && x[i] < t) ++i;
      d = std::max(d, std::abs(cdf - double(i) / x.size()));  // left limit
      cdf += tau_k_pmf(k, n).value;
      while (i < x.size() && x[i] <= t) ++i;
      d = std::max(d, std::abs(cdf - double(i) / x.size()));
    }
    EXPECT_LT(d, 0.01) << k;
  }
}

TEST(LevyTail, Shape) {
  double prev = 1.0;
  for (double x = 0.01; x < 1e8; x *= 3) {
    const double v = levy_tail(x);
    ASSERT_LE(v, prev);
    prev = v;
  }
  EXPECT_LT(levy_tail(1e12), 1e-6);
  EXPECT_NEAR(levy_tail(1e4) / std::sqrt(2.0 / (kPiD * 1e4)), 1.0, 0.01);
  EXPECT_THROW(levy_tail(0.0), InvalidArgument);
  EXPECT_THROW(levy_tail(-1.0), InvalidArgument);
}

TEST(LevyTail, PassageSumTail) {
  // P{S_100 > 10^6} against the Levy tail at n / k^2.
  RngStream rng(2, 0);
  const int reps = 1000000;
  int beyond = 0;
  for (int i = 0; i < reps; ++i) beyond += sample_tau(100, rng) > 1000000;
  EXPECT_NEAR(double(beyond) / reps / levy_tail(1e6 / 1e4), 1.0, 0.05);
}

TEST(StoppedSum, ConstantOneIsSingleIncrement) {
  StoppedSumSpec spec;
  spec.stopping = StoppedSumSpec::Stopping::constant;
  spec.k = 1;
  RngStream s(3, 0), i(3, 1), ref(3, 2);
  std::vector<double> a, b;
  for (int n = 0; n < 100000; ++n) {
    a.push_back(static_cast<double>(sample_stopped_sum(spec, s, i)));
    b.push_back(static_cast<double>(sample_tau1(ref)));
  }
  EXPECT_LT(ks_distance(a, b), ks_critical(a.size(), b.size(), 0.001));
}

TEST(StoppedSum, HeavyStoppingExponent) {
  StoppedSumSpec spec;  // first-passage increments and stopping: 1/4
  RngStream s(4, 0), i(4, 1);
  std::vector<double> x(1000000);
  for (auto& v : x) v = static_cast<double>(sample_stopped_sum(spec, s, i));
  const auto fit = loglog_tail(x, 1e3, 1e7, 9);
  EXPECT_NEAR(fit.exponent, 0.25, 0.04);
}

TEST(StoppedSum, ParetoIncrementsUseTheirIndex) {
  StoppedSumSpec spec;
  spec.increment = StoppedSumSpec::Increment::pareto;
  spec.alpha = 0.5;
  spec.stopping = StoppedSumSpec::Stopping::pareto;
  spec.beta = 0.5;
  RngStream s(5, 0), i(5, 1);
  std::vector<double> x(200000);
  for (auto& v : x) v = static_cast<double>(sample_stopped_sum(spec, s, i));
  EXPECT_NEAR(loglog_tail(x, 1e3, 1e7, 9).exponent, 0.25, 0.05);
}

TEST(StoppedSum, FiniteMeanStoppingMultipliesTail) {
  StoppedSumSpec spec;
  spec.stopping = StoppedSumSpec::Stopping::geometric;
  spec.p = 0.5;
  EXPECT_DOUBLE_EQ(spec.stopping_mean(), 2.0);
  RngStream s(6, 0), i(6, 1);
  const int reps = 2000000;
  int beyond = 0;
  for (int n = 0; n < reps; ++n) beyond += sample_stopped_sum(spec, s, i) > 100000;
  EXPECT_NEAR(double(beyond) / reps / tau1_survival(100000), 2.0, 0.3);
}

TEST(StoppedSum, Validation) {
  StoppedSumSpec spec;
  spec.stopping = StoppedSumSpec::Stopping::pareto;
  spec.beta = 1.5;
  RngStream s(7, 0), i(7, 1);
  EXPECT_THROW(sample_stopped_sum(spec, s, i), InvalidArgument);
}

TEST(AsympEquiv, Examples) {
  const std::vector<double> g{1, 2, 3, 4}, h{0.5, 7, 1, 0.1};
  EXPECT_EQ(asymp_equiv_check(g, g, h, 0.0).weighted, 0.0);
  std::vector<double> f(g);
  for (double& v : f) v *= 1.01;
  const auto r = asymp_equiv_check(f, g, h, 0.01 + 1e-12);
  EXPECT_TRUE(r.within_bound);
  EXPECT_LE(r.weighted, 0.01 + 1e-12);
  EXPECT_THROW(asymp_equiv_check({}, {}, {}, 0.1), InvalidArgument);
}

TEST(AsympEquiv, PassageSumsMatchLevyTailInMiddleRegime) {
  // f = P{S_k > n} by Monte Carlo, g = levy_tail(n / k^2), over
  // k in [n^(1/2) g, n^(1/2) / g], g = n^(-1/8), at n = 10^6.
  const double n = 1e6;
  const double gg = std::pow(n, -0.125);
  std::vector<double> f, g, h;
  RngStream rng(8, 0);
  for (double k = std::ceil(std::sqrt(n) * gg); k <= std::sqrt(n) / gg; k *= 1.5) {
    const auto kk = static_cast<std::uint64_t>(k);
    const int reps = 5000;
    int beyond = 0;
    for (int i = 0; i < reps; ++i) beyond += sample_tau(kk, rng) > n;
    f.push_back(double(beyond) / reps);
    g.push_back(levy_tail(n / (double(kk) * double(kk))));
    h.push_back(std::pow(double(kk), -1.5));
  }
  EXPECT_LT(asymp_equiv_check(f, g, h, 0.1).weighted, 0.1);
}

TEST(ThreeRegime, PartsSumToTailAndOuterPartsShrink) {
  double prev_lo = 1e9, prev_hi = 1e9;
  for (std::int64_t n : {10000, 1000000, 100000000}) {
    const auto r = three_regime_diagnostics(n);
    EXPECT_GT(r.middle, 0.0);
    const double lo = r.lower / r.middle, hi = r.upper / r.middle;
    EXPECT_LT(lo, prev_lo);
    EXPECT_LT(hi, prev_hi);
    prev_lo = lo;
    prev_hi = hi;
  }
  // Total against direct Monte Carlo of S_tau at n = 10^4.
  StoppedSumSpec spec;
  RngStream s(9, 0), i(9, 1);
  const int reps = 1000000;
  int beyond = 0;
  for (int k = 0; k < reps; ++k) beyond += sample_stopped_sum(spec, s, i) > 10000;
  const double p = three_regime_diagnostics(10000).total();
  EXPECT_NEAR(double(beyond) / reps, p, 4 * std::sqrt(p / reps));
}

TEST(ThreeRegime, ConstantSettles) {
  std::vector<double> c;
  for (std::int64_t n : {100000, 1000000, 10000000})
    c.push_back(three_regime_diagnostics(n).total() * std::pow(double(n), 0.25));
  EXPECT_LT(*std::max_element(c.begin(), c.end()) / *std::min_element(c.begin(), c.end()), 1.3);
}

}  // namespace
}  // namespace cmchain
