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

#include <cmath>

#include <gtest/gtest.h>

#include "cmchain/estimators.hpp"
#include "cmchain/renewal.hpp"

namespace cmchain {
namespace {

// Continuous Pareto with P{X > x} = x^-alpha, x >= 1.
std::vector<double> pareto(double alpha, std::size_t n, std::uint64_t stream) {
  RngStream rng(42, stream);
  std::vector<double> x(n);
  for (auto& v : x) v = std::pow(rng.uniform_open(), -1.0 / alpha);
  return x;
}

TEST(Hill, ExactParetoHalf) {
  const auto x = pareto(0.5, 1000000, 0);
  const auto h = hill(x, 10000);
  EXPECT_GE(h.exponent, 0.47);
  EXPECT_LE(h.exponent, 0.53);
  EXPECT_EQ(h.method, "hill");
  EXPECT_FALSE(h.diagnostics.empty());
}

TEST(Hill, UnbiasedAcrossK) {
  const auto x = pareto(0.5, 1000000, 1);
  for (std::size_t k : {100, 1000, 10000}) {
    const auto h = hill(x, k);
    EXPECT_LT(std::abs(h.exponent - 0.5), 2.5 * h.std_err) << k;
  }
}

TEST(Hill, RejectsDegenerateInput) {
  EXPECT_THROW(hill(std::vector<double>(100, 3.0), 10), InvalidArgument);
  EXPECT_THROW(hill({1.0, 2.0}, 5), InvalidArgument);
  EXPECT_THROW(hill({1.0, -2.0, 3.0}, 1), InvalidArgument);
}

TEST(Hill, DcmCycleDurations) {
  RngStream rng(7, 0);
  std::vector<double> d(1000000);
  for (auto& v : d) v = static_cast<double>(cycle_sampler_dcm(rng).cycle.duration);
  const auto h = hill(d, 1000);
  EXPECT_GE(h.exponent, 0.20);
  EXPECT_LE(h.exponent, 0.30);
}

TEST(LoglogTail, ParetoSlope) {
  const auto x = pareto(0.75, 1000000, 2);
  const auto t = loglog_tail(x, 10.0, 1e4, 9);
  EXPECT_NEAR(t.exponent, 0.75, 3 * t.std_err + 1e-3);
  EXPECT_THROW(loglog_tail(x, 10.0, 5.0), InvalidArgument);
}

TEST(ScalingExponent, ExactPowerLaw) {
  std::vector<double> n, s;
  for (double v = 1e2; v <= 1e8; v *= 10) {
    n.push_back(v);
    s.push_back(3.5 * std::pow(v, 0.3125));
  }
  const auto fit = scaling_exponent(s, n);
  EXPECT_NEAR(fit.exponent, 0.3125, 1e-12);
  EXPECT_GT(fit.std_err, 0.0);
}

TEST(ScalingExponent, InvariantUnderConstantMultiple) {
  RngStream rng(3, 0);
  std::vector<double> n, s, se;
  for (double v = 1e3; v <= 1e7; v *= 4) {
    n.push_back(v);
    s.push_back(std::pow(v, 0.25) * (1.0 + 0.01 * rng.normal()));
    se.push_back(0.01 * s.back());
  }
  const auto a = scaling_exponent(s, n, se);
  for (auto& v : s) v *= 17.0;
  for (auto& v : se) v *= 17.0;
  const auto b = scaling_exponent(s, n, se);
  EXPECT_NEAR(a.exponent, b.exponent, 1e-12);
  EXPECT_NEAR(a.std_err, b.std_err, 1e-12);
}

TEST(ScalingExponent, GridChecks) {
  EXPECT_THROW(scaling_exponent({1, 2, 3, 4}, {1, 2, 3, 4}), InvalidArgument);
  EXPECT_THROW(scaling_exponent({1, 2, 3}, {1, 100, 10000}), InvalidArgument);
  EXPECT_THROW(scaling_exponent({1, 2, 0, 4}, {1, 10, 100, 1000}), InvalidArgument);
}

TEST(Ks, MetricProperties) {
  const auto a = pareto(1.0, 5000, 4), b = pareto(1.0, 3000, 5), c = pareto(2.0, 4000, 6);
  EXPECT_EQ(ks_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(ks_distance(a, b), ks_distance(b, a));
  EXPECT_LE(ks_distance(a, c), ks_distance(a, b) + ks_distance(b, c) + 1e-15);
  EXPECT_LE(ks_distance(a, c), 1.0);
}

TEST(Ks, HandComputedTables) {
  const auto a = EcdfTable::from_samples({1, 2, 3, 4});
  const auto b = EcdfTable::from_atoms({{2.5, 1.0}});
  EXPECT_DOUBLE_EQ(ks_distance(a, b), 0.5);
  EXPECT_DOUBLE_EQ(ks_distance(EcdfTable::from_samples({0, 0, 1}), EcdfTable::from_atoms({{0, 0.5}, {1, 0.5}})),
                   1.0 / 6.0);
}

TEST(Ks, AgainstAtomicReferenceUsesLeftLimits) {
  // Sample equal to a point mass at 0: zero distance only with the left limit.
  const auto a = EcdfTable::from_samples({0, 0, 0});
  auto cdf = [](double x) { return x >= 0 ? 1.0 : 0.0; };
  auto left = [](double x) { return x > 0 ? 1.0 : 0.0; };
  EXPECT_EQ(ks_distance(a, cdf, left), 0.0);
}

TEST(Ks, UniformAgainstCdf) {
  RngStream rng(8, 0);
  std::vector<double> u(100000);
  for (auto& v : u) v = rng.uniform_open();
  EXPECT_LT(ks_distance(EcdfTable::from_samples(u), [](double x) { return std::clamp(x, 0.0, 1.0); }),
            1.63 / std::sqrt(1e5));
}

TEST(MedianScale, RecoversFactor) {
  const auto a = pareto(1.0, 10001, 9);
  std::vector<double> b(a);
  for (auto& v : b) v *= -2.5;
  EXPECT_DOUBLE_EQ(median_scale(a, b), 2.5);
}

TEST(Independence, DetectsDependence) {
  RngStream rng(10, 0), perm(10, 1);
  std::vector<double> x(5000), y(5000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = x[i] * x[i];  // uncorrelated but dependent
  }
  const auto d = independence_diag(x, y, perm, 199);
  EXPECT_LT(std::abs(d.pearson), 0.1);
  EXPECT_LT(d.p_value, 0.01);
  EXPECT_GT(d.spearman_abs, 0.9);
  const auto same = independence_diag(x, x, perm, 199);
  EXPECT_NEAR(same.spearman, 1.0, 1e-12);
  EXPECT_NEAR(same.distance_correlation, 1.0, 1e-9);
}

TEST(Independence, IndependentSamplesPass) {
  RngStream rng(11, 0), perm(11, 1);
  std::vector<double> x(5000), y(5000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = rng.uniform_open();
  }
  const auto d = independence_diag(x, y, perm, 199);
  EXPECT_GT(d.p_value, 0.001);
  EXPECT_LT(d.rank_statistic, 5.0 / std::sqrt(5000.0));
  EXPECT_LT(d.distance_correlation, 0.1);
  EXPECT_THROW(independence_diag({1, 2}, {1, 2}, perm), InvalidArgument);
}

TEST(ChiSquare, HandComputed) {
  // (60 - 50)^2 / 50 + (40 - 50)^2 / 50 = 4, one degree of freedom.
  const auto c = chi_square({60, 40}, {0.5, 0.5});
  EXPECT_DOUBLE_EQ(c.statistic, 4.0);
  EXPECT_EQ(c.dof, 1);
  EXPECT_NEAR(c.p_value, 0.0455003, 1e-6);
  const auto impossible = chi_square({10, 5}, {1.0, 0.0});
  EXPECT_EQ(impossible.p_value, 0.0);
}

TEST(Basic, SampleStatistics) {
  const std::vector<double> x{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(mean(x), 2.5);
  EXPECT_DOUBLE_EQ(median(x), 2.5);
  EXPECT_DOUBLE_EQ(quantile(x, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(x, 1.0), 4.0);
  EXPECT_EQ(ranks({10, 20, 20, 5}), (std::vector<double>{2, 3.5, 3.5, 1}));
  EXPECT_NEAR(lag1_correlation({1, 2, 3, 4, 5}), 1.0, 1e-12);
  EXPECT_NEAR(mean_stderr({1, 2, 3, 4}), std::sqrt(5.0 / 3.0 / 4.0), 1e-12);
  EXPECT_DOUBLE_EQ(survival_sorted({1, 2, 3, 4}, 2.0), 0.5);
}

}  // namespace
}  // namespace cmchain
