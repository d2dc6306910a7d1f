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
#include <map>

#include <gtest/gtest.h>

#include "cmchain/chain.hpp"
#include "cmchain/estimators.hpp"
#include "cmchain/exact.hpp"
#include "cmchain/limit.hpp"
#include "cmchain/renewal.hpp"

namespace cmchain {
namespace {

constexpr double kPiD = 3.14159265358979323846;

double tail_fraction(const std::vector<double>& x, double n) {
  double c = 0;
  for (double v : x) c += v > n;
  return c / static_cast<double>(x.size());
}

TEST(SampleJ2, Pm1DurationIsFirstPassage) {
  RngStream rng(1, 0);
  const auto jump = JumpDistribution::pm1();
  std::vector<double> j;
  for (int i = 0; i < 4000000; ++i) {
    const auto c = sample_j2(jump, rng);
    ASSERT_EQ(std::abs(c.displacement), 1);
    j.push_back(static_cast<double>(c.duration));
  }
  EXPECT_NEAR(tail_fraction(j, 1e4) / std::sqrt(2.0 / (kPiD * 1e4)), 1.0, 0.1);
}

TEST(SampleJ2, ZeroJumpAddsOneStep) {
  RngStream rng(2, 0);
  const auto jump = JumpDistribution::lattice({{0, 1.0}});
  std::vector<double> j;
  for (int i = 0; i < 200000; ++i) {
    const auto c = sample_j2(jump, rng);
    ASSERT_EQ(c.displacement, 0);
    ASSERT_GE(c.duration, 2u);
    ASSERT_EQ(c.duration % 2, 0u);
    j.push_back(static_cast<double>(c.duration));
  }
  // j - 1 = tau_1: P{j = 2} = 1/2.
  const double twos = 1.0 - tail_fraction(j, 2.0);
  EXPECT_NEAR(twos, 0.5, 4 * std::sqrt(0.25 / 200000));
}

TEST(SampleJ2, TripleJumpTripleTailConstant) {
  RngStream rng(3, 0);
  const auto jump = JumpDistribution::lattice({{3, 0.5}, {-3, 0.5}});
  std::vector<double> j;
  for (int i = 0; i < 2000000; ++i) j.push_back(static_cast<double>(sample_j2(jump, rng).duration));
  EXPECT_NEAR(tail_fraction(j, 1e4) / (3 * std::sqrt(2.0 / (kPiD * 1e4))), 1.0, 0.15);
}

// The two-agent meeting interval straight from the chain: time until the
// cat lands on the mouse again, after the first common step.
TEST(SampleJ2, AgreesWithDirectTwoWalkerChain) {
  const auto jump = JumpDistribution::lattice({{3, 0.25}, {-1, 0.5}, {0, 0.25}});
  const auto config = ChainConfig::general(jump, 21);
  std::vector<double> direct, embedded;
  RngStream rng(4, 0);
  for (std::uint64_t r = 0; r < 20000; ++r) {
    AgentStreams s(config, r);
    ChainState st = ChainState::origin(2);
    do {
      st = step(st, config, s);
    } while (st.positions[0] != st.positions[1] && st.time < 4000);
    direct.push_back(static_cast<double>(std::min<Time>(st.time, 4000)));
    embedded.push_back(static_cast<double>(std::min<Time>(sample_j2(jump, rng).duration, 4000)));
  }
  EXPECT_LT(ks_distance(direct, embedded), ks_critical(direct.size(), embedded.size(), 0.001));
}

TEST(ZTransition, RowsAndEntries) {
  const auto p = z_transition_matrix();
  for (const auto& row : p) EXPECT_EQ(row[0] + row[1] + row[2], Rational(1));
  EXPECT_EQ(p[0][1], Rational(3, 8));
  EXPECT_EQ(p[0][0], Rational(1, 4));
  EXPECT_EQ(p[1][1], Rational(5, 8));
  EXPECT_EQ(p, exact_pz());
}

TEST(CycleSamplerDcm, UnitCycleProbability) {
  RngStream rng(5, 0);
  const int k = 1000000;
  int ones = 0;
  for (int i = 0; i < k; ++i) ones += cycle_sampler_dcm(rng).cycle.duration == 1;
  EXPECT_LT(std::abs(ones - k / 4.0), 3 * std::sqrt(k * 0.1875));
}

TEST(CycleSamplerDcm, EpochCountIsGeometric) {
  RngStream rng(6, 0);
  const int k = 1000000;
  std::vector<double> counts(11, 0.0), probs(11, 0.0);
  std::vector<double> y;
  y.reserve(k);
  for (int i = 0; i < k; ++i) {
    const auto c = cycle_sampler_dcm(rng);
    counts[static_cast<std::size_t>(std::min(c.nu, 11) - 1)] += 1;
    y.push_back(static_cast<double>(c.cycle.displacement));
  }
  for (int j = 1; j <= 10; ++j) probs[static_cast<std::size_t>(j - 1)] = std::pow(0.75, j - 1) * 0.25;
  probs[10] = std::pow(0.75, 10);
  EXPECT_GT(chi_square(counts, probs).p_value, 1e-3);
  EXPECT_LT(std::abs(mean(y)), 4 * mean_stderr(y));
}

TEST(CycleSamplerDcm, CyclesAreUncorrelated) {
  RngStream rng(7, 0);
  const int k = 1000000;
  std::vector<double> j, y;
  for (int i = 0; i < k; ++i) {
    const auto c = cycle_sampler_dcm(rng).cycle;
    // Ranks keep the heavy tail from dominating the correlation.
    j.push_back(static_cast<double>(c.duration));
    y.push_back(static_cast<double>(c.displacement));
  }
  EXPECT_LT(std::abs(lag1_correlation(ranks(j))), 4.0 / std::sqrt(k));
  EXPECT_LT(std::abs(lag1_correlation(ranks(y))), 4.0 / std::sqrt(k));
}

TEST(CycleSamplerDcm, TailRatioToFirstEpoch) {
  RngStream rng(8, 0);
  const int k = 1000000;
  std::vector<double> j, t1;
  for (int i = 0; i < k; ++i) {
    const auto c = cycle_sampler_dcm(rng);
    j.push_back(static_cast<double>(c.cycle.duration));
    t1.push_back(static_cast<double>(c.first_epoch));
  }
  std::vector<double> scaled;
  for (double n : {1e2, 1e3, 1e4, 1e5}) scaled.push_back(tail_fraction(j, n) * std::pow(n, 0.25));
  const double lo = *std::min_element(scaled.begin(), scaled.end());
  const double hi = *std::max_element(scaled.begin(), scaled.end());
  EXPECT_LT(hi / lo, 1.4 / 0.7);
  EXPECT_NEAR(tail_fraction(j, 1e4) / tail_fraction(t1, 1e4), 4.0, 1.0);
}

// Cycles against the three-agent chain run step by step.
TEST(CycleSamplerDcm, AgreesWithDirectChain) {
  const auto config = ChainConfig::standard(3, 99);
  const Time cap = 3000;
  std::vector<double> direct_j, direct_y, emb_j, emb_y;
  RngStream rng(9, 0);
  for (std::uint64_t r = 0; r < 20000; ++r) {
    AgentStreams s(config, r);
    ChainState st = ChainState::origin(3);
    do {
      st = step(st, config, s);
    } while (!st.all_equal() && st.time < cap);
    direct_j.push_back(static_cast<double>(st.time));
    direct_y.push_back(st.all_equal() ? static_cast<double>(st.last()) : 1e9);
    const auto c = cycle_sampler_dcm(rng).cycle;
    emb_j.push_back(static_cast<double>(std::min(c.duration, cap)));
    emb_y.push_back(c.duration < cap ? static_cast<double>(c.displacement) : 1e9);
  }
  EXPECT_LT(ks_distance(direct_j, emb_j), ks_critical(20000, 20000, 0.001));
  EXPECT_LT(ks_distance(direct_y, emb_y), ks_critical(20000, 20000, 0.001));
}

TEST(MeetingProcess, EmptyBeforeFirstMeeting) {
  const auto config = ChainConfig::standard(2, 1);
  for (std::uint64_t s = 0; s < 100; ++s) {
    RngStream rng(s, 0);
    RngStream probe(s, 0);
    const auto first = sample_cycle(config, probe).duration;
    const auto epochs = meeting_process(config, first - 1, rng);
    EXPECT_TRUE(epochs.empty());
  }
}

TEST(MeetingProcess, CmMeetingTimesScaleLikeLevy) {
  // T_k / k^2 against the Levy(1) law, P{X <= x} = erfc(sqrt(1 / 2x)).
  const auto config = ChainConfig::standard(2, 1);
  const int k = 10000;
  std::vector<double> x;
  for (std::uint64_t r = 0; r < 10000; ++r) {
    RngStream rng(123, r);
    Time t = 0;
    for (int i = 0; i < k; ++i) t = sat_add(t, sample_cycle(config, rng).duration);
    x.push_back(static_cast<double>(t) / (double(k) * k));
  }
  const double d = ks_distance(EcdfTable::from_samples(x),
                               [](double v) { return std::erfc(std::sqrt(0.5 / v)); });
  EXPECT_LT(d, 0.02);
}

TEST(MeetingProcess, DcmMeetingTimesScaleLikeQuarterStable) {
  const auto config = ChainConfig::standard(3, 1);
  const int k = 300;
  std::vector<double> x, ref;
  RngStream ref_rng(77, 0);
  for (std::uint64_t r = 0; r < 10000; ++r) {
    RngStream rng(321, r);
    Time t = 0;
    for (int i = 0; i < k; ++i) t = sat_add(t, sample_cycle(config, rng).duration);
    x.push_back(static_cast<double>(t) / std::pow(double(k), 4));
    ref.push_back(sample_stable(subordinator_spec(0.25), ref_rng));
  }
  const double c = median_scale(x, ref);
  for (double& v : x) v *= c;
  EXPECT_LT(ks_distance(x, ref), 0.05);
}

TEST(MeetingProcess, EpochsMatchCtrwPath) {
  const auto config = ChainConfig::standard(3, 1);
  RngStream a(5, 5), b(5, 5);
  const auto epochs = meeting_process(config, 100000, a);
  const auto cycles = cycles_covering(config, 100000, b);
  const CtrwPath path(cycles);
  ASSERT_EQ(epochs.size(), path.count(100000.0));
  for (const auto& e : epochs) {
    EXPECT_EQ(path.at(static_cast<double>(e.time)).coupled, e.position);
  }
}

TEST(Ctrw, ZeroBeforeFirstCycle) {
  const std::vector<RegenerationCycle> cycles{{5, 10}, {-2, 3}};
  EXPECT_EQ(ctrw_build(cycles, 0.5, 10).coupled, 0);
  EXPECT_EQ(ctrw_build(cycles, 1.0, 10).coupled, 5);
  EXPECT_EQ(ctrw_build(cycles, 1.2, 10).coupled, 5);
  EXPECT_THROW(ctrw_build(cycles, 1.3, 10), InsufficientCycles);
}

TEST(Ctrw, OracleDiffersByOneJump) {
  const auto config = ChainConfig::standard(2, 1);
  RngStream rng(9, 9);
  const auto cycles = cycles_covering(config, 1000000, rng);
  const CtrwPath path(cycles);
  for (double s = 1; s < 1000000; s *= 1.7) {
    const auto v = path.at(s);
    EXPECT_LE(std::abs(v.oracle - v.coupled), 1);
  }
}

TEST(Ctrw, CoupledMatchesChainAtEpochs) {
  // Mouse position at the last all-meet epoch before H: directly simulated
  // chain versus the coupled walk built from cycles.
  const auto config = ChainConfig::standard(3, 31);
  const Time horizon = 20000;
  std::vector<double> direct, embedded;
  for (std::uint64_t r = 0; r < 20000; ++r) {
    AgentStreams s(config, r);
    std::int64_t anchor = 0;
    run_accelerated(config, horizon, s, [&](const ChainState& st) {
      if (st.all_equal() && st.time <= horizon) anchor = st.last();
    });
    direct.push_back(static_cast<double>(anchor));
    RngStream rng(32, r);
    embedded.push_back(static_cast<double>(
        CtrwPath(cycles_covering(config, horizon, rng)).at(static_cast<double>(horizon)).coupled));
  }
  EXPECT_LT(ks_distance(direct, embedded), ks_critical(20000, 20000, 0.001));
  for (std::uint64_t r = 0; r < 20; ++r) EXPECT_GE(dcm_coupling_gap(3, 100000, r), 0);
}

TEST(Theta, SingleAgentCountsEverything) {
  auto streams = theta_streams(1, 1, 0);
  for (std::int64_t n : {0, 1, 7, 1000000}) EXPECT_EQ(theta_compose(1, n, streams), static_cast<std::uint64_t>(n));
}

TEST(Theta, ReflectionMatchesSummation) {
  std::vector<double> a, b;
  for (std::uint64_t r = 0; r < 50000; ++r) {
    RngStream x(1, r), y(2, r);
    a.push_back(static_cast<double>(sample_theta(5000, x)));
    b.push_back(static_cast<double>(RenewalCounter(y)(5000)));
  }
  EXPECT_LT(ks_distance(a, b), ks_critical(a.size(), b.size(), 0.001));
}

TEST(Theta, RenewalCounterIsMonotone) {
  RenewalCounter c(RngStream(3, 3));
  std::uint64_t prev = 0;
  for (Time m = 0; m < 100000; m += 37) {
    const auto v = c(m);
    ASSERT_GE(v, prev);
    prev = v;
  }
}

TEST(Theta, BoundaryConvention) {
  // For n < N the composition reduces to Theta^(n)(n).
  for (std::uint64_t r = 0; r < 100; ++r) {
    auto s1 = theta_streams(4, 6, r);
    auto s2 = theta_streams(4, 6, r);
    EXPECT_EQ(theta_compose(6, 3, s1), theta_compose(3, 3, s2));
  }
  auto s = theta_streams(4, 3, 0);
  EXPECT_EQ(theta_compose(3, 1, s), 1u);
  EXPECT_THROW(theta_compose(3, -1, s), InvalidArgument);
}

TEST(Theta, TwoLevelCountMatchesMittagLeffler) {
  // Gamma(1 - rho) P{tau > n} theta(n) converges to E(1) for the subordinator
  // with Laplace exp(-s^rho), rho = 1/2.
  const double n = 1e6;
  const double scale = std::sqrt(kPiD) * tau1_survival(static_cast<Time>(n));
  std::vector<double> x, ref;
  RngStream e(7, 7);
  for (std::uint64_t r = 0; r < 100000; ++r) {
    auto streams = theta_streams(11, 2, r);
    x.push_back(scale * static_cast<double>(theta_compose(2, static_cast<std::int64_t>(n) + 1, streams) - 1));
    ref.push_back(sample_inverse_subordinator(0.5, 1.0, e));
  }
  EXPECT_LT(ks_distance(x, ref), 0.03);
}

TEST(Theta, ThreeAgentsMatchDirectChain) {
  const Time n = 10000;
  const auto config = ChainConfig::standard(3, 17);
  std::vector<double> direct, composed;
  for (std::uint64_t r = 0; r < 100000; ++r) {
    direct.push_back(static_cast<double>(sample_last_agent(config, {n}, r)[0]));
    composed.push_back(static_cast<double>(sample_last_agent_theta(3, static_cast<std::int64_t>(n), 18, r)));
  }
  EXPECT_LT(ks_distance(direct, composed), 0.02);
}

}  // namespace
}  // namespace cmchain
