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

#include <map>

#include <gtest/gtest.h>

#include "cmchain/estimators.hpp"
#include "cmchain/exact.hpp"
#include "cmchain/renewal.hpp"

namespace cmchain {
namespace {

constexpr int kCap = 12;

TEST(Enumerate, HorizonZeroIsPointMass) {
  const auto d = enumerate(ChainConfig::standard(3, 0), 0, Projection::positions);
  ASSERT_EQ(d.probs.size(), 1u);
  EXPECT_EQ(d.at({0, 0, 0}), Rational(1));
}

TEST(Enumerate, DcmFirstGapsUniform) {
  const auto d = enumerate(ChainConfig::standard(3, 0), 1, Projection::gaps);
  ASSERT_EQ(d.probs.size(), 4u);
  for (const Outcome& o : {Outcome{0, 0}, Outcome{2, 0}, Outcome{0, 2}, Outcome{2, 2}})
    EXPECT_EQ(d.at(o), Rational(1, 4));
}

TEST(Enumerate, CmFirstMeetingTimes) {
  const auto d = enumerate(ChainConfig::standard(2, 0), 5, Projection::first_meeting);
  EXPECT_EQ(d.at({1}), Rational(1, 2));
  EXPECT_EQ(d.at({2}), Rational(0));
  // Gap 2 after one step, then the cat alone hits the mouse: P{tau_2 = 2}.
  EXPECT_EQ(d.at({3}), Rational(1, 8));
  // P{tau_2 = 4} = 1/8.
  EXPECT_EQ(d.at({5}), Rational(1, 16));
  EXPECT_EQ(d.total(), Rational(1));
}

TEST(Enumerate, MassIsConserved) {
  for (int n : {2, 3, 4}) {
    const auto d = enumerate(ChainConfig::standard(n, 0), 6, Projection::positions);
    EXPECT_EQ(d.total(), Rational(1)) << n;
    const auto last = enumerate(ChainConfig::standard(n, 0), 6, Projection::last_agent);
    EXPECT_EQ(last.total(), Rational(1)) << n;
  }
}

TEST(Enumerate, GeneralJumpLaw) {
  const auto config = ChainConfig::general(JumpDistribution::lattice({{1, 0.75}, {-1, 0.25}}), 0);
  const auto d = enumerate(config, 1, Projection::positions);
  // The cat stays a simple walk; only the mouse uses the lattice law.
  EXPECT_EQ(d.at({1, 1}), Rational(3, 8));
  EXPECT_EQ(d.at({-1, 1}), Rational(3, 8));
  EXPECT_EQ(d.at({1, -1}), Rational(1, 8));
  EXPECT_EQ(d.total(), Rational(1));
}

TEST(Zchain, ClosedFormMatrix) {
  const auto pz = exact_pz();
  EXPECT_EQ(pz, z_transition_matrix());
  EXPECT_EQ(pz[0][0], Rational(1, 4));
  EXPECT_EQ(pz[0][1], Rational(3, 8));
  EXPECT_EQ(pz[1][1], Rational(5, 8));
  EXPECT_EQ(pz[1][2], Rational(1, 8));
  for (const auto& row : pz) EXPECT_EQ(row[0] + row[1] + row[2], Rational(1));
}

TEST(ConditionalLaw, ChainFormulasMatchEnumeration) {
  for (int z1 : {0, 1, -1}) {
    for (int z2 : {0, 1, -1}) {
      const auto e = exact_conditional_xi_t(z1, z2, kCap);
      const auto c = chain_conditional_xi_t(z1, z2, kCap);
      EXPECT_TRUE(compare_laws(e, c).equal) << z1 << "," << z2;
      EXPECT_EQ(e.truncated, c.truncated) << z1 << "," << z2;
    }
  }
}

TEST(ConditionalLaw, ImmediateEpochs) {
  const auto d00 = exact_conditional_xi_t(0, 0, kCap);
  EXPECT_EQ(d00.at({1, 1}), Rational(1, 2));
  EXPECT_EQ(d00.at({-1, 1}), Rational(1, 2));
  EXPECT_EQ(d00.truncated, Rational(0));
  const auto d10 = exact_conditional_xi_t(1, 0, kCap);
  EXPECT_EQ(d10.at({0, 1}), Rational(1));
}

TEST(ConditionalLaw, OppositeSignsMoveMouseTowardCat) {
  // From (+1, -1): the mouse ends one unit up, t = 1 + tau_2.
  const auto d = exact_conditional_xi_t(1, -1, kCap);
  for (const auto& [o, p] : d.probs) EXPECT_EQ(o[0], 1);
  EXPECT_EQ(d.at({1, 3}), Rational(1, 4));
}

// The commonly tabulated mixtures (psi^1 where the chain produces
// 1 + tau_2) disagree with the enumeration once the next Z is nonzero.
TEST(ConditionalLaw, DisplayedMixturesDifferWhenZ2NonZero) {
  for (int z1 : {0, 1, -1}) {
    for (int z2 : {0, 1, -1}) {
      const auto cmp = compare_laws(exact_conditional_xi_t(z1, z2, kCap),
                                    displayed_conditional_xi_t(z1, z2, kCap));
      EXPECT_EQ(cmp.equal, z2 == 0) << z1 << "," << z2;
    }
  }
}

TEST(ConditionalLaw, CapValidation) {
  EXPECT_THROW(exact_conditional_xi_t(0, 1, 0), InvalidArgument);
  EXPECT_THROW(exact_conditional_xi_t(0, 1, kMaxConditionalCap + 1), InvalidArgument);
  EXPECT_THROW(exact_conditional_xi_t(2, 1, 5), InvalidArgument);
  EXPECT_THROW(enumerate_return_times(1, 16), InvalidArgument);
  EXPECT_THROW(enumerate(ChainConfig::standard(2, 0), -1, Projection::positions), InvalidArgument);
}

// Epoch sampler against the exact joint law of (Z_2, xi, t), t > cap pooled.
TEST(EpochSampler, ChiSquareAgainstEnumeration) {
  const auto pz = exact_pz();
  for (int z1 : {0, 1, -1}) {
    std::vector<std::tuple<int, std::int64_t, std::int64_t>> keys;
    std::vector<double> probs;
    double tail = 0.0;
    for (int z2 : {0, 1, -1}) {
      const Rational w = pz[static_cast<std::size_t>(z_index(z1))][static_cast<std::size_t>(z_index(z2))];
      const auto law = exact_conditional_xi_t(z1, z2, kCap);
      for (const auto& [o, p] : law.probs) {
        keys.emplace_back(z2, o[0], o[1]);
        probs.push_back(static_cast<double>(w * p));
      }
      tail += static_cast<double>(w * law.truncated);
    }
    probs.push_back(tail);
    std::map<std::tuple<int, std::int64_t, std::int64_t>, double> seen;
    double tail_count = 0;
    RngStream rng(31, static_cast<std::uint64_t>(z1 + 1));
    const int reps = 400000;
    for (int i = 0; i < reps; ++i) {
      const auto d = sample_epoch(z1, rng);
      if (d.t > static_cast<Time>(kCap)) {
        ++tail_count;
      } else {
        seen[{d.z_next, d.xi, static_cast<std::int64_t>(d.t)}] += 1;
      }
    }
    std::vector<double> counts;
    double matched = 0;
    for (const auto& k : keys) {
      counts.push_back(seen[k]);
      matched += seen[k];
    }
    counts.push_back(tail_count);
    EXPECT_EQ(matched + tail_count, reps) << "sampler produced an impossible outcome, z1 = " << z1;
    EXPECT_GT(chi_square(counts, probs).p_value, 1e-4) << z1;
  }
}

TEST(ReturnTimes, SmallCases) {
  const auto d = enumerate_return_times(2, 3);
  EXPECT_EQ(d.at({1, 2}), Rational(1, 2));
  EXPECT_EQ(d.at({1, 4}), Rational(1, 8));
  EXPECT_EQ(d.at({2, 4}), Rational(1, 4));
  EXPECT_EQ(d.at({2, 2}), Rational(0));
}

}  // namespace
}  // namespace cmchain
