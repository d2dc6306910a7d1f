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

#ifndef CMCHAIN_RENEWAL_HPP_
#define CMCHAIN_RENEWAL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <vector>

#include "cmchain/chain.hpp"
#include "cmchain/error.hpp"
#include "cmchain/first_passage.hpp"
#include "cmchain/jump.hpp"
#include "cmchain/rng.hpp"
#include "cmchain/stopped_sums.hpp"

namespace cmchain {

/// Last agent's net move Y and duration J between two regeneration epochs.
struct RegenerationCycle {
  std::int64_t displacement = 0;
  Time duration = 1;
};

/// One meeting interval of the general-jump two-agent chain: the mouse jump
/// y and the time J until the cat reaches it again (tau_|y| for y != 0,
/// 1 + tau_1 for y = 0).
inline RegenerationCycle sample_j2(const JumpDistribution& jump, RngStream& rng) {
  RegenerationCycle c;
  c.displacement = jump.sample(rng);
  if (c.displacement == 0) {
    c.duration = sat_add(1, sample_tau1(rng));
  } else {
    c.duration = sample_tau(static_cast<std::uint64_t>(std::abs(c.displacement)), rng);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Three-agent chain, embedded at the epochs where the gap pair returns to
// {(0,0), (0,1)}. Z = C - M at those epochs.

/// Z states in matrix order (0, +1, -1).
inline constexpr std::array<int, 3> kZOrder = {0, 1, -1};

inline int z_index(int z) { return z == 0 ? 0 : (z == 1 ? 1 : 2); }

using RationalMatrix3 = std::array<std::array<Rational, 3>, 3>;

/// Transition matrix of Z in state order (0, +1, -1).
inline RationalMatrix3 z_transition_matrix() {
  const Rational q(1, 4), a(3, 8), b(5, 8), c(1, 8);
  return {{{q, a, a}, {q, b, c}, {q, c, b}}};
}

/// Which law of (xi, t) given (Z_k, Z_k+1) to draw from.
enum class EpochLaw {
  chain,      // the law produced by the chain dynamics
  displayed,  // the mixtures of psi^1, psi^2, zeta as usually tabulated
};

/// One embedded epoch: next Z value, mouse increment xi, duration t.
struct EpochDraw {
  int z_next = 0;
  std::int64_t xi = 0;
  Time t = 1;
};

/// psi^2 = tau_1 + ... + tau_1 (tau_1 terms) =d tau_(tau_1).
inline Time sample_psi2(RngStream& rng) {
  const Time k = sample_tau1(rng);
  return k >= kTimeCap ? kTimeCap : sample_tau(k, rng);
}

/// Draws one epoch from Z_k = z by following the first step of the three
/// agents and then the frozen stretches in closed form:
///   gap pair (0,0): t = 1
///   gap pair (2,0): t = 1 + tau_2 (mouse steps once more, dog walks back)
///   gap pair (0,2): t = 1 + psi^2 (cat-mouse gap walks 2 -> 1 on the
///                   dog's meeting clock)
///   gap pair (2,2): t = 1 + tau_2 + psi^2
inline EpochDraw sample_epoch_chain(int z, RngStream& rng) {
  EpochDraw d;
  const int g1 = rng.sign();
  const int g2 = rng.sign();
  if (z == 0) {
    const int g3 = rng.sign();
    const bool dog_on_cat = g1 == g2;
    const bool cat_on_mouse = g2 == g3;
    if (dog_on_cat && cat_on_mouse) {
      d.z_next = 0;
      d.xi = g3;
      d.t = 1;
    } else if (!dog_on_cat && cat_on_mouse) {
      const int g3b = rng.sign();
      d.z_next = -g3b;
      d.xi = g3 + g3b;
      d.t = sat_add(1, sample_tau(2, rng));
    } else {
      d.z_next = g2;  // C - M = g2 - g3 = 2 g2
      d.xi = g3;
      const Time lead = dog_on_cat ? 0 : sample_tau(2, rng);
      d.t = sat_add(sat_add(1, lead), sample_psi2(rng));
    }
    return d;
  }
  // z = C - M = +-1, dog on cat; the mouse sits this step.
  const bool dog_on_cat = g1 == g2;
  if (g2 == -z) {  // cat lands on the mouse
    if (dog_on_cat) {
      d.z_next = 0;
      d.xi = 0;
      d.t = 1;
    } else {
      const int g3b = rng.sign();
      d.z_next = -g3b;
      d.xi = g3b;
      d.t = sat_add(1, sample_tau(2, rng));
    }
    return d;
  }
  d.z_next = z;  // cat moved away: |C - M| = 2, comes back to 1 on the same side
  d.xi = 0;
  const Time lead = dog_on_cat ? 0 : sample_tau(2, rng);
  d.t = sat_add(sat_add(1, lead), sample_psi2(rng));
  return d;
}

/// Draws (Z', xi, t) from the tabulated mixtures with P_Z for Z':
///   (0, 0):     xi = +-1 w.p. 1/2, t = 1
///   (+-1, 0):   xi = 0, t = 1
///   (0, z'):    xi in {0, -2z'} w.p. 1/6 each with t = psi^1,
///               xi = -z' w.p. 2/3 with t = zeta psi^1 + psi^2
///   (z, z):     xi = -z w.p. 1/5 with t = psi^1,
///               xi = 0 w.p. 4/5 with t = zeta psi^1 + psi^2
///   (z, -z):    xi = -z, t = psi^1
/// Where the tabulation leaves a sign open, the chain's sign is used.
inline EpochDraw sample_epoch_displayed(int z, RngStream& rng) {
  EpochDraw d;
  const double u = rng.uniform();
  auto mixed = [&] {
    const Time lead = rng.sign() > 0 ? sample_tau1(rng) : 0;
    return sat_add(lead, sample_psi2(rng));
  };
  if (z == 0) {
    if (u < 0.25) {
      d.z_next = 0;
      d.xi = rng.sign();
      d.t = 1;
      return d;
    }
    d.z_next = u < 0.625 ? 1 : -1;
    const double v = rng.uniform();
    if (v < 1.0 / 6.0) {
      d.xi = 0;
      d.t = sample_tau1(rng);
    } else if (v < 2.0 / 6.0) {
      d.xi = -2 * d.z_next;
      d.t = sample_tau1(rng);
    } else {
      d.xi = -d.z_next;
      d.t = mixed();
    }
    return d;
  }
  if (u < 0.25) {
    d.z_next = 0;
    d.xi = 0;
    d.t = 1;
  } else if (u < 0.875) {
    d.z_next = z;
    if (rng.uniform() < 0.2) {
      d.xi = -z;
      d.t = sample_tau1(rng);
    } else {
      d.xi = 0;
      d.t = mixed();
    }
  } else {
    d.z_next = -z;
    d.xi = -z;
    d.t = sample_tau1(rng);
  }
  return d;
}

inline EpochDraw sample_epoch(int z, RngStream& rng, EpochLaw law = EpochLaw::chain) {
  return law == EpochLaw::chain ? sample_epoch_chain(z, rng)
                                : sample_epoch_displayed(z, rng);
}

/// A full regeneration cycle of the three-agent chain plus its epoch count nu.
struct DcmCycle {
  RegenerationCycle cycle;
  int nu = 0;
  Time first_epoch = 1;  // t_1
};

/// Runs the Z chain from 0 until it returns to 0 (equivalently, until an
/// epoch of length 1); Y and J are the sums of xi and t.
inline DcmCycle cycle_sampler_dcm(RngStream& rng, EpochLaw law = EpochLaw::chain) {
  DcmCycle out;
  out.cycle.duration = 0;
  int z = 0;
  do {
    const EpochDraw d = sample_epoch(z, rng, law);
    if (out.nu == 0) out.first_epoch = d.t;
    ++out.nu;
    out.cycle.displacement += d.xi;
    out.cycle.duration = sat_add(out.cycle.duration, d.t);
    z = d.z_next;
  } while (z != 0);
  return out;
}

// ---------------------------------------------------------------------------

/// Regeneration epoch T_k with the last agent's position there.
struct MeetingEpoch {
  Time time = 0;
  std::int64_t position = 0;
};

/// Draws one regeneration cycle for a two- or three-agent configuration.
inline RegenerationCycle sample_cycle(const ChainConfig& config, RngStream& rng) {
  if (config.n_agents == 2) return sample_j2(config.mouse_jump, rng);
  if (config.n_agents == 3 && config.is_standard()) return cycle_sampler_dcm(rng).cycle;
  throw InvalidArgument("no cycle sampler for this configuration");
}

/// All regeneration epochs T_k <= horizon (cat meets mouse for two agents,
/// all three together for three agents), built from cycle draws only.
inline std::vector<MeetingEpoch> meeting_process(const ChainConfig& config,
                                                 Time horizon, RngStream& rng) {
  std::vector<MeetingEpoch> out;
  Time t = 0;
  std::int64_t pos = 0;
  for (;;) {
    const RegenerationCycle c = sample_cycle(config, rng);
    t = sat_add(t, c.duration);
    if (t > horizon) break;
    pos += c.displacement;
    out.push_back({t, pos});
  }
  return out;
}

struct CtrwValue {
  std::int64_t coupled = 0;  // S_N(s): completed cycles only
  std::int64_t oracle = 0;   // S_(N(s-1)+1): includes the jump in progress
};

/// Prefix sums over a cycle sequence for repeated time queries.
class CtrwPath {
 public:
  explicit CtrwPath(const std::vector<RegenerationCycle>& cycles) {
    epochs_.reserve(cycles.size());
    sums_.reserve(cycles.size() + 1);
    sums_.push_back(0);
    Time t = 0;
    for (const auto& c : cycles) {
      t = sat_add(t, c.duration);
      epochs_.push_back(t);
      sums_.push_back(sums_.back() + c.displacement);
    }
  }

  /// N(s) = #{k : T_k <= s}.
  std::size_t count(double s) const {
    if (s < 0) return 0;
    const Time si = s >= 0x1.0p62 ? kTimeCap : static_cast<Time>(std::floor(s));
    return static_cast<std::size_t>(
        std::upper_bound(epochs_.begin(), epochs_.end(), si) - epochs_.begin());
  }

  Time covered() const { return epochs_.empty() ? 0 : epochs_.back(); }

  CtrwValue at(double s) const {
    if (!(static_cast<double>(covered()) > s))
      throw InsufficientCycles("cycles end before the requested time");
    CtrwValue v;
    v.coupled = sums_[count(s)];
    v.oracle = s < 1.0 ? 0 : sums_[count(s - 1.0) + 1];
    return v;
  }

 private:
  std::vector<Time> epochs_;
  std::vector<std::int64_t> sums_;
};

/// Coupled and oracle random walks at time n t.
inline CtrwValue ctrw_build(const std::vector<RegenerationCycle>& cycles, double t,
                            std::int64_t n) {
  detail::require(t >= 0.0 && n >= 1, "ctrw_build: need t >= 0, n >= 1");
  return CtrwPath(cycles).at(t * static_cast<double>(n));
}

/// Draws cycles until they cover `horizon` (strictly beyond it).
inline std::vector<RegenerationCycle> cycles_covering(const ChainConfig& config,
                                                      Time horizon, RngStream& rng) {
  std::vector<RegenerationCycle> out;
  Time t = 0;
  while (t <= horizon) {
    out.push_back(sample_cycle(config, rng));
    t = sat_add(t, out.back().duration);
  }
  return out;
}

/// max over k <= horizon of |M_k - M~_k| on one directly simulated
/// three-agent path, M~ the mouse position at the last regeneration epoch.
inline std::int64_t dcm_coupling_gap(std::uint64_t seed, Time horizon,
                                     std::uint64_t replication) {
  const ChainConfig config = ChainConfig::standard(3, seed);
  AgentStreams rng(config, replication);
  std::int64_t anchor = 0;
  std::int64_t gap = 0;
  run_accelerated(config, horizon, rng, [&](const ChainState& s) {
    if (s.all_equal()) anchor = s.last();
    gap = std::max(gap, std::abs(s.last() - anchor));
  });
  return gap;
}

// ---------------------------------------------------------------------------
// Renewal counters and the nested composition Theta^(N).

/// theta(m) = max{l >= 0 : tau_1 + ... + tau_l <= m}, drawn by summing
/// first-passage times from a private stream. Queries for increasing m
/// reuse the same partial sums, so theta is monotone in m for one counter.
class RenewalCounter {
 public:
  explicit RenewalCounter(RngStream rng) : rng_(rng) {}

  std::uint64_t operator()(Time m) {
    while (partial_.empty() || partial_.back() <= m) {
      const Time prev = partial_.empty() ? 0 : partial_.back();
      partial_.push_back(sat_add(prev, sample_tau1(rng_)));
      if (partial_.back() >= kTimeCap) break;
    }
    return static_cast<std::uint64_t>(
        std::upper_bound(partial_.begin(), partial_.end(), m) - partial_.begin());
  }

 private:
  RngStream rng_;
  std::vector<Time> partial_;
};

/// theta(m) in O(1): sums of tau_1 are passage times, so theta(m) is the
/// running maximum of a walk at time m, and P{max = r} = P{S = r} + P{S = r+1}
/// gives max =d S if S >= 0, -S - 1 otherwise.
inline std::uint64_t sample_theta(Time m, RngStream& rng) {
  if (m == 0) return 0;
  std::binomial_distribution<long long> bin(static_cast<long long>(m), 0.5);
  const long long s = 2 * bin(rng) - static_cast<long long>(m);
  return static_cast<std::uint64_t>(s >= 0 ? s : -s - 1);
}

enum class ThetaMethod { reflection, summation };

/// Theta^(N)(n), the number of jumps of agent N by time n:
/// Theta^(1)(n) = n, Theta^(j)(n) = 1 + theta_j(Theta^(j-1)(n - 1)),
/// Theta^(j)(0) = 0. Level j draws from its own stream in `streams`
/// (index j - 2 for j = 2..N).
inline std::uint64_t theta_compose(int n_agents, std::int64_t n,
                                   std::vector<RngStream>& streams,
                                   ThetaMethod method = ThetaMethod::reflection) {
  detail::require(n_agents >= 1, "theta_compose: N must be >= 1");
  detail::require(n >= 0, "theta_compose: n must be >= 0");
  detail::require(streams.size() + 1 >= static_cast<std::size_t>(n_agents),
                  "theta_compose: one stream per level needed");
  // Unroll: level j sees argument n - (j - 1) passed down through j - 1 shifts.
  const std::int64_t start = n - (n_agents - 1);
  if (n == 0) return 0;
  if (start <= 0) {
    // Some inner level is evaluated at 0; the outermost n levels remain.
    return theta_compose(static_cast<int>(n), n, streams, method);
  }
  std::uint64_t value = static_cast<std::uint64_t>(start);  // Theta^(1)(start)
  for (int j = 2; j <= n_agents; ++j) {
    RngStream& rng = streams[static_cast<std::size_t>(j - 2)];
    std::uint64_t th = 0;
    if (method == ThetaMethod::reflection) {
      th = sample_theta(value, rng);
    } else {
      RenewalCounter counter(rng);
      th = counter(value);
    }
    value = 1 + th;
  }
  return value;
}

/// Streams for theta_compose, one per level, for a given replication.
inline std::vector<RngStream> theta_streams(std::uint64_t seed, int n_agents,
                                            std::uint64_t replication) {
  std::vector<RngStream> s;
  for (int j = 2; j <= std::max(n_agents, 2); ++j)
    s.emplace_back(seed, agent_stream_id(replication, j, n_agents));
  return s;
}

/// X^(N)(n) as a fair +-1 walk evaluated at Theta^(N)(n).
inline std::int64_t sample_last_agent_theta(int n_agents, std::int64_t n,
                                            std::uint64_t seed,
                                            std::uint64_t replication) {
  auto streams = theta_streams(seed, n_agents, replication);
  const std::uint64_t jumps = theta_compose(n_agents, n, streams);
  if (jumps == 0) return 0;
  RngStream walk(seed, agent_stream_id(replication, 1, n_agents));
  std::binomial_distribution<long long> bin(static_cast<long long>(jumps), 0.5);
  return 2 * bin(walk) - static_cast<long long>(jumps);
}

}  // namespace cmchain

#endif  // CMCHAIN_RENEWAL_HPP_
