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

#ifndef CMCHAIN_EXACT_HPP_
#define CMCHAIN_EXACT_HPP_

#include <array>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cmchain/chain.hpp"
#include "cmchain/error.hpp"
#include "cmchain/renewal.hpp"
#include "cmchain/stopped_sums.hpp"

namespace cmchain {

using Outcome = std::vector<std::int64_t>;

/// Exact law of a discrete outcome.
struct ExactDistribution {
  std::map<Outcome, Rational> probs;
  Rational truncated = 0;  // mass left out of `probs`, when a cap applies

  Rational total() const {
    Rational s = 0;
    for (const auto& [k, p] : probs) s += p;
    return s;
  }
  Rational at(const Outcome& o) const {
    const auto it = probs.find(o);
    return it == probs.end() ? Rational(0) : it->second;
  }
};

/// Hard cap on enumerated branches (state x draw combinations).
inline constexpr std::uint64_t kBranchBudget = std::uint64_t{1} << 30;

enum class Projection {
  positions,      // all agents at the horizon
  last_agent,     // last agent at the horizon
  gaps,           // |X^(j) - X^(j+1)| at the horizon
  first_meeting,  // first time >= 1 all agents coincide; horizon + 1 if later
};

namespace detail {

inline Rational to_rational(double p) {
  // Lattice probabilities are stored as doubles; dyadic values convert exactly.
  return Rational(p);
}

// Successor states of `pos` with their probabilities (agent 1 +-1, gated
// agents with their laws, idle agents' draws summed out).
inline std::vector<std::pair<Outcome, Rational>> successors(const Outcome& pos,
                                                            const ChainConfig& config) {
  const int n = config.n_agents;
  std::vector<std::pair<Outcome, Rational>> out{{pos, Rational(1)}};
  auto expand = [&](std::size_t i, const std::vector<std::pair<std::int64_t, Rational>>& law) {
    std::vector<std::pair<Outcome, Rational>> next;
    next.reserve(out.size() * law.size());
    for (const auto& [o, p] : out)
      for (const auto& [d, q] : law) {
        Outcome x = o;
        x[i] += d;
        next.emplace_back(std::move(x), p * q);
      }
    out.swap(next);
  };
  const std::vector<std::pair<std::int64_t, Rational>> pm1{{1, Rational(1, 2)},
                                                           {-1, Rational(1, 2)}};
  expand(0, pm1);
  for (int j = 2; j <= n; ++j) {
    const auto i = static_cast<std::size_t>(j - 1);
    if (pos[i - 1] != pos[i]) continue;
    if (j < n || config.mouse_jump.is_pm1()) {
      expand(i, pm1);
    } else if (config.mouse_jump.kind() == JumpDistribution::Kind::lattice_pmf) {
      std::vector<std::pair<std::int64_t, Rational>> law;
      for (std::size_t k = 0; k < config.mouse_jump.support().size(); ++k)
        law.emplace_back(config.mouse_jump.support()[k],
                         to_rational(config.mouse_jump.probabilities()[k]));
      expand(i, law);
    } else {
      throw InvalidArgument("enumerate: jump law has infinite support");
    }
  }
  return out;
}

inline bool all_equal(const Outcome& pos) {
  for (std::size_t i = 1; i < pos.size(); ++i)
    if (pos[i] != pos[0]) return false;
  return true;
}

}  // namespace detail

/// Pushforward of the uniform law on all draw sequences up to `horizon`
/// through the chain dynamics. Identical states are merged after each step,
/// so the work is (distinct states) x (draw combinations) per step; that
/// count is charged against kBranchBudget.
inline ExactDistribution enumerate(const ChainConfig& config, int horizon,
                                   Projection projection) {
  config.validate();
  detail::require(horizon >= 0, "enumerate: horizon must be >= 0");
  const int n = config.n_agents;
  // State = positions + one auxiliary slot (first meeting time, 0 = none yet).
  std::map<Outcome, Rational> cur;
  Outcome start(static_cast<std::size_t>(n + 1), 0);
  cur[start] = 1;
  std::uint64_t branches = 0;
  for (int t = 1; t <= horizon; ++t) {
    std::map<Outcome, Rational> next;
    for (const auto& [state, p] : cur) {
      const Outcome pos(state.begin(), state.end() - 1);
      const std::int64_t met = state.back();
      if (projection == Projection::first_meeting && met != 0) {
        next[state] += p;  // absorbed
        ++branches;
        continue;
      }
      for (auto& [succ, q] : detail::successors(pos, config)) {
        ++branches;
        Outcome s = succ;
        std::int64_t m = met;
        if (projection == Projection::first_meeting) {
          if (detail::all_equal(succ)) m = t;
          // Positions no longer matter once met.
          if (m != 0) std::fill(s.begin(), s.end(), 0);
        }
        s.push_back(m);
        next[s] += p * q;
      }
      if (branches > kBranchBudget)
        throw BudgetExceeded("enumerate: more than 2^30 branches");
    }
    cur.swap(next);
  }
  ExactDistribution out;
  for (const auto& [state, p] : cur) {
    const Outcome pos(state.begin(), state.end() - 1);
    Outcome key;
    switch (projection) {
      case Projection::positions:
        key = pos;
        break;
      case Projection::last_agent:
        key = {pos.back()};
        break;
      case Projection::gaps:
        for (std::size_t i = 0; i + 1 < pos.size(); ++i)
          key.push_back(std::abs(pos[i] - pos[i + 1]));
        break;
      case Projection::first_meeting:
        key = {state.back() != 0 ? state.back() : horizon + 1};
        break;
    }
    out.probs[key] += p;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Three-agent embedded epochs. Relative coordinates: dog at d, cat at c,
// mouse at m; an epoch state has d == c and |c - m| <= 1.

namespace detail {

struct Triple {
  std::int64_t d, c, m;
  auto operator<=>(const Triple&) const = default;
};

inline bool is_epoch(const Triple& s) { return s.d == s.c && std::abs(s.c - s.m) <= 1; }

// One synchronous step of the three agents from s, all 8 sign triples.
template <class F>
void for_each_step(const Triple& s, F&& f) {
  for (int g1 : {1, -1})
    for (int g2 : {1, -1})
      for (int g3 : {1, -1}) {
        Triple n{s.d + g1, s.c + (s.d == s.c ? g2 : 0), s.m + (s.c == s.m ? g3 : 0)};
        f(n, Rational(1, 8));
      }
}

inline int sign_of(std::int64_t v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

}  // namespace detail

/// Z transition matrix by exact enumeration of one epoch. Mass is followed
/// step by step until it sits either at an epoch state or at a state with
/// C != M that is not an epoch. From the latter the cat can only approach
/// the frozen mouse one unit at a time on its current side, and the dog
/// returns to the cat with probability 1, so the next epoch has
/// Z = sign(C - M). At most two steps are needed.
inline RationalMatrix3 exact_pz() {
  RationalMatrix3 pz{};
  for (int row = 0; row < 3; ++row) {
    const int z = kZOrder[static_cast<std::size_t>(row)];
    std::map<detail::Triple, Rational> cur{{{0, 0, -z}, Rational(1)}};
    for (int step = 0; step < 4 && !cur.empty(); ++step) {
      std::map<detail::Triple, Rational> next;
      for (const auto& [s, p] : cur) {
        detail::for_each_step(s, [&](const detail::Triple& n, const Rational& q) {
          if (detail::is_epoch(n)) {
            pz[static_cast<std::size_t>(row)][static_cast<std::size_t>(z_index(static_cast<int>(n.c - n.m)))] += p * q;
          } else if (n.c != n.m) {
            pz[static_cast<std::size_t>(row)][static_cast<std::size_t>(z_index(detail::sign_of(n.c - n.m)))] += p * q;
          } else {
            next[n] += p * q;
          }
        });
      }
      cur.swap(next);
    }
    detail::require(cur.empty(), "exact_pz: unresolved mass");
  }
  return pz;
}

/// Largest t-cap accepted by the conditional-law oracles.
inline constexpr int kMaxConditionalCap = 20;

/// Exact P{xi = m, t = k | Z_1 = z1, Z_2 = z2} for k <= t_cap, by following
/// every draw sequence of the three agents from the epoch state with
/// C - M = z1. Outcomes are {xi, t}; `truncated` is the conditional mass
/// with t > t_cap, reported rather than renormalised.
inline ExactDistribution exact_conditional_xi_t(int z1, int z2, int t_cap) {
  detail::require(z1 >= -1 && z1 <= 1 && z2 >= -1 && z2 <= 1, "Z values are -1, 0, 1");
  detail::require(t_cap >= 1 && t_cap <= kMaxConditionalCap, "t-cap must be in [1, 20]");
  const Rational pz = z_transition_matrix()[static_cast<std::size_t>(z_index(z1))]
                                           [static_cast<std::size_t>(z_index(z2))];
  ExactDistribution out;
  // Mouse starts at -z1 so that xi = m - (-z1).
  std::map<detail::Triple, Rational> cur{{{0, 0, -z1}, Rational(1)}};
  for (int t = 1; t <= t_cap; ++t) {
    std::map<detail::Triple, Rational> next;
    for (const auto& [s, p] : cur) {
      detail::for_each_step(s, [&](const detail::Triple& n, const Rational& q) {
        if (detail::is_epoch(n)) {
          if (n.c - n.m == z2) out.probs[{n.m + z1, t}] += p * q / pz;
        } else {
          next[n] += p * q;
        }
      });
    }
    cur.swap(next);
  }
  out.truncated = 1 - out.total();
  return out;
}

namespace detail {

// pmf tables on 1..cap (index 0 unused).
using PmfTable = std::vector<Rational>;

inline PmfTable tau_pmf_table(std::int64_t m, int cap) {
  PmfTable p(static_cast<std::size_t>(cap + 1), Rational(0));
  for (std::int64_t t = m; t <= cap; t += 2) p[static_cast<std::size_t>(t)] = *first_passage_pmf(m, t).exact;
  return p;
}

inline PmfTable convolve(const PmfTable& a, const PmfTable& b) {
  PmfTable c(a.size(), Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; i + j < c.size(); ++j)
      if (b[j] != 0) c[i + j] += a[i] * b[j];
  }
  return c;
}

// psi^2 = tau_(tau_1): sum over the (odd) value j of tau_1.
inline PmfTable psi2_pmf_table(int cap) {
  PmfTable out(static_cast<std::size_t>(cap + 1), Rational(0));
  const auto tau1 = tau_pmf_table(1, cap);
  for (int j = 1; j <= cap; j += 2) {
    const auto tj = tau_pmf_table(j, cap);
    for (int k = j; k <= cap; ++k) out[static_cast<std::size_t>(k)] += tau1[static_cast<std::size_t>(j)] * tj[static_cast<std::size_t>(k)];
  }
  return out;
}

// zeta X + Y with zeta ~ Bernoulli(1/2), X and Y independent.
inline PmfTable half_mixture_sum(const PmfTable& x, const PmfTable& y) {
  PmfTable point(x.size(), Rational(0));
  point[0] = 1;
  PmfTable lead(x.size(), Rational(0));
  for (std::size_t i = 0; i < x.size(); ++i) lead[i] = (point[i] + x[i]) / 2;
  return convolve(lead, y);
}

inline PmfTable shift_one(const PmfTable& x) {
  PmfTable out(x.size(), Rational(0));
  for (std::size_t i = 0; i + 1 < x.size(); ++i) out[i + 1] = x[i];
  return out;
}

inline void add_scaled(ExactDistribution& d, std::int64_t xi, const PmfTable& t,
                       const Rational& w) {
  for (std::size_t k = 1; k < t.size(); ++k)
    if (t[k] != 0) d.probs[{xi, static_cast<std::int64_t>(k)}] += w * t[k];
}

}  // namespace detail

/// Conditional law of (xi, t) given (Z_1, Z_2) from the closed-form mixtures
/// that the chain produces (durations 1 + tau_2 and 1 + zeta tau_2 + psi^2):
///   (0,0): xi = +-1 w.p. 1/2, t = 1;   (z,0): xi = 0, t = 1
///   (0,z'): xi in {0, -2z'} w.p. 1/6 each, t = 1 + tau_2;
///           xi = -z' w.p. 2/3, t = 1 + zeta tau_2 + psi^2
///   (z,z):  xi = -z w.p. 1/5, t = 1 + tau_2; xi = 0 w.p. 4/5, t = 1 + zeta tau_2 + psi^2
///   (z,-z): xi = z, t = 1 + tau_2
inline ExactDistribution chain_conditional_xi_t(int z1, int z2, int t_cap) {
  detail::require(t_cap >= 1 && t_cap <= kMaxConditionalCap, "t-cap must be in [1, 20]");
  using detail::PmfTable;
  const PmfTable one_tau2 = detail::shift_one(detail::tau_pmf_table(2, t_cap));
  const PmfTable mixed =
      detail::shift_one(detail::half_mixture_sum(detail::tau_pmf_table(2, t_cap),
                                                 detail::psi2_pmf_table(t_cap)));
  PmfTable unit(static_cast<std::size_t>(t_cap + 1), Rational(0));
  unit[1] = 1;
  ExactDistribution d;
  if (z2 == 0) {
    if (z1 == 0) {
      detail::add_scaled(d, 1, unit, Rational(1, 2));
      detail::add_scaled(d, -1, unit, Rational(1, 2));
    } else {
      detail::add_scaled(d, 0, unit, Rational(1));
    }
  } else if (z1 == 0) {
    detail::add_scaled(d, 0, one_tau2, Rational(1, 6));
    detail::add_scaled(d, -2 * z2, one_tau2, Rational(1, 6));
    detail::add_scaled(d, -z2, mixed, Rational(2, 3));
  } else if (z1 == z2) {
    detail::add_scaled(d, -z1, one_tau2, Rational(1, 5));
    detail::add_scaled(d, 0, mixed, Rational(4, 5));
  } else {
    detail::add_scaled(d, z1, one_tau2, Rational(1));
  }
  d.truncated = 1 - d.total();
  return d;
}

/// The same conditional laws as commonly tabulated: psi^1 in place of
/// 1 + tau_2 and zeta psi^1 + psi^2 in place of 1 + zeta tau_2 + psi^2, and
/// xi = -z for (z, -z). Open signs follow the chain's convention.
inline ExactDistribution displayed_conditional_xi_t(int z1, int z2, int t_cap) {
  detail::require(t_cap >= 1 && t_cap <= kMaxConditionalCap, "t-cap must be in [1, 20]");
  using detail::PmfTable;
  const PmfTable psi1 = detail::tau_pmf_table(1, t_cap);
  const PmfTable mixed = detail::half_mixture_sum(psi1, detail::psi2_pmf_table(t_cap));
  PmfTable unit(static_cast<std::size_t>(t_cap + 1), Rational(0));
  unit[1] = 1;
  ExactDistribution d;
  if (z2 == 0) {
    if (z1 == 0) {
      detail::add_scaled(d, 1, unit, Rational(1, 2));
      detail::add_scaled(d, -1, unit, Rational(1, 2));
    } else {
      detail::add_scaled(d, 0, unit, Rational(1));
    }
  } else if (z1 == 0) {
    detail::add_scaled(d, 0, psi1, Rational(1, 6));
    detail::add_scaled(d, -2 * z2, psi1, Rational(1, 6));
    detail::add_scaled(d, -z2, mixed, Rational(2, 3));
  } else if (z1 == z2) {
    detail::add_scaled(d, -z1, psi1, Rational(1, 5));
    detail::add_scaled(d, 0, mixed, Rational(4, 5));
  } else {
    detail::add_scaled(d, -z1, psi1, Rational(1));
  }
  d.truncated = 1 - d.total();
  return d;
}

/// Entrywise comparison of two truncated laws.
struct LawComparison {
  bool equal = true;
  std::vector<std::pair<Outcome, std::pair<Rational, Rational>>> mismatches;
};

inline LawComparison compare_laws(const ExactDistribution& a, const ExactDistribution& b) {
  LawComparison r;
  std::map<Outcome, std::pair<Rational, Rational>> all;
  for (const auto& [k, p] : a.probs) all[k].first = p;
  for (const auto& [k, p] : b.probs) all[k].second = p;
  for (const auto& [k, v] : all)
    if (v.first != v.second) {
      r.equal = false;
      r.mismatches.emplace_back(k, v);
    }
  return r;
}

/// Law of the k-th return time to 0 of a simple random walk, for k <= max_k
/// and times <= 2 * max_n, by walking all 2^(2 max_n) sign sequences.
/// Outcome {k, time}; the counts are divided by 2^(2 max_n).
inline ExactDistribution enumerate_return_times(int max_k, int max_n) {
  detail::require(max_n >= 1 && 2 * max_n <= 30, "enumerate_return_times: 2n must be <= 30");
  const int len = 2 * max_n;
  if ((std::uint64_t{1} << len) > kBranchBudget)
    throw BudgetExceeded("enumerate_return_times: more than 2^30 paths");
  std::vector<std::vector<std::uint64_t>> counts(
      static_cast<std::size_t>(max_k + 1), std::vector<std::uint64_t>(static_cast<std::size_t>(len + 1), 0));
  const std::uint64_t paths = std::uint64_t{1} << len;
  for (std::uint64_t bits = 0; bits < paths; ++bits) {
    int pos = 0, returns = 0;
    for (int t = 1; t <= len && returns < max_k; ++t) {
      pos += ((bits >> (t - 1)) & 1u) ? 1 : -1;
      if (pos == 0) {
        ++returns;
        ++counts[static_cast<std::size_t>(returns)][static_cast<std::size_t>(t)];
      }
    }
  }
  ExactDistribution out;
  const Rational denom = detail::pow2_inv(len);
  for (int k = 1; k <= max_k; ++k)
    for (int t = 1; t <= len; ++t)
      if (counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)] != 0)
        out.probs[{k, t}] = Rational(BigInt(counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)])) * denom;
  return out;
}

}  // namespace cmchain

#endif  // CMCHAIN_EXACT_HPP_
