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

#ifndef CMCHAIN_CHAIN_HPP_
#define CMCHAIN_CHAIN_HPP_

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <random>
#include <vector>

#include "cmchain/error.hpp"
#include "cmchain/first_passage.hpp"
#include "cmchain/jump.hpp"
#include "cmchain/rng.hpp"

namespace cmchain {

/// Hierarchical chain X^(1) -> ... -> X^(N): agent 1 is a simple random
/// walk, agent j >= 2 jumps only when it sits on agent j - 1. The last
/// agent's jump law is mouse_jump (pm1 in the standard variants).
struct ChainConfig {
  int n_agents = 2;
  JumpDistribution mouse_jump = JumpDistribution::pm1();
  std::uint64_t seed = 0;

  static ChainConfig standard(int n_agents, std::uint64_t seed) {
    return {n_agents, JumpDistribution::pm1(), seed};
  }
  static ChainConfig general(JumpDistribution jump, std::uint64_t seed) {
    return {2, std::move(jump), seed};
  }

  void validate() const { detail::require(n_agents >= 1, "n_agents must be >= 1"); }
  bool is_standard() const { return mouse_jump.is_pm1(); }
};

struct ChainState {
  std::vector<std::int64_t> positions;
  Time time = 0;

  static ChainState origin(int n_agents) {
    return {std::vector<std::int64_t>(static_cast<std::size_t>(n_agents), 0), 0};
  }
  std::int64_t last() const { return positions.back(); }
  bool all_equal() const {
    return std::adjacent_find(positions.begin(), positions.end(),
                              std::not_equal_to<>()) == positions.end();
  }
};

/// One RngStream per agent for a given replication.
class AgentStreams {
 public:
  AgentStreams(const ChainConfig& config, std::uint64_t replication) {
    streams_.reserve(static_cast<std::size_t>(config.n_agents));
    for (int j = 1; j <= config.n_agents; ++j)
      streams_.emplace_back(config.seed,
                            agent_stream_id(replication, j, config.n_agents));
  }
  RngStream& agent(int j) { return streams_[static_cast<std::size_t>(j - 1)]; }
  std::size_t size() const { return streams_.size(); }

 private:
  std::vector<RngStream> streams_;
};

/// One synchronous step: gating indicators are read from the input state,
/// then every agent moves.
inline ChainState step(const ChainState& state, const ChainConfig& config,
                       AgentStreams& rng) {
  const int n = config.n_agents;
  ChainState next = state;
  next.positions[0] += rng.agent(1).sign();
  for (int j = 2; j <= n; ++j) {
    const auto i = static_cast<std::size_t>(j - 1);
    if (state.positions[i - 1] != state.positions[i]) continue;
    next.positions[i] += (j == n) ? config.mouse_jump.sample(rng.agent(j))
                                  : rng.agent(j).sign();
  }
  ++next.time;
  return next;
}

struct RecordingPolicy {
  enum class Kind { full_path, last_agent, grid };
  Kind kind = Kind::last_agent;
  std::vector<Time> grid;  // increasing times, for Kind::grid

  static RecordingPolicy full() { return {Kind::full_path, {}}; }
  static RecordingPolicy last_agent_only() { return {Kind::last_agent, {}}; }
  static RecordingPolicy at(std::vector<Time> times) {
    detail::require(std::is_sorted(times.begin(), times.end()),
                    "recording grid must be increasing");
    return {Kind::grid, std::move(times)};
  }
};

/// Recorded points of one path. For full_path and grid, positions[i] holds
/// all agents at times[i]; for last_agent it holds the last agent only.
struct PathSample {
  std::vector<Time> times;
  std::vector<std::vector<std::int64_t>> positions;
};

/// Step-by-step simulation of one replication up to `horizon`.
inline PathSample simulate_path(const ChainConfig& config, Time horizon,
                                const RecordingPolicy& record,
                                std::uint64_t replication = 0) {
  config.validate();
  if (horizon >= kTimeCap) throw InvalidArgument("horizon overflows the time counter");
  AgentStreams rng(config, replication);
  ChainState s = ChainState::origin(config.n_agents);
  PathSample out;
  std::size_t gi = 0;
  auto emit = [&] {
    switch (record.kind) {
      case RecordingPolicy::Kind::full_path:
        out.times.push_back(s.time);
        out.positions.push_back(s.positions);
        break;
      case RecordingPolicy::Kind::last_agent:
        out.times.push_back(s.time);
        out.positions.push_back({s.last()});
        break;
      case RecordingPolicy::Kind::grid:
        while (gi < record.grid.size() && record.grid[gi] == s.time) {
          out.times.push_back(s.time);
          out.positions.push_back(s.positions);
          ++gi;
        }
        break;
    }
  };
  emit();
  const Time end = record.kind == RecordingPolicy::Kind::grid && !record.grid.empty()
                       ? std::min(horizon, record.grid.back())
                       : horizon;
  while (s.time < end) {
    s = step(s, config, rng);
    emit();
  }
  return out;
}

/// Exact simulation that replaces each stretch where agent 1 is the only
/// mover (no two consecutive agents coincide) by one first-passage draw.
/// `observe(state)` runs after every transition; the last agent only moves
/// on ordinary steps. Stops once state.time >= horizon or a skip would pass
/// the horizon (the state is then left at the pre-skip configuration with
/// time = horizon, which is exact for agents 2..N).
template <class Observer>
void run_accelerated(const ChainConfig& config, Time horizon, AgentStreams& rng,
                     Observer&& observe) {
  config.validate();
  ChainState s = ChainState::origin(config.n_agents);
  const int n = config.n_agents;
  auto only_leader_moves = [&] {
    if (n == 1) return false;
    for (int j = 1; j < n; ++j)
      if (s.positions[static_cast<std::size_t>(j - 1)] ==
          s.positions[static_cast<std::size_t>(j)])
        return false;
    return true;
  };
  observe(static_cast<const ChainState&>(s));
  while (s.time < horizon) {
    if (only_leader_moves()) {
      const auto gap = static_cast<std::uint64_t>(
          std::abs(s.positions[0] - s.positions[1]));
      const Time hit = sample_tau(gap, rng.agent(1));
      if (hit >= horizon - s.time) {
        s.time = horizon;
        observe(static_cast<const ChainState&>(s));
        return;
      }
      s.time += hit;
      s.positions[0] = s.positions[1];
    } else {
      s = step(s, config, rng);
    }
    observe(static_cast<const ChainState&>(s));
  }
}

/// Last agent's position at each time of an increasing grid, one replication.
inline std::vector<std::int64_t> sample_last_agent(const ChainConfig& config,
                                                   const std::vector<Time>& grid,
                                                   std::uint64_t replication) {
  detail::require(std::is_sorted(grid.begin(), grid.end()), "grid must be increasing");
  std::vector<std::int64_t> out;
  out.reserve(grid.size());
  if (grid.empty()) return out;
  AgentStreams rng(config, replication);
  if (config.n_agents == 1) {
    // Agent 1 alone: X(t) = 2 Bin(t, 1/2) - t, increments over the grid.
    std::int64_t x = 0;
    Time prev = 0;
    for (Time t : grid) {
      const auto dt = static_cast<long long>(t - prev);
      std::binomial_distribution<long long> bin(dt, 0.5);
      x += 2 * bin(rng.agent(1)) - dt;
      out.push_back(x);
      prev = t;
    }
    return out;
  }
  std::size_t gi = 0;
  std::int64_t last = 0;
  run_accelerated(config, grid.back(), rng, [&](const ChainState& s) {
    // The last agent held `last` on [previous event, s.time).
    while (gi < grid.size() && grid[gi] < s.time) {
      out.push_back(last);
      ++gi;
    }
    last = s.last();
    while (gi < grid.size() && grid[gi] == s.time) {
      out.push_back(last);
      ++gi;
    }
  });
  while (gi < grid.size()) {
    out.push_back(last);
    ++gi;
  }
  return out;
}

}  // namespace cmchain

#endif  // CMCHAIN_CHAIN_HPP_
