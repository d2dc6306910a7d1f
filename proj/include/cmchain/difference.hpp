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

#ifndef CMCHAIN_DIFFERENCE_HPP_
#define CMCHAIN_DIFFERENCE_HPP_

#include <cstdint>
#include <cstdlib>
#include <vector>

#include "cmchain/error.hpp"
#include "cmchain/rng.hpp"

namespace cmchain {

/// Gaps |X^(j) - X^(j+1)| between consecutive agents. One gap for the
/// two-agent chain, two for the three-agent chain.
struct DifferenceState {
  std::vector<std::int64_t> gaps;

  bool operator==(const DifferenceState&) const = default;
};

/// Gap chain of the two-agent chain. From 0 the gap becomes |g1 - g2|
/// (0 or 2), otherwise it moves by a fair +-1 step.
inline std::int64_t v_step_cm(std::int64_t v, RngStream& rng) {
  detail::require(v >= 0, "gap must be nonnegative");
  if (v == 0) return std::abs(rng.sign() - rng.sign());
  return v + rng.sign();
}

/// Gap pair (|D - C|, |C - M|) of the three-agent chain, using one fair
/// sign per agent:
///   (0, 0)  -> (|g1 - g2|, |g2 - g3|)
///   (0, b)  -> (|g1 - g2|, b + g2)   cat moves, mouse sits
///   (a, 0)  -> (a + g1, 1)           mouse steps off the frozen cat
///   (a, b)  -> (a + g1, b)           only the dog moves
/// In the (0, b) case the two coordinates use different draws; |g1 - g2| is
/// independent of g2, so they are independent.
inline DifferenceState v_step_dcm(const DifferenceState& v, RngStream& rng) {
  detail::require(v.gaps.size() == 2, "three-agent gap state has two gaps");
  const std::int64_t a = v.gaps[0];
  const std::int64_t b = v.gaps[1];
  detail::require(a >= 0 && b >= 0, "gaps must be nonnegative");
  const int g1 = rng.sign();
  const int g2 = rng.sign();
  const int g3 = rng.sign();
  if (a == 0 && b == 0) return {{std::abs(g1 - g2), std::abs(g2 - g3)}};
  if (a == 0) return {{std::abs(g1 - g2), b + g2}};
  if (b == 0) return {{a + g1, 1}};
  return {{a + g1, b}};
}

}  // namespace cmchain

#endif  // CMCHAIN_DIFFERENCE_HPP_
