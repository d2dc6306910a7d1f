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

#ifndef CMCHAIN_LIMIT_HPP_
#define CMCHAIN_LIMIT_HPP_

#include <cmath>
#include <string>

#include "cmchain/error.hpp"
#include "cmchain/rng.hpp"

namespace cmchain {

inline constexpr double kPi = 3.14159265358979323846;

/// Stable law in the S1 parameterisation: for alpha != 1 the characteristic
/// function is exp(-scale^a |t|^a (1 - i beta sign(t) tan(pi a / 2)) + i shift t).
struct StableSpec {
  double alpha = 2.0;
  double beta = 0.0;
  double scale = 1.0;
  double shift = 0.0;

  void validate() const {
    detail::require(alpha > 0.0 && alpha <= 2.0, "stable index must be in (0, 2]");
    detail::require(beta >= -1.0 && beta <= 1.0, "stable skew must be in [-1, 1]");
    detail::require(scale > 0.0, "stable scale must be positive");
  }

  bool is_subordinator() const { return alpha < 1.0 && beta == 1.0 && shift >= 0.0; }
};

/// Levy law with location 0 and scale c (cdf erfc(sqrt(c / 2x))).
inline StableSpec levy_spec(double c) { return {0.5, 1.0, c, 0.0}; }

/// Positive stable law with Laplace transform exp(-s^rho), 0 < rho < 1.
inline StableSpec subordinator_spec(double rho) {
  detail::require(rho > 0.0 && rho < 1.0, "subordinator index must be in (0, 1)");
  return {rho, 1.0, std::pow(std::cos(kPi * rho / 2.0), 1.0 / rho), 0.0};
}

/// Chambers-Mallows-Stuck construction from a uniform angle and an
/// exponential variate.
inline double sample_stable(const StableSpec& spec, RngStream& rng) {
  spec.validate();
  const double a = spec.alpha;
  const double b = spec.beta;
  const double v = kPi * (rng.uniform_open() - 0.5);
  const double w = rng.exponential();
  if (a == 1.0) {
    const double h = kPi / 2.0 + b * v;
    const double x =
        (2.0 / kPi) * (h * std::tan(v) -
                       b * std::log((kPi / 2.0) * w * std::cos(v) / h));
    return spec.scale * x + (2.0 / kPi) * b * spec.scale * std::log(spec.scale) +
           spec.shift;
  }
  const double t = b * std::tan(kPi * a / 2.0);
  const double bb = std::atan(t) / a;
  const double ss = std::pow(1.0 + t * t, 1.0 / (2.0 * a));
  const double x = ss * std::sin(a * (v + bb)) / std::pow(std::cos(v), 1.0 / a) *
                   std::pow(std::cos(v - a * (v + bb)) / w, (1.0 - a) / a);
  return spec.scale * x + spec.shift;
}

/// D(x) for the rho-stable subordinator with E exp(-s D(1)) = exp(-s^rho):
/// a sum of floor(x) unit increments plus one fractional increment.
inline double sample_subordinator(double rho, double x, RngStream& rng) {
  detail::require(x >= 0.0, "subordinator time must be >= 0");
  const StableSpec spec = subordinator_spec(rho);
  double total = 0.0;
  double whole = std::floor(x);
  for (double i = 0; i < whole; i += 1.0) total += sample_stable(spec, rng);
  const double frac = x - whole;
  if (frac > 0.0)
    total += std::pow(frac, 1.0 / rho) * sample_stable(spec, rng);
  return total;
}

/// Inverse subordinator E(t) = inf{s : D(s) > t}, via E(t) =d (t / D(1))^rho.
inline double sample_inverse_subordinator(double rho, double t, RngStream& rng) {
  detail::require(rho > 0.0 && rho < 1.0, "subordinator index must be in (0, 1)");
  detail::require(t >= 0.0, "time must be >= 0");
  if (t == 0.0) return 0.0;
  const double d = sample_stable(subordinator_spec(rho), rng);
  return std::pow(t / d, rho);
}

enum class LimitKind { cm_standard, general_zero_mean, general_nonzero_mean, dcm };

inline std::string to_string(LimitKind k) {
  switch (k) {
    case LimitKind::cm_standard: return "cm_standard";
    case LimitKind::general_zero_mean: return "general_zero_mean";
    case LimitKind::general_nonzero_mean: return "general_nonzero_mean";
    case LimitKind::dcm: return "dcm";
  }
  return "?";
}

inline LimitKind limit_kind_from_string(const std::string& s) {
  if (s == "cm_standard") return LimitKind::cm_standard;
  if (s == "general_zero_mean") return LimitKind::general_zero_mean;
  if (s == "general_nonzero_mean") return LimitKind::general_nonzero_mean;
  if (s == "dcm") return LimitKind::dcm;
  throw InvalidArgument("unknown limit kind: " + s);
}

struct LimitParams {
  double mu = 0.0;     // drift, general_nonzero_mean
  double alpha = 2.0;  // index of the jump-sum limit, general_zero_mean
  double beta = 0.0;
  double scale = 1.0;  // scale of that limit
};

struct LimitSample {
  double value = 0.0;
  double a_part = 0.0;  // Gaussian / stable factor (0 when not applicable)
  double e_part = 0.0;  // inverse-subordinator value, >= 0
};

/// One draw of the fixed-time marginal of a limit process. Uses the
/// self-similarity of the outer Levy process: A(E) =d E^(1/alpha) A(1) with
/// A independent of E.
inline LimitSample sample_limit(LimitKind kind, const LimitParams& params,
                                double t, RngStream& rng) {
  LimitSample out;
  if (t == 0.0) return out;
  switch (kind) {
    case LimitKind::cm_standard:
    case LimitKind::dcm: {
      const double rho = kind == LimitKind::dcm ? 0.25 : 0.5;
      out.e_part = sample_inverse_subordinator(rho, t, rng);
      out.a_part = rng.normal();
      out.value = std::sqrt(out.e_part) * out.a_part;
      return out;
    }
    case LimitKind::general_zero_mean: {
      out.e_part = sample_inverse_subordinator(0.5, t, rng);
      out.a_part =
          sample_stable({params.alpha, params.beta, params.scale, 0.0}, rng);
      out.value = std::pow(out.e_part, 1.0 / params.alpha) * out.a_part;
      return out;
    }
    case LimitKind::general_nonzero_mean:
      out.e_part = sample_inverse_subordinator(0.5, t, rng);
      out.value = params.mu * out.e_part;
      return out;
  }
  throw InvalidArgument("unknown limit kind");
}

}  // namespace cmchain

#endif  // CMCHAIN_LIMIT_HPP_
