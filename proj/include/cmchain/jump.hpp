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

#ifndef CMCHAIN_JUMP_HPP_
#define CMCHAIN_JUMP_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cmchain/error.hpp"
#include "cmchain/rng.hpp"

namespace cmchain {

/// Law of a single lattice jump of the last agent.
///
/// Three kinds are supported:
///  - pm1: +1 or -1 with probability 1/2 each;
///  - lattice-pmf: a finite integer pmf;
///  - two-sided-pareto: shift + round_half_away(sign * scale * U^(-1/alpha)),
///    sign fair, alpha in (1, 2], integer shift.
class JumpDistribution {
 public:
  enum class Kind { pm1, lattice_pmf, two_sided_pareto };

  static JumpDistribution pm1() { return JumpDistribution(Kind::pm1); }

  static JumpDistribution lattice(std::map<std::int64_t, double> pmf) {
    detail::require(!pmf.empty(), "lattice pmf must not be empty");
    double total = 0.0;
    for (const auto& [value, p] : pmf) {
      detail::require(p >= 0.0, "lattice pmf has a negative probability");
      total += p;
    }
    detail::require(std::abs(total - 1.0) < 1e-12,
                    "lattice pmf probabilities must sum to 1");
    JumpDistribution d(Kind::lattice_pmf);
    for (const auto& [value, p] : pmf) {
      if (p > 0.0) {
        d.values_.push_back(value);
        d.probs_.push_back(p);
      }
    }
    double acc = 0.0;
    for (double p : d.probs_) {
      acc += p;
      d.cdf_.push_back(acc);
    }
    d.cdf_.back() = 1.0;
    return d;
  }

  static JumpDistribution two_sided_pareto(double alpha, double scale,
                                           std::int64_t shift = 0) {
    detail::require(alpha > 1.0 && alpha <= 2.0,
                    "two-sided-pareto tail index must lie in (1, 2]");
    detail::require(scale > 0.0, "two-sided-pareto scale must be positive");
    JumpDistribution d(Kind::two_sided_pareto);
    d.alpha_ = alpha;
    d.scale_ = scale;
    d.shift_ = shift;
    return d;
  }

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double scale() const { return scale_; }
  std::int64_t shift() const { return shift_; }
  const std::vector<std::int64_t>& support() const { return values_; }
  const std::vector<double>& probabilities() const { return probs_; }

  bool is_pm1() const { return kind_ == Kind::pm1; }

  /// Mean jump. Rounding half away from zero keeps the Pareto part symmetric,
  /// so its mean is exactly the shift.
  double mean() const {
    switch (kind_) {
      case Kind::pm1:
        return 0.0;
      case Kind::lattice_pmf: {
        double m = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i)
          m += static_cast<double>(values_[i]) * probs_[i];
        return m;
      }
      case Kind::two_sided_pareto:
        return static_cast<double>(shift_);
    }
    return 0.0;
  }

  /// Variance; +infinity for the Pareto kind (alpha <= 2).
  double variance() const {
    switch (kind_) {
      case Kind::pm1:
        return 1.0;
      case Kind::lattice_pmf: {
        const double m = mean();
        double v = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) {
          const double d = static_cast<double>(values_[i]) - m;
          v += d * d * probs_[i];
        }
        return v;
      }
      case Kind::two_sided_pareto:
        return std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }

  /// Stable index of the centred jump's domain of attraction.
  double stable_index() const {
    return kind_ == Kind::two_sided_pareto ? alpha_ : 2.0;
  }

  /// Normaliser b(n) for centred partial sums: sqrt(n Var) with finite
  /// variance, n^(1/alpha) for the Pareto kind (slowly varying factors at
  /// alpha = 2 are not modelled).
  double normalizer(double n) const {
    if (kind_ == Kind::two_sided_pareto) return std::pow(n, 1.0 / alpha_);
    return std::sqrt(n * variance());
  }

  /// E|jump|, exact for pm1/lattice and numerically summed for Pareto.
  double mean_abs() const {
    switch (kind_) {
      case Kind::pm1:
        return 1.0;
      case Kind::lattice_pmf: {
        double m = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i)
          m += std::abs(static_cast<double>(values_[i])) * probs_[i];
        return m;
      }
      case Kind::two_sided_pareto:
        return pareto_mean_abs();
    }
    return 0.0;
  }

  /// P{jump = 0}.
  double prob_zero() const {
    switch (kind_) {
      case Kind::pm1:
        return 0.0;
      case Kind::lattice_pmf:
        for (std::size_t i = 0; i < values_.size(); ++i)
          if (values_[i] == 0) return probs_[i];
        return 0.0;
      case Kind::two_sided_pareto:
        return pareto_prob_equal(-shift_);
    }
    return 0.0;
  }

  std::int64_t sample(RngStream& rng) const {
    switch (kind_) {
      case Kind::pm1:
        return rng.sign();
      case Kind::lattice_pmf: {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        const auto idx = static_cast<std::size_t>(
            std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                     static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
        return values_[idx];
      }
      case Kind::two_sided_pareto: {
        const int s = rng.sign();
        const double mag = scale_ * std::pow(rng.uniform_open(), -1.0 / alpha_);
        // Magnitudes beyond 2^62 are clipped; probability < 1e-27 for alpha >= 1.
        const double clipped = std::min(mag, 4.6e18);
        return shift_ + s * static_cast<std::int64_t>(std::floor(clipped + 0.5));
      }
    }
    return 0;
  }

  std::string describe() const {
    std::ostringstream os;
    switch (kind_) {
      case Kind::pm1:
        os << "pm1";
        break;
      case Kind::lattice_pmf:
        os << "lattice:";
        for (std::size_t i = 0; i < values_.size(); ++i) {
          if (i) os << ',';
          os << values_[i] << ':' << probs_[i];
        }
        break;
      case Kind::two_sided_pareto:
        os << "pareto:alpha=" << alpha_ << ",scale=" << scale_
           << ",shift=" << shift_;
        break;
    }
    return os.str();
  }

 private:
  explicit JumpDistribution(Kind k) : kind_(k) {}

  // P{round_half_away(scale * U^(-1/alpha)) = k}, k >= 0.
  double pareto_magnitude_pmf(std::int64_t k) const {
    auto tail = [&](double x) {  // P{scale * U^(-1/alpha) >= x}
      return x <= scale_ ? 1.0 : std::pow(scale_ / x, alpha_);
    };
    if (k == 0) return 1.0 - tail(0.5);
    const double kk = static_cast<double>(k);
    return tail(kk - 0.5) - tail(kk + 0.5);
  }

  double pareto_prob_equal(std::int64_t v) const {
    if (v == 0) return pareto_magnitude_pmf(0);
    return 0.5 * pareto_magnitude_pmf(v < 0 ? -v : v);
  }

  double pareto_mean_abs() const {
    // E|shift + s*K| summed over K until the remaining tail is negligible,
    // then the continuous tail integral of scale^alpha * x^-alpha.
    double m = 0.0;
    const std::int64_t kmax = 1 << 20;
    for (std::int64_t k = 0; k <= kmax; ++k) {
      const double p = pareto_magnitude_pmf(k);
      if (k == 0) {
        m += p * std::abs(static_cast<double>(shift_));
      } else {
        m += 0.5 * p * (std::abs(static_cast<double>(shift_ + k)) +
                        std::abs(static_cast<double>(shift_ - k)));
      }
    }
    const double x = static_cast<double>(kmax) + 0.5;
    m += std::pow(scale_, alpha_) * alpha_ / (alpha_ - 1.0) *
         std::pow(x, 1.0 - alpha_);
    return m;
  }

  Kind kind_;
  std::vector<std::int64_t> values_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
  double alpha_ = 2.0;
  double scale_ = 1.0;
  std::int64_t shift_ = 0;
};

}  // namespace cmchain

#endif  // CMCHAIN_JUMP_HPP_
