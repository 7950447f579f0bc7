// Copyright 2026 The soc_alloc Authors
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

// Scalar functions of the standard Gaussian used to turn probabilistic
// constraints into deterministic second-order cone constraints.
//
// The upper tail 1 - Phi(z) is always evaluated through erfc so that the
// mean-excess function h(z), which divides by it, stays accurate far into
// the right tail. Inverses are computed by bracketing and bisection against
// the forward functions.

#ifndef SOC_ALLOC_PROB_MATH_HPP_
#define SOC_ALLOC_PROB_MATH_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "soc_alloc/error.hpp"

namespace soc_alloc {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;
// h(0), the largest cap for which the conditional-expectation branch still
// yields a positive safety coefficient.
inline constexpr double kMeanExcessAtZero = 0.7978845608028653558798921198687637;

namespace detail {

inline void require_finite(double z, const char* what) {
  if (!std::isfinite(z)) {
    throw DomainError(std::string(what) + ": argument must be finite");
  }
}

// Bisection on a monotone predicate `below(mid)` that is true on [lo, root)
// and false on (root, hi]. Runs until the bracket cannot shrink further.
template <class Below>
double bisect(double lo, double hi, Below below) {
  for (int iter = 0; iter < 2100; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    (below(mid) ? lo : hi) = mid;
  }
  return lo + 0.5 * (hi - lo);
}

// h(z) = 1 / (z + 2 / (z + 3 / (z + ...))), the tail of the Laplace
// continued fraction for the Mills ratio. Free of the cancellation in
// phi/Q - z; converged to rounding for z >= 3 with 120 terms.
inline double mean_excess_continued_fraction(double z) {
  double tail = z;
  for (int k = 120; k >= 2; --k) tail = z + k / tail;
  return 1.0 / tail;
}

}  // namespace detail

inline double std_normal_pdf(double z) {
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

/// Standard Gaussian CDF Phi(z).
inline double std_normal_cdf(double z) {
  detail::require_finite(z, "std_normal_cdf");
  return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0);
}

/// Upper tail 1 - Phi(z), evaluated directly.
inline double std_normal_sf(double z) {
  detail::require_finite(z, "std_normal_sf");
  return 0.5 * std::erfc(z * std::numbers::sqrt2 / 2.0);
}

/// Phi^{-1}(p) for p in (0, 1). The search always runs in the lower tail
/// (using 1 - p for p > 1/2, which is exact in binary floating point) so that
/// small tail probabilities keep their relative precision.
inline double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("std_normal_quantile: p must lie in (0, 1)");
  }
  if (p == 0.5) return 0.0;
  const bool upper = p > 0.5;
  const double target = upper ? 1.0 - p : p;
  double lo = -1.0;
  while (std_normal_cdf(lo) > target) lo *= 2.0;
  const double z = detail::bisect(lo, 0.0, [target](double mid) {
    return std_normal_cdf(mid) < target;
  });
  return upper ? -z : z;
}

/// Mean-excess function h(z) = phi(z) / (1 - Phi(z)) - z, i.e.
/// E[Z - z | Z > z] for a standard Gaussian Z. Strictly decreasing, with
/// h(0) = sqrt(2/pi), h(z) ~ 1/z as z -> +inf and h(z) ~ -z as z -> -inf.
inline double mean_excess_h(double z) {
  detail::require_finite(z, "mean_excess_h");
  if (z >= 3.0) return detail::mean_excess_continued_fraction(z);
  return std_normal_pdf(z) / std_normal_sf(z) - z;
}

/// h^{-1}(gamma_tilde) for gamma_tilde > 0.
inline double mean_excess_inverse(double gamma_tilde) {
  if (!(gamma_tilde > 0.0) || !std::isfinite(gamma_tilde)) {
    throw DomainError("mean_excess_inverse: cap must be positive and finite");
  }
  double lo = -1.0;
  double hi = 1.0;
  while (mean_excess_h(lo) < gamma_tilde) lo *= 2.0;
  while (mean_excess_h(hi) > gamma_tilde) hi *= 2.0;
  return detail::bisect(lo, hi, [gamma_tilde](double mid) {
    return mean_excess_h(mid) > gamma_tilde;
  });
}

/// Number of standard deviations of slack a merged chance /
/// conditional-expectation constraint requires.
struct SafetyCoefficient {
  double psi = 0.0;

  friend bool operator==(const SafetyCoefficient&,
                         const SafetyCoefficient&) = default;
};

/// psi = max{Phi^{-1}(eta), h^{-1}(gamma_tilde)} over the branches present.
/// A negative maximum is clamped to zero: a constraint never receives less
/// slack than its mean.
inline SafetyCoefficient safety_coefficient(std::optional<double> eta,
                                            std::optional<double> gamma_tilde) {
  if (!eta && !gamma_tilde) {
    throw ConfigError(
        "safety_coefficient: need a confidence level or a conditional-"
        "expectation cap");
  }
  double psi = 0.0;
  if (eta) {
    if (!(*eta > 0.0 && *eta < 1.0)) {
      throw DomainError("safety_coefficient: eta must lie in (0, 1)");
    }
    psi = std::max(psi, std_normal_quantile(*eta));
  }
  if (gamma_tilde) psi = std::max(psi, mean_excess_inverse(*gamma_tilde));
  return {psi};
}

}  // namespace soc_alloc

#endif  // SOC_ALLOC_PROB_MATH_HPP_
