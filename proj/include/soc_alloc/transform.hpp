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

// Stochastic -> second-order cone -> linear transformation of an instance.

#ifndef SOC_ALLOC_TRANSFORM_HPP_
#define SOC_ALLOC_TRANSFORM_HPP_

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "soc_alloc/error.hpp"
#include "soc_alloc/model.hpp"
#include "soc_alloc/prob_math.hpp"

namespace soc_alloc {

/// Returns a copy of `instance` with risk.psi populated:
/// psi_j = max{Phi^{-1}(eta_j), h^{-1}(gamma_tilde_j)} over the branches
/// given for constraint j. After this the cone constraints
///   sum_t a_bar_tj^T x_t + psi_j sqrt(sum_t x_t^T K_tj x_t) <= n d_j
/// are fully determined.
inline Instance to_soc(Instance instance) {
  const RiskSpec& risk = instance.risk;
  if (!risk.eta && !risk.gamma_tilde) {
    throw ConfigError("to_soc: risk specification is empty");
  }
  const std::size_t m = instance.m;
  if ((risk.eta && risk.eta->size() != m) ||
      (risk.gamma_tilde && risk.gamma_tilde->size() != m)) {
    throw StructuralError("to_soc: risk vectors must have m entries");
  }
  std::vector<double> psi(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::optional<double> eta;
    std::optional<double> cap;
    if (risk.eta) eta = (*risk.eta)[j];
    if (risk.gamma_tilde) cap = (*risk.gamma_tilde)[j];
    psi[j] = safety_coefficient(eta, cap).psi;
  }
  instance.risk.psi = std::move(psi);
  return instance;
}

// Per-request pricing columns of the linearized problem,
// a_tilde_tj = a_bar_tj + (psi_j / sqrt(n)) gamma_tj.
// Holds a reference to the instance it was built from; the instance must
// outlive it.
struct LinearizedInstance {
  std::reference_wrapper<const Instance> base;
  std::vector<Matrix> a_tilde;

  const Instance& instance() const { return base.get(); }
  std::size_t n() const { return a_tilde.size(); }
};

/// Linearized pricing columns of one request given psi and the horizon n.
inline Matrix linearized_columns(const Request& request,
                                 std::span<const double> psi, std::size_t n) {
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix cols = request.a_bar;
  for (std::size_t j = 0; j < cols.rows; ++j) {
    if (psi[j] == 0.0) continue;
    for (std::size_t l = 0; l < cols.cols; ++l) {
      cols(j, l) += psi[j] * inv_sqrt_n * request.gamma(j, l);
    }
  }
  return cols;
}

inline LinearizedInstance linearize(const Instance& instance) {
  if (instance.risk.psi.size() != instance.m) {
    throw StructuralError("linearize: safety coefficients not populated");
  }
  if (instance.n == 0 || instance.requests.size() != instance.n) {
    throw StructuralError("linearize: request count does not match n");
  }
  LinearizedInstance lin{std::cref(instance), {}};
  lin.a_tilde.reserve(instance.n);
  for (const Request& r : instance.requests) {
    if (r.a_bar.rows != instance.m || r.k_diag.data.size() != r.a_bar.data.size()) {
      throw StructuralError("linearize: request has wrong shape");
    }
    lin.a_tilde.push_back(linearized_columns(r, instance.risk.psi, instance.n));
  }
  return lin;
}

}  // namespace soc_alloc

#endif  // SOC_ALLOC_TRANSFORM_HPP_
