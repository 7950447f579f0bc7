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

#ifndef SOC_ALLOC_MODEL_HPP_
#define SOC_ALLOC_MODEL_HPP_

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "soc_alloc/error.hpp"
#include "soc_alloc/prob_math.hpp"

namespace soc_alloc {

// Dense row-major matrix; rows index resources, columns index schemes.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// One arriving request: revenue per scheme, plus the mean and variance of
// every scheme's consumption of every resource. Only the covariance diagonal
// is kept since a single-choice selection never touches off-diagonal terms.
struct Request {
  std::vector<double> c;  // k
  Matrix a_bar;           // m x k
  Matrix k_diag;          // m x k, variances

  std::size_t schemes() const { return c.size(); }
  std::size_t resources() const { return a_bar.rows; }

  // Standard deviation of scheme l's consumption of resource j; equals
  // sqrt(e_l^T K_j e_l).
  double gamma(std::size_t j, std::size_t l) const {
    return std::sqrt(k_diag(j, l));
  }

  friend bool operator==(const Request&, const Request&) = default;
};

struct RiskSpec {
  std::optional<std::vector<double>> eta;
  std::optional<std::vector<double>> gamma_tilde;
  // Derived; empty until populated by to_soc().
  std::vector<double> psi;

  friend bool operator==(const RiskSpec&, const RiskSpec&) = default;
};

struct Instance {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::vector<Request> requests;
  std::vector<double> d;  // per-step budget; total budget is n * d
  RiskSpec risk;

  double budget(std::size_t j) const { return static_cast<double>(n) * d[j]; }

  friend bool operator==(const Instance&, const Instance&) = default;
};

// At most one scheme per request. Scheme indices are 0-based in code and
// 1-based in serialized files.
struct Decision {
  std::optional<std::size_t> scheme;

  static Decision none() { return {}; }
  static Decision pick(std::size_t l) { return {l}; }
  bool accepted() const { return scheme.has_value(); }

  friend bool operator==(const Decision&, const Decision&) = default;
};

struct SolutionTrace {
  std::vector<Decision> decisions;
  std::optional<std::vector<std::vector<double>>> dual_path;  // p after each step
  std::optional<std::vector<double>> best_values;             // v_t per step
  double objective = 0.0;
  std::vector<double> mean_consumption;  // sum_t a_bar_tj^T x_t
  std::vector<double> variance_accum;    // sum_t x_t^T K_tj x_t

  static SolutionTrace empty(std::size_t m) {
    SolutionTrace trace;
    trace.mean_consumption.assign(m, 0.0);
    trace.variance_accum.assign(m, 0.0);
    return trace;
  }

  // Appends the decision for `request` and updates the running totals.
  void record(const Request& request, Decision decision) {
    decisions.push_back(decision);
    if (!decision.accepted()) return;
    const std::size_t l = *decision.scheme;
    objective += request.c[l];
    for (std::size_t j = 0; j < mean_consumption.size(); ++j) {
      mean_consumption[j] += request.a_bar(j, l);
      variance_accum[j] += request.k_diag(j, l);
    }
  }

  friend bool operator==(const SolutionTrace&, const SolutionTrace&) = default;
};

/// Left-hand side of the second-order cone constraints,
/// g_j = sum_t a_bar_tj^T x_t + psi_j * sqrt(sum_t x_t^T K_tj x_t).
inline std::vector<double> soc_lhs(const SolutionTrace& trace,
                                   const Instance& instance) {
  const std::size_t m = instance.m;
  if (trace.mean_consumption.size() != m || trace.variance_accum.size() != m) {
    throw StructuralError("soc_lhs: trace has wrong number of resources");
  }
  if (instance.risk.psi.size() != m) {
    throw StructuralError("soc_lhs: instance safety coefficients not populated");
  }
  std::vector<double> g(m);
  for (std::size_t j = 0; j < m; ++j) {
    g[j] = trace.mean_consumption[j] +
           instance.risk.psi[j] * std::sqrt(trace.variance_accum[j]);
  }
  return g;
}

struct Violation {
  std::string where;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks every structural and value invariant of an instance and reports
/// all violations found (empty result means the instance is well formed).
inline std::vector<Violation> validate_instance(const Instance& instance) {
  std::vector<Violation> out;
  auto add = [&out](std::string where, std::string message) {
    out.push_back({std::move(where), std::move(message)});
  };
  const std::size_t m = instance.m;
  const std::size_t k = instance.k;
  if (instance.n == 0) add("n", "request count must be positive");
  if (m == 0) add("m", "resource count must be positive");
  if (k == 0) add("k", "scheme count must be positive");
  if (instance.requests.size() != instance.n) {
    add("requests", "expected " + std::to_string(instance.n) + " requests, got " +
                        std::to_string(instance.requests.size()));
  }
  if (instance.d.size() != m) {
    add("d", "budget vector must have m entries");
  }
  for (std::size_t j = 0; j < instance.d.size(); ++j) {
    if (!(instance.d[j] > 0.0) || !std::isfinite(instance.d[j])) {
      add("d[" + std::to_string(j) + "]", "budget must be positive");
    }
  }

  const RiskSpec& risk = instance.risk;
  if (!risk.eta && !risk.gamma_tilde) {
    add("risk", "need confidence levels or conditional-expectation caps");
  }
  if (risk.eta) {
    if (risk.eta->size() != m) add("risk.eta", "must have m entries");
    for (std::size_t j = 0; j < risk.eta->size(); ++j) {
      const double e = (*risk.eta)[j];
      if (!(e > 0.0 && e < 1.0)) {
        add("risk.eta[" + std::to_string(j) + "]",
            "confidence level must lie in (0, 1)");
      }
    }
  }
  if (risk.gamma_tilde) {
    if (risk.gamma_tilde->size() != m) {
      add("risk.gamma_tilde", "must have m entries");
    }
    for (std::size_t j = 0; j < risk.gamma_tilde->size(); ++j) {
      const double g = (*risk.gamma_tilde)[j];
      if (!(g > 0.0) || !std::isfinite(g)) {
        add("risk.gamma_tilde[" + std::to_string(j) + "]",
            "cap must be positive");
      }
    }
  }
  if (!risk.psi.empty()) {
    if (risk.psi.size() != m) add("risk.psi", "must have m entries");
    for (double p : risk.psi) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        add("risk.psi", "safety coefficients must be nonnegative");
        break;
      }
    }
  }

  for (std::size_t t = 0; t < instance.requests.size(); ++t) {
    const Request& r = instance.requests[t];
    const std::string at = "requests[" + std::to_string(t) + "]";
    if (r.c.size() != k || r.a_bar.rows != m || r.a_bar.cols != k ||
        r.k_diag.rows != m || r.k_diag.cols != k ||
        r.a_bar.data.size() != m * k || r.k_diag.data.size() != m * k) {
      add(at, "dimensions do not match (m, k)");
      continue;
    }
    for (double v : r.c) {
      if (!std::isfinite(v)) {
        add(at + ".c", "revenue must be finite");
        break;
      }
    }
    for (double v : r.a_bar.data) {
      if (!std::isfinite(v)) {
        add(at + ".a_bar", "mean consumption must be finite");
        break;
      }
    }
    for (double v : r.k_diag.data) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        add(at + ".k_diag", "variance must be nonnegative");
        break;
      }
    }
  }
  return out;
}

}  // namespace soc_alloc

#endif  // SOC_ALLOC_MODEL_HPP_
