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

// Online primal-dual allocation.
//
// Each arriving request is priced with the current dual vector p; the scheme
// with the largest positive reduced revenue is accepted, and p takes a
// projected subgradient step of size 1/sqrt(n). Three variants share the
// loop:
//
//   vanilla           pricing columns a_tilde (linearized cone constraint),
//                     fixed per-step target d.
//   marginal          pricing columns are the exact increase of the cone
//                     left-hand side g_j caused by each scheme, given what
//                     has been accepted so far; the same increase is what
//                     the dual step charges.
//   marginal_dynamic  as `marginal`, with the per-step target replaced by
//                     the remaining cone budget spread over the remaining
//                     steps.
//
// Both corrections use only revealed data and reduce to the vanilla rule
// when every psi_j is zero.

#ifndef SOC_ALLOC_ONLINE_HPP_
#define SOC_ALLOC_ONLINE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "soc_alloc/error.hpp"
#include "soc_alloc/model.hpp"
#include "soc_alloc/rng.hpp"
#include "soc_alloc/transform.hpp"

namespace soc_alloc {

enum class Variant { kVanilla, kMarginal, kMarginalDynamic };

inline std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kVanilla:
      return "vanilla";
    case Variant::kMarginal:
      return "marginal";
    case Variant::kMarginalDynamic:
      return "marginal-dynamic";
  }
  return "unknown";
}

inline std::optional<Variant> parse_variant(std::string_view name) {
  if (name == "vanilla") return Variant::kVanilla;
  if (name == "marginal") return Variant::kMarginal;
  if (name == "marginal-dynamic" || name == "marginal+dynamic" ||
      name == "marginal_dynamic") {
    return Variant::kMarginalDynamic;
  }
  return std::nullopt;
}

struct VariantConfig {
  Variant variant = Variant::kVanilla;
  std::uint64_t rng_seed = 0;  // tie-breaking stream
  bool record_path = false;    // keep per-step v_t and p in the trace
};

struct DualState {
  std::vector<double> p;
  double step = 0.0;                  // 1 / sqrt(n)
  std::vector<double> mean_accum;     // sum of accepted a_bar
  std::vector<double> q_accum;        // Q_j, sum of accepted variances
  std::vector<double> g_accum;        // mean_accum + psi * sqrt(q_accum)
  std::size_t t = 1;                  // 1-based index of the next request

  static DualState initial(std::size_t m, std::size_t n) {
    DualState s;
    s.p.assign(m, 0.0);
    s.step = 1.0 / std::sqrt(static_cast<double>(n));
    s.mean_accum.assign(m, 0.0);
    s.q_accum.assign(m, 0.0);
    s.g_accum.assign(m, 0.0);
    return s;
  }

  // Folds an accepted scheme into the cone accumulators.
  void commit(const Request& request, Decision decision,
              std::span<const double> psi) {
    if (!decision.accepted()) return;
    const std::size_t l = *decision.scheme;
    for (std::size_t j = 0; j < p.size(); ++j) {
      mean_accum[j] += request.a_bar(j, l);
      q_accum[j] += request.k_diag(j, l);
      g_accum[j] = mean_accum[j] + psi[j] * std::sqrt(q_accum[j]);
    }
  }
};

/// value[l] = c[l] - sum_j p[j] * columns(j, l).
inline void reduced_values_into(std::span<const double> p,
                                std::span<const double> c,
                                const Matrix& columns,
                                std::vector<double>& out) {
  out.assign(c.begin(), c.end());
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double pj = p[j];
    if (pj == 0.0) continue;
    for (std::size_t l = 0; l < out.size(); ++l) out[l] -= pj * columns(j, l);
  }
}

inline std::vector<double> reduced_values(std::span<const double> p,
                                          const Request& request,
                                          const Matrix& columns) {
  if (columns.rows != p.size() || columns.cols != request.c.size()) {
    throw StructuralError("reduced_values: pricing matrix has wrong shape");
  }
  std::vector<double> out;
  reduced_values_into(p, request.c, columns, out);
  return out;
}

struct StepChoice {
  Decision decision;
  double best_value = 0.0;  // v_t
};

namespace detail {

// Picks uniformly among the exact maximizers of `values` using draw number
// `t` of the tie stream. Accepts only if the maximum is strictly positive.
inline StepChoice choose(std::span<const double> values, std::uint64_t seed,
                         std::size_t t, std::vector<std::size_t>& ties) {
  const double best = *std::max_element(values.begin(), values.end());
  if (!(best > 0.0)) return {Decision::none(), best};
  ties.clear();
  for (std::size_t l = 0; l < values.size(); ++l) {
    if (values[l] == best) ties.push_back(l);
  }
  std::size_t pick = ties.front();
  if (ties.size() > 1) {
    const double u = to_unit(stream_key(seed, {t}));
    pick = ties[std::min(ties.size() - 1,
                         static_cast<std::size_t>(u * ties.size()))];
  }
  return {Decision::pick(pick), best};
}

}  // namespace detail

/// One online decision at step state.t against the given pricing columns
/// (a_tilde_t for the vanilla rule, marginal_soc_cost() for the corrected
/// ones).
inline StepChoice decide(const DualState& state, const Request& request,
                         const Matrix& pricing, const VariantConfig& config) {
  const std::vector<double> values = reduced_values(state.p, request, pricing);
  std::vector<std::size_t> ties;
  return detail::choose(values, config.rng_seed, state.t, ties);
}

/// p <- max(p + (consumption - d_target) / sqrt(n), 0); advances t.
inline void dual_update(DualState& state, std::span<const double> consumption,
                        std::span<const double> d_target) {
  for (std::size_t j = 0; j < state.p.size(); ++j) {
    state.p[j] =
        std::max(state.p[j] + state.step * (consumption[j] - d_target[j]), 0.0);
  }
  ++state.t;
}

// sqrt(q + v) - sqrt(q) without cancellation.
inline double sqrt_increment(double q, double v) {
  const double denom = std::sqrt(q + v) + std::sqrt(q);
  return denom > 0.0 ? v / denom : 0.0;
}

inline void marginal_soc_cost_into(const DualState& state,
                                   const Request& request,
                                   std::span<const double> psi, Matrix& out) {
  out = request.a_bar;
  for (std::size_t j = 0; j < out.rows; ++j) {
    if (psi[j] == 0.0) continue;
    for (std::size_t l = 0; l < out.cols; ++l) {
      out(j, l) += psi[j] * sqrt_increment(state.q_accum[j], request.k_diag(j, l));
    }
  }
}

/// entry(j, l) = a_bar(j, l) + psi_j (sqrt(Q_j + k_diag(j, l)) - sqrt(Q_j)):
/// the exact growth of g_j if scheme l is accepted now.
inline Matrix marginal_soc_cost(const DualState& state, const Request& request,
                                std::span<const double> psi) {
  if (psi.size() != request.resources() ||
      state.q_accum.size() != request.resources()) {
    throw StructuralError("marginal_soc_cost: resource count mismatch");
  }
  Matrix out;
  marginal_soc_cost_into(state, request, psi, out);
  return out;
}

inline void dynamic_budget_into(const DualState& state,
                                std::span<const double> d, std::size_t n,
                                std::vector<double>& out) {
  out.resize(d.size());
  const double remaining_steps = static_cast<double>(n - state.t + 1);
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double left = static_cast<double>(n) * d[j] - state.g_accum[j];
    out[j] = std::max(left / remaining_steps, 0.0);
  }
}

/// Remaining cone budget per remaining step:
/// d_t[j] = max((n d_j - g_accum_j) / (n - t + 1), 0).
inline std::vector<double> dynamic_budget(const DualState& state,
                                          std::span<const double> d,
                                          std::size_t n) {
  if (state.t < 1 || state.t > n) {
    throw StructuralError("dynamic_budget: step index outside 1..n");
  }
  std::vector<double> out;
  dynamic_budget_into(state, d, n, out);
  return out;
}

/// Step-by-step online allocator. Requests are fed in arrival order and
/// each decision is final.
class OnlineSolver {
 public:
  OnlineSolver(std::size_t n, std::vector<double> d, std::vector<double> psi,
               VariantConfig config)
      : n_(n),
        d_(std::move(d)),
        psi_(std::move(psi)),
        config_(config),
        state_(DualState::initial(d_.size(), n)),
        trace_(SolutionTrace::empty(d_.size())),
        consumption_(d_.size(), 0.0),
        target_(d_) {
    if (n_ == 0) throw StructuralError("OnlineSolver: n must be positive");
    if (psi_.size() != d_.size()) {
      throw StructuralError("OnlineSolver: psi and d sizes differ");
    }
    trace_.decisions.reserve(n_);
    if (config_.record_path) {
      trace_.dual_path.emplace();
      trace_.best_values.emplace();
    }
  }

  /// Decides request state().t. `linear_columns` are its linearized pricing
  /// columns; the corrected variants ignore them.
  StepChoice step(const Request& request, const Matrix& linear_columns) {
    const std::size_t m = d_.size();
    if (state_.t > n_) throw StructuralError("OnlineSolver: more than n requests");
    if (request.a_bar.rows != m || request.k_diag.rows != m ||
        request.a_bar.cols != request.c.size() ||
        linear_columns.rows != m || linear_columns.cols != request.c.size()) {
      throw StructuralError("OnlineSolver: request " + std::to_string(state_.t) +
                            " has wrong shape");
    }
    const Matrix* pricing = &linear_columns;
    if (config_.variant != Variant::kVanilla) {
      marginal_soc_cost_into(state_, request, psi_, marginal_cols_);
      pricing = &marginal_cols_;
    }
    reduced_values_into(state_.p, request.c, *pricing, values_);
    const StepChoice choice =
        detail::choose(values_, config_.rng_seed, state_.t, ties_);

    if (choice.decision.accepted()) {
      const std::size_t l = *choice.decision.scheme;
      for (std::size_t j = 0; j < m; ++j) consumption_[j] = (*pricing)(j, l);
    } else {
      std::fill(consumption_.begin(), consumption_.end(), 0.0);
    }
    if (config_.variant == Variant::kMarginalDynamic) {
      dynamic_budget_into(state_, d_, n_, target_);
    }
    dual_update(state_, consumption_, target_);
    state_.commit(request, choice.decision, psi_);
    trace_.record(request, choice.decision);
    if (config_.record_path) {
      trace_.dual_path->push_back(state_.p);
      trace_.best_values->push_back(choice.best_value);
    }
    return choice;
  }

  const DualState& state() const { return state_; }
  const SolutionTrace& trace() const { return trace_; }
  SolutionTrace take_trace() && { return std::move(trace_); }

 private:
  std::size_t n_;
  std::vector<double> d_;
  std::vector<double> psi_;
  VariantConfig config_;
  DualState state_;
  SolutionTrace trace_;
  Matrix marginal_cols_;
  std::vector<double> values_;
  std::vector<double> consumption_;
  std::vector<double> target_;
  std::vector<std::size_t> ties_;
};

/// Single pass over the requests in arrival order. The decision at step t
/// depends only on requests 1..t and the tie-breaking seed.
inline SolutionTrace run_online(const Instance& instance,
                                const LinearizedInstance& lin,
                                const VariantConfig& config) {
  if (lin.n() != instance.n || instance.requests.size() != instance.n) {
    throw StructuralError("run_online: request count mismatch");
  }
  if (instance.risk.psi.size() != instance.m || instance.d.size() != instance.m) {
    throw StructuralError("run_online: instance not transformed");
  }
  OnlineSolver solver(instance.n, instance.d, instance.risk.psi, config);
  for (std::size_t t = 0; t < instance.n; ++t) {
    if (instance.requests[t].c.size() != instance.k) {
      throw StructuralError("run_online: request " + std::to_string(t) +
                            " has wrong shape");
    }
    solver.step(instance.requests[t], lin.a_tilde[t]);
  }
  return std::move(solver).take_trace();
}

}  // namespace soc_alloc

#endif  // SOC_ALLOC_ONLINE_HPP_
