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

// Offline baseline: the optimum of the LP relaxation of the linearized
// problem, obtained by minimizing its Lagrangian dual
//
//   f(p) = sum_j p_j b_j + sum_t max(0, max_l (c_t - p^T A_tilde_t) e_l),
//
// over p >= 0. By LP strong duality min f equals the relaxation optimum.
// The minimizer lies in {p >= 0, 1^T p <= c_max / d_min}.
//
// Two minimizers are provided:
//   kSmoothedNewton  log-sum-exp smoothing of the inner max plus a log
//                    barrier on p >= 0, solved by damped Newton steps while
//                    the smoothing is driven to zero. The smoothed weights
//                    form a fractional primal solution, so every iterate
//                    comes with a certified duality gap.
//   kSubgradient     projected subgradient descent over the box above with
//                    steps diameter / sqrt(iter) and best-iterate tracking.

#ifndef SOC_ALLOC_BASELINE_HPP_
#define SOC_ALLOC_BASELINE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "soc_alloc/error.hpp"
#include "soc_alloc/model.hpp"
#include "soc_alloc/transform.hpp"

namespace soc_alloc {

struct DualEvaluation {
  double value = 0.0;
  std::vector<double> subgradient;  // b - sum_t A_tilde_t x_t(p)
};

struct DualCertificate {
  std::vector<double> p_star;
  double value = 0.0;  // f(p_star), an upper bound on the LP optimum
  std::size_t iterations = 0;
  // Relative optimality tolerance achieved. For the smoothed Newton method
  // this is a certified duality gap (value - primal) / |value|; for the
  // subgradient method it is the relative improvement over the last
  // patience window.
  double residual = 0.0;
};

enum class DualMethod { kSmoothedNewton, kSubgradient };

struct DualOptions {
  double tol = 1e-6;
  DualMethod method = DualMethod::kSmoothedNewton;
  std::size_t max_evaluations = 20000;
  std::size_t patience = 500;  // subgradient window
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, DualCertificate best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const DualCertificate& best() const { return best_; }

 private:
  DualCertificate best_;
};

/// c_max / d_min; the dual optimum satisfies 1^T p <= this.
inline double dual_box_radius(const Instance& instance) {
  double c_max = -std::numeric_limits<double>::infinity();
  for (const Request& r : instance.requests) {
    for (double c : r.c) c_max = std::max(c_max, c);
  }
  const double d_min = *std::min_element(instance.d.begin(), instance.d.end());
  return std::max(c_max, 0.0) / d_min;
}

/// Exact f(p) and one subgradient, in a single pass over the requests.
inline DualEvaluation dual_value(std::span<const double> p,
                                 const LinearizedInstance& lin) {
  const Instance& inst = lin.instance();
  const std::size_t m = inst.m;
  const std::size_t k = inst.k;
  if (p.size() != m) throw StructuralError("dual_value: p has wrong size");
  for (double v : p) {
    if (!(v >= 0.0)) throw DomainError("dual_value: p must be nonnegative");
  }
  DualEvaluation out;
  out.subgradient.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    out.value += p[j] * inst.budget(j);
    out.subgradient[j] = inst.budget(j);
  }
  for (std::size_t t = 0; t < lin.n(); ++t) {
    const Matrix& cols = lin.a_tilde[t];
    const std::vector<double>& c = inst.requests[t].c;
    double best = 0.0;
    std::size_t arg = k;
    for (std::size_t l = 0; l < k; ++l) {
      double v = c[l];
      for (std::size_t j = 0; j < m; ++j) v -= p[j] * cols(j, l);
      if (v > best) {
        best = v;
        arg = l;
      }
    }
    out.value += best;
    if (arg < k) {
      for (std::size_t j = 0; j < m; ++j) out.subgradient[j] -= cols(j, arg);
    }
  }
  return out;
}

namespace detail {

// Euclidean projection onto {p >= 0, sum(p) <= radius}.
inline void project_capped_orthant(std::vector<double>& p, double radius) {
  for (double& v : p) v = std::max(v, 0.0);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (total <= radius) return;
  std::vector<double> sorted = p;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double prefix = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    prefix += sorted[i];
    const double candidate = (prefix - radius) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) theta = candidate;
  }
  for (double& v : p) v = std::max(v - theta, 0.0);
}

// In-place Cholesky solve of the m x m system H x = rhs (row-major H).
// Returns false if H is not numerically positive definite.
inline bool cholesky_solve(std::vector<double> h, std::vector<double>& rhs,
                           std::size_t m) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = h[i * m + j];
      for (std::size_t q = 0; q < j; ++q) s -= h[i * m + q] * h[j * m + q];
      if (i == j) {
        if (!(s > 0.0)) return false;
        h[i * m + i] = std::sqrt(s);
      } else {
        h[i * m + j] = s / h[j * m + j];
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    double s = rhs[i];
    for (std::size_t q = 0; q < i; ++q) s -= h[i * m + q] * rhs[q];
    rhs[i] = s / h[i * m + i];
  }
  for (std::size_t i = m; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t q = i + 1; q < m; ++q) s -= h[q * m + i] * rhs[q];
    rhs[i] = s / h[i * m + i];
  }
  return true;
}

struct SmoothedEval {
  double objective = 0.0;  // smoothed dual plus barrier
  double exact = 0.0;      // f(p)
  double primal_revenue = 0.0;
  std::vector<double> primal_usage;  // sum_t A_tilde_t w_t
  std::vector<double> grad;
  std::vector<double> hess;  // m x m row-major
};

inline SmoothedEval smoothed_eval(const LinearizedInstance& lin,
                                  std::span<const double> p, double mu,
                                  bool with_derivatives) {
  const Instance& inst = lin.instance();
  const std::size_t m = inst.m;
  const std::size_t k = inst.k;
  SmoothedEval e;
  e.primal_usage.assign(m, 0.0);
  if (with_derivatives) {
    e.grad.assign(m, 0.0);
    e.hess.assign(m * m, 0.0);
  }
  std::vector<double> s(k);
  std::vector<double> w(k);
  std::vector<double> mean(m);
  const double inv_mu = 1.0 / mu;
  for (std::size_t j = 0; j < m; ++j) {
    const double b = inst.budget(j);
    e.objective += p[j] * b - mu * std::log(p[j]);
    e.exact += p[j] * b;
  }
  for (std::size_t t = 0; t < lin.n(); ++t) {
    const Matrix& cols = lin.a_tilde[t];
    const std::vector<double>& c = inst.requests[t].c;
    double top = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
      double v = c[l];
      for (std::size_t j = 0; j < m; ++j) v -= p[j] * cols(j, l);
      s[l] = v;
      top = std::max(top, v);
    }
    double z = std::exp(-top * inv_mu);
    for (std::size_t l = 0; l < k; ++l) {
      w[l] = std::exp((s[l] - top) * inv_mu);
      z += w[l];
    }
    e.objective += top + mu * std::log(z);
    e.exact += top;
    for (std::size_t l = 0; l < k; ++l) {
      w[l] /= z;
      e.primal_revenue += w[l] * c[l];
    }
    for (std::size_t j = 0; j < m; ++j) {
      double a = 0.0;
      for (std::size_t l = 0; l < k; ++l) a += w[l] * cols(j, l);
      mean[j] = a;
      e.primal_usage[j] += a;
    }
    if (!with_derivatives) continue;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double second = 0.0;
        for (std::size_t l = 0; l < k; ++l) {
          second += w[l] * cols(i, l) * cols(j, l);
        }
        e.hess[i * m + j] += inv_mu * (second - mean[i] * mean[j]);
      }
    }
  }
  if (with_derivatives) {
    for (std::size_t j = 0; j < m; ++j) {
      e.grad[j] = inst.budget(j) - e.primal_usage[j] - mu / p[j];
      e.hess[j * m + j] += mu / (p[j] * p[j]);
      for (std::size_t i = 0; i < j; ++i) e.hess[i * m + j] = e.hess[j * m + i];
    }
  }
  return e;
}

// Largest primal value certified by the smoothed weights: scale them down
// until every resource fits its budget.
inline double certified_primal(const SmoothedEval& e, const Instance& inst) {
  double scale = 1.0;
  for (std::size_t j = 0; j < inst.m; ++j) {
    if (e.primal_usage[j] > inst.budget(j)) {
      scale = std::min(scale, inst.budget(j) / e.primal_usage[j]);
    }
  }
  return scale * e.primal_revenue;
}

// max_j |grad_j| / b_j.
inline double scaled_grad_norm(const SmoothedEval& e, const Instance& inst) {
  double worst = 0.0;
  for (std::size_t j = 0; j < inst.m; ++j) {
    worst = std::max(worst, std::abs(e.grad[j]) / inst.budget(j));
  }
  return worst;
}

inline DualCertificate minimize_smoothed_newton(const LinearizedInstance& lin,
                                                const DualOptions& opts,
                                                double radius, double c_max) {
  const Instance& inst = lin.instance();
  const std::size_t m = inst.m;
  std::vector<double> p(m, 0.1 * radius / static_cast<double>(m));
  double mu = c_max;
  std::size_t evals = 0;
  DualCertificate best;
  best.value = std::numeric_limits<double>::infinity();
  best.residual = std::numeric_limits<double>::infinity();
  double best_lower = -std::numeric_limits<double>::infinity();

  std::vector<double> trial(m);
  while (evals < opts.max_evaluations) {
    SmoothedEval e = smoothed_eval(lin, p, mu, true);
    ++evals;
    for (int it = 0; it < 100 && evals < opts.max_evaluations; ++it) {
      std::vector<double> dir(m);
      for (std::size_t j = 0; j < m; ++j) dir[j] = -e.grad[j];
      std::vector<double> hess = e.hess;
      bool solved = cholesky_solve(hess, dir, m);
      for (double ridge = 1e-12; !solved && ridge < 1e6; ridge *= 100.0) {
        hess = e.hess;
        double trace = 0.0;
        for (std::size_t j = 0; j < m; ++j) trace += hess[j * m + j];
        for (std::size_t j = 0; j < m; ++j) {
          hess[j * m + j] += ridge * std::max(trace, 1.0);
        }
        for (std::size_t j = 0; j < m; ++j) dir[j] = -e.grad[j];
        solved = cholesky_solve(hess, dir, m);
      }
      if (!solved) break;
      double slope = 0.0;
      for (std::size_t j = 0; j < m; ++j) slope += e.grad[j] * dir[j];
      if (!(slope < 0.0)) break;
      // Near a kink the Hessian is of order 1/mu, so a tiny Newton decrement
      // can still hide a large usage residual; stop on the gradient instead.
      if (scaled_grad_norm(e, inst) <= 1e-12) break;

      double alpha = 1.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (dir[j] < 0.0) alpha = std::min(alpha, 0.99 * p[j] / -dir[j]);
      }
      bool moved = false;
      for (int ls = 0; ls < 60 && evals < opts.max_evaluations; ++ls) {
        for (std::size_t j = 0; j < m; ++j) trial[j] = p[j] + alpha * dir[j];
        SmoothedEval next = smoothed_eval(lin, trial, mu, true);
        ++evals;
        // Once the objective change drops below rounding, fall back to
        // requiring a smaller gradient.
        const bool armijo = next.objective <= e.objective + 0.25 * alpha * slope;
        const bool flat =
            next.objective <= e.objective + 1e-14 * std::abs(e.objective) &&
            scaled_grad_norm(next, inst) < scaled_grad_norm(e, inst);
        if (armijo || flat) {
          p = trial;
          e = std::move(next);
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) break;
    }

    // Any dual point bounds from above and any scaled primal from below, so
    // the gap is measured between the best of each seen so far.
    if (e.exact < best.value) {
      best.p_star = p;
      best.value = e.exact;
    }
    best_lower = std::max(best_lower, certified_primal(e, inst));
    const double residual =
        (best.value - best_lower) / std::max(std::abs(best.value), 1e-300);
    best.residual = std::max(residual, 0.0);
    best.iterations = evals;
    if (residual <= opts.tol) return best;
    mu *= 0.125;
    if (mu < 1e-16 * c_max) break;
  }
  throw ConvergenceError("minimize_dual: duality gap above tolerance", best);
}

inline DualCertificate minimize_subgradient(const LinearizedInstance& lin,
                                            const DualOptions& opts,
                                            double radius) {
  const std::size_t m = lin.instance().m;
  const double diameter = m > 1 ? radius * std::sqrt(2.0) : radius;
  std::vector<double> p(m, 0.0);
  DualEvaluation cur = dual_value(p, lin);
  DualCertificate best{p, cur.value, 1, std::numeric_limits<double>::infinity()};
  double window_start = best.value;
  const std::size_t patience = std::max<std::size_t>(opts.patience, 1);

  for (std::size_t iter = 1; iter < opts.max_evaluations; ++iter) {
    double norm = 0.0;
    for (double g : cur.subgradient) norm += g * g;
    norm = std::sqrt(norm);
    if (norm == 0.0) {  // 0 is a subgradient: p is optimal
      best.residual = 0.0;
      return best;
    }
    const double step = diameter / std::sqrt(static_cast<double>(iter)) / norm;
    for (std::size_t j = 0; j < m; ++j) p[j] -= step * cur.subgradient[j];
    project_capped_orthant(p, radius);
    cur = dual_value(p, lin);
    best.iterations = iter + 1;
    if (cur.value < best.value) {
      best.value = cur.value;
      best.p_star = p;
    }
    if (iter % patience == 0) {
      const double improvement =
          (window_start - best.value) / std::max(std::abs(best.value), 1e-300);
      best.residual = improvement;
      if (improvement < opts.tol) return best;
      window_start = best.value;
    }
  }
  throw ConvergenceError("minimize_dual: evaluation cap reached", best);
}

}  // namespace detail

/// Minimizes the dual function and returns the LP-relaxation optimum with
/// its dual certificate. Throws ConvergenceError (carrying the best
/// certificate found) when the tolerance is not reached within
/// opts.max_evaluations dual evaluations.
inline DualCertificate minimize_dual(const LinearizedInstance& lin,
                                     const DualOptions& opts = {}) {
  if (!(opts.tol > 0.0)) throw DomainError("minimize_dual: tol must be positive");
  const Instance& inst = lin.instance();
  if (lin.n() != inst.requests.size() || inst.d.size() != inst.m) {
    throw StructuralError("minimize_dual: inconsistent linearization");
  }
  const double radius = dual_box_radius(inst);
  if (radius <= 0.0) {
    // No positive revenue anywhere: the box collapses to p = 0.
    std::vector<double> zero(inst.m, 0.0);
    return {zero, dual_value(zero, lin).value, 1, 0.0};
  }
  double c_max = 0.0;
  for (const Request& r : inst.requests) {
    for (double c : r.c) c_max = std::max(c_max, c);
  }
  if (opts.method == DualMethod::kSubgradient) {
    return detail::minimize_subgradient(lin, opts, radius);
  }
  return detail::minimize_smoothed_newton(lin, opts, radius, c_max);
}

}  // namespace soc_alloc

#endif  // SOC_ALLOC_BASELINE_HPP_
