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

// Solution quality metrics.
//
// Under the Gaussian consumption model the total consumption of resource j
// is N(mean_j, sigma_j^2) with mean_j and sigma_j^2 taken from the trace, so
// both the holding probability and the conditional overshoot are analytic:
//
//   P(S_j <= b_j)               = Phi(z_j),  z_j = (b_j - mean_j) / sigma_j
//   E[(S_j - b_j)/sigma_j | S_j > b_j] = h(z_j)
//
// When sigma_j = 0 the consumption is deterministic: the holding probability
// is 1 if mean_j <= b_j and 0 otherwise, and the normalized overshoot is
// taken as 0 (v~_j = -gamma~_j), so an empty solution is metric-clean.

#ifndef SOC_ALLOC_METRICS_HPP_
#define SOC_ALLOC_METRICS_HPP_

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "soc_alloc/baseline.hpp"
#include "soc_alloc/error.hpp"
#include "soc_alloc/model.hpp"
#include "soc_alloc/prob_math.hpp"

namespace soc_alloc {

struct ProbabilityDeviation {
  double value = 0.0;                       // mean_j (eta_j - achieved_j)^+
  std::vector<double> achieved;             // Phi(z_j)
  std::vector<double> shortfall;            // (eta_j - achieved_j)^+
};

struct CeViolation {
  double normalized = 0.0;          // ||(v~)^+||_2
  double raw = 0.0;                 // ||(v)^+||_2
  std::vector<double> normalized_per_constraint;  // v~_j
  std::vector<double> raw_per_constraint;         // v_j = v~_j sigma_j
};

struct GapAndRatio {
  double gap = 0.0;
  std::optional<double> ratio_percent;  // empty when the baseline is <= 0
};

namespace detail {

inline void check_trace(const SolutionTrace& trace, const Instance& inst) {
  if (trace.mean_consumption.size() != inst.m ||
      trace.variance_accum.size() != inst.m || inst.d.size() != inst.m) {
    throw StructuralError("metrics: trace and instance disagree on m");
  }
}

}  // namespace detail

inline ProbabilityDeviation probability_deviation(const SolutionTrace& trace,
                                                  const Instance& inst) {
  detail::check_trace(trace, inst);
  if (!inst.risk.eta || inst.risk.eta->size() != inst.m) {
    throw ConfigError("probability deviation needs confidence levels (eta)");
  }
  ProbabilityDeviation out;
  out.achieved.resize(inst.m);
  out.shortfall.resize(inst.m);
  for (std::size_t j = 0; j < inst.m; ++j) {
    const double slack = inst.budget(j) - trace.mean_consumption[j];
    const double sigma = std::sqrt(trace.variance_accum[j]);
    double achieved = 0.0;
    if (sigma > 0.0) {
      achieved = std_normal_cdf(slack / sigma);
    } else {
      achieved = slack >= 0.0 ? 1.0 : 0.0;
    }
    out.achieved[j] = achieved;
    out.shortfall[j] = std::max((*inst.risk.eta)[j] - achieved, 0.0);
    out.value += out.shortfall[j];
  }
  out.value /= static_cast<double>(inst.m);
  return out;
}

inline GapAndRatio optimality_gap_and_ratio(const SolutionTrace& trace,
                                            const DualCertificate& baseline) {
  GapAndRatio out;
  out.gap = baseline.value - trace.objective;
  if (baseline.value > 0.0) {
    out.ratio_percent = trace.objective / baseline.value * 100.0;
  }
  return out;
}

inline CeViolation ce_violation(const SolutionTrace& trace,
                                const Instance& inst) {
  detail::check_trace(trace, inst);
  if (!inst.risk.gamma_tilde || inst.risk.gamma_tilde->size() != inst.m) {
    throw ConfigError(
        "conditional-expectation violation needs caps (gamma_tilde)");
  }
  CeViolation out;
  out.normalized_per_constraint.resize(inst.m);
  out.raw_per_constraint.resize(inst.m);
  double sq_norm = 0.0;
  double sq_raw = 0.0;
  for (std::size_t j = 0; j < inst.m; ++j) {
    const double cap = (*inst.risk.gamma_tilde)[j];
    const double sigma = std::sqrt(trace.variance_accum[j]);
    double v_norm = -cap;
    if (sigma > 0.0) {
      const double z = (inst.budget(j) - trace.mean_consumption[j]) / sigma;
      v_norm = mean_excess_h(z) - cap;
    }
    const double v_raw = v_norm * sigma;
    out.normalized_per_constraint[j] = v_norm;
    out.raw_per_constraint[j] = v_raw;
    if (v_norm > 0.0) sq_norm += v_norm * v_norm;
    if (v_raw > 0.0) sq_raw += v_raw * v_raw;
  }
  out.normalized = std::sqrt(sq_norm);
  out.raw = std::sqrt(sq_raw);
  return out;
}

/// g_j - b_j per constraint (cone left-hand side minus budget).
inline std::vector<double> soc_excess(const SolutionTrace& trace,
                                      const Instance& inst) {
  std::vector<double> g = soc_lhs(trace, inst);
  for (std::size_t j = 0; j < inst.m; ++j) g[j] -= inst.budget(j);
  return g;
}

/// ||(g(x) - b)^+||_2.
inline double soc_violation(const SolutionTrace& trace, const Instance& inst) {
  double sq = 0.0;
  for (double e : soc_excess(trace, inst)) {
    if (e > 0.0) sq += e * e;
  }
  return std::sqrt(sq);
}

struct MetricsReport {
  double objective = 0.0;
  std::optional<double> baseline;
  std::optional<double> optimality_gap;
  std::optional<double> competitive_ratio;  // percent
  std::optional<double> probability_deviation;
  std::optional<double> normalized_ce_violation;
  std::optional<double> ce_violation;
  double soc_violation = 0.0;

  // Per-constraint breakdowns; empty when the metric does not apply.
  std::vector<double> achieved_probability;
  std::vector<double> probability_shortfall;
  std::vector<double> normalized_ce_excess;  // v~_j
  std::vector<double> ce_excess;             // v_j
  std::vector<double> soc_excess;            // g_j - b_j
};

/// Every metric that the instance's risk specification supports; the gap and
/// ratio only when a baseline is supplied.
inline MetricsReport evaluate(const SolutionTrace& trace, const Instance& inst,
                              const DualCertificate* baseline = nullptr) {
  MetricsReport r;
  r.objective = trace.objective;
  if (baseline) {
    const GapAndRatio gr = optimality_gap_and_ratio(trace, *baseline);
    r.baseline = baseline->value;
    r.optimality_gap = gr.gap;
    r.competitive_ratio = gr.ratio_percent;
  }
  if (inst.risk.eta) {
    ProbabilityDeviation pd = probability_deviation(trace, inst);
    r.probability_deviation = pd.value;
    r.achieved_probability = std::move(pd.achieved);
    r.probability_shortfall = std::move(pd.shortfall);
  }
  if (inst.risk.gamma_tilde) {
    CeViolation ce = ce_violation(trace, inst);
    r.normalized_ce_violation = ce.normalized;
    r.ce_violation = ce.raw;
    r.normalized_ce_excess = std::move(ce.normalized_per_constraint);
    r.ce_excess = std::move(ce.raw_per_constraint);
  }
  r.soc_excess = soc_excess(trace, inst);
  double sq = 0.0;
  for (double e : r.soc_excess) {
    if (e > 0.0) sq += e * e;
  }
  r.soc_violation = std::sqrt(sq);
  return r;
}

// Fixed column order shared by the CSV writer and aggregate().
inline std::vector<std::pair<std::string, std::optional<double>>> scalar_fields(
    const MetricsReport& r) {
  return {{"objective", r.objective},
          {"baseline", r.baseline},
          {"optimality_gap", r.optimality_gap},
          {"competitive_ratio", r.competitive_ratio},
          {"probability_deviation", r.probability_deviation},
          {"normalized_ce_violation", r.normalized_ce_violation},
          {"ce_violation", r.ce_violation},
          {"soc_violation", r.soc_violation}};
}

inline std::vector<std::pair<std::string, const std::vector<double>*>>
per_constraint_fields(const MetricsReport& r) {
  return {{"achieved_probability", &r.achieved_probability},
          {"probability_shortfall", &r.probability_shortfall},
          {"normalized_ce_excess", &r.normalized_ce_excess},
          {"ce_excess", &r.ce_excess},
          {"soc_excess", &r.soc_excess}};
}

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for one trial
  std::size_t count = 0;
};

struct AggregateReport {
  std::size_t trials = 0;
  std::map<std::string, Summary> scalars;
  std::map<std::string, std::vector<Summary>> per_constraint;
};

namespace detail {

inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  if (xs.size() > 1 && *lo != *hi) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

}  // namespace detail

/// Mean and sample standard deviation of every metric over the trials where
/// it is defined.
inline AggregateReport aggregate(std::span<const MetricsReport> trials) {
  if (trials.empty()) throw ConfigError("aggregate: need at least one trial");
  AggregateReport out;
  out.trials = trials.size();
  std::map<std::string, std::vector<double>> scalar_values;
  std::map<std::string, std::vector<std::vector<double>>> constraint_values;
  for (const MetricsReport& r : trials) {
    for (const auto& [name, value] : scalar_fields(r)) {
      auto& bucket = scalar_values[name];
      if (value && std::isfinite(*value)) bucket.push_back(*value);
    }
    for (const auto& [name, values] : per_constraint_fields(r)) {
      auto& columns = constraint_values[name];
      if (columns.size() < values->size()) columns.resize(values->size());
      for (std::size_t j = 0; j < values->size(); ++j) {
        columns[j].push_back((*values)[j]);
      }
    }
  }
  for (const auto& [name, values] : scalar_values) {
    out.scalars[name] = detail::summarize(values);
  }
  for (const auto& [name, columns] : constraint_values) {
    auto& dst = out.per_constraint[name];
    for (const auto& column : columns) dst.push_back(detail::summarize(column));
  }
  return out;
}

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t used = 0;
  std::size_t dropped = 0;  // points with nonpositive n or value
};

/// Least-squares slope of log(value) against log(n). Nonpositive values are
/// dropped (reported in `dropped`); fewer than three usable points is an
/// error.
inline SlopeFit scaling_slope(std::span<const std::pair<double, double>> points) {
  std::vector<std::pair<double, double>> logs;
  SlopeFit fit;
  for (const auto& [n, v] : points) {
    if (n > 0.0 && v > 0.0 && std::isfinite(v)) {
      logs.emplace_back(std::log(n), std::log(v));
    } else {
      ++fit.dropped;
    }
  }
  fit.used = logs.size();
  if (logs.size() < 3) {
    throw DomainError("scaling_slope: need at least 3 points with positive values");
  }
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : logs) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(logs.size());
  my /= static_cast<double>(logs.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& [x, y] : logs) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  if (sxx == 0.0) throw DomainError("scaling_slope: all n are equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

}  // namespace soc_alloc

#endif  // SOC_ALLOC_METRICS_HPP_
