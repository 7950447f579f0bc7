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

// Experiment sweeps: for every (n, trial) generate an instance, transform
// and linearize it, compute the LP baseline, run each variant and collect
// metrics. Trials run on worker threads; each trial owns all of its mutable
// state.

#ifndef SOC_ALLOC_EXPERIMENT_HPP_
#define SOC_ALLOC_EXPERIMENT_HPP_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "soc_alloc/baseline.hpp"
#include "soc_alloc/generator.hpp"
#include "soc_alloc/io.hpp"
#include "soc_alloc/metrics.hpp"
#include "soc_alloc/online.hpp"
#include "soc_alloc/rng.hpp"
#include "soc_alloc/transform.hpp"

namespace soc_alloc {

struct ExperimentPlan {
  GeneratorConfig generator;  // n and seed are overridden per trial
  std::vector<std::size_t> n_grid;
  std::size_t trials = 1;
  std::vector<Variant> variants = {Variant::kVanilla, Variant::kMarginal,
                                   Variant::kMarginalDynamic};
  std::filesystem::path output_dir;  // empty: keep results in memory only
  std::uint64_t master_seed = 0;
  DualOptions baseline;
  std::size_t threads = 0;  // 0: SOC_ALLOC_THREADS or hardware concurrency
  bool log = false;         // one line per finished trial on stderr
};

/// Seed of trial `trial` at size `n`. Used both for the instance and for the
/// tie-breaking stream, so `generate --seed S` followed by
/// `solve-online --seed S` replays a trial.
inline std::uint64_t trial_seed(std::uint64_t master, std::size_t n,
                                std::size_t trial) {
  return stream_key(master, {n, trial});
}

struct TrialRow {
  RowKey key;
  MetricsReport metrics;
};

struct ExperimentResult {
  std::vector<TrialRow> rows;  // ordered by n, trial, variant
  // variant -> n -> aggregate over successful trials
  std::map<std::string, std::map<std::size_t, AggregateReport>> aggregates;
  // variant -> metric -> log-log slope against n (when >= 3 usable sizes)
  std::map<std::string, std::map<std::string, SlopeFit>> slopes;
};

inline std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t count = requested;
  if (count == 0) {
    count = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SOC_ALLOC_THREADS")) {
      const long cap = std::strtol(env, nullptr, 10);
      if (cap > 0) count = std::min<std::size_t>(count, static_cast<std::size_t>(cap));
    }
  }
  return std::max<std::size_t>(1, std::min(count, jobs));
}

/// Runs one (n, trial) cell for every variant of the plan.
inline std::vector<TrialRow> run_trial(const ExperimentPlan& plan, std::size_t n,
                                       std::size_t trial) {
  GeneratorConfig cfg = plan.generator;
  cfg.n = n;
  cfg.seed = trial_seed(plan.master_seed, n, trial);
  const Instance inst = to_soc(generate(cfg));
  const LinearizedInstance lin = linearize(inst);

  std::optional<DualCertificate> cert;
  std::string status = "ok";
  try {
    cert = minimize_dual(lin, plan.baseline);
  } catch (const ConvergenceError&) {
    status = "baseline_failed";
  }

  std::vector<TrialRow> rows;
  for (Variant v : plan.variants) {
    const SolutionTrace trace = run_online(inst, lin, {v, cfg.seed, false});
    TrialRow row;
    row.key = {std::string(experiment_name(cfg.experiment)),
               std::string(variant_name(v)), n, trial, cfg.seed, status};
    row.metrics = evaluate(trace, inst, cert ? &*cert : nullptr);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail {

inline std::string trial_file_name(const RowKey& key) {
  return "n" + std::to_string(key.n) + "_t" + std::to_string(key.trial) + "_" +
         key.variant + ".csv";
}

inline std::string csv_preamble() {
  return std::string(kMetricsCsvVersion) + "\n# " + std::string(kBaselineNote) +
         "\n" + metrics_csv_header() + "\n";
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentPlan& plan) {
  if (plan.n_grid.empty() || plan.trials == 0) {
    throw ConfigError("experiment: need a non-empty n grid and at least one trial");
  }
  if (plan.variants.empty()) throw ConfigError("experiment: no variants selected");
  {
    GeneratorConfig probe = plan.generator;
    probe.n = std::max<std::size_t>(1, plan.n_grid.front());
    check_generator_config(probe);
  }

  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t n : plan.n_grid) {
    for (std::size_t t = 0; t < plan.trials; ++t) cells.emplace_back(n, t);
  }
  std::vector<std::vector<TrialRow>> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::exception_ptr failure;

  const bool write_files = !plan.output_dir.empty();
  const std::filesystem::path trial_dir = plan.output_dir / "trials";
  if (write_files) std::filesystem::create_directories(trial_dir);

  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        const auto [n, trial] = cells[i];
        results[i] = run_trial(plan, n, trial);
        if (write_files) {
          for (const TrialRow& row : results[i]) {
            detail::write_text_file(
                (trial_dir / detail::trial_file_name(row.key)).string(),
                detail::csv_preamble() + metrics_csv_row(row.key, row.metrics) +
                    "\n");
          }
        }
        if (plan.log) {
          std::lock_guard lock(log_mutex);
          std::cerr << "n=" << n << " trial=" << trial << ' '
                    << results[i].front().key.status << '\n';
        }
      } catch (...) {
        std::lock_guard lock(log_mutex);
        if (!failure) failure = std::current_exception();
        next = cells.size();
      }
    }
  };
  const std::size_t workers = worker_count(plan.threads, cells.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResult out;
  for (auto& cell : results) {
    for (TrialRow& row : cell) out.rows.push_back(std::move(row));
  }

  std::map<std::string, std::map<std::size_t, std::vector<MetricsReport>>> grouped;
  for (const TrialRow& row : out.rows) {
    if (row.key.status != "ok") continue;
    grouped[row.key.variant][row.key.n].push_back(row.metrics);
  }
  for (const auto& [variant, by_n] : grouped) {
    for (const auto& [n, reports] : by_n) {
      out.aggregates[variant][n] = aggregate(reports);
    }
  }
  for (const auto& [variant, by_n] : out.aggregates) {
    for (const char* metric :
         {"optimality_gap", "soc_violation", "probability_deviation",
          "normalized_ce_violation", "ce_violation"}) {
      std::vector<std::pair<double, double>> points;
      for (const auto& [n, agg] : by_n) {
        auto it = agg.scalars.find(metric);
        if (it != agg.scalars.end() && it->second.count > 0) {
          points.emplace_back(static_cast<double>(n), it->second.mean);
        }
      }
      try {
        out.slopes[variant][metric] = scaling_slope(points);
      } catch (const DomainError&) {
        // fewer than three sizes with a positive mean
      }
    }
  }

  if (write_files) {
    std::string csv = detail::csv_preamble();
    for (const TrialRow& row : out.rows) {
      csv += metrics_csv_row(row.key, row.metrics) + "\n";
    }
    detail::write_text_file((plan.output_dir / "metrics.csv").string(), csv);

    json agg = json::object();
    for (const auto& [variant, by_n] : out.aggregates) {
      json per_n = json::object();
      for (const auto& [n, a] : by_n) per_n[std::to_string(n)] = aggregate_to_json(a);
      agg[variant] = std::move(per_n);
    }
    json slopes = json::object();
    for (const auto& [variant, by_metric] : out.slopes) {
      for (const auto& [metric, fit] : by_metric) {
        slopes[variant][metric] = {{"slope", fit.slope},
                                   {"intercept", fit.intercept},
                                   {"points", fit.used},
                                   {"dropped", fit.dropped}};
      }
    }
    const json report = {
        {"experiment", std::string(experiment_name(plan.generator.experiment))},
        {"master_seed", plan.master_seed},
        {"trials", plan.trials},
        {"n_grid", plan.n_grid},
        {"baseline_note", std::string(kBaselineNote)},
        {"aggregates", agg},
        {"scaling", slopes}};
    detail::write_text_file((plan.output_dir / "aggregate.json").string(),
                            report.dump(2) + "\n");
    detail::write_text_file((plan.output_dir / "scaling.json").string(),
                            slopes.dump(2) + "\n");
  }
  return out;
}

}  // namespace soc_alloc

#endif  // SOC_ALLOC_EXPERIMENT_HPP_
