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

// soc_alloc command-line tool.
//
//   generate      write a synthetic instance (JSON, or NDJSON with --stream)
//   solve-online  run an online variant over an instance, write the trace
//   baseline      minimize the dual of the LP relaxation, write a certificate
//   evaluate      compute metrics for a trace (CSV row, optional JSON)
//   experiment    full sweep over an n grid with several trials per size
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "soc_alloc.hpp"

namespace {

using soc_alloc::json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_csv_doubles(const std::string& text,
                                      const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + token + "' is not a number");
    }
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

std::vector<std::size_t> parse_csv_counts(const std::string& text,
                                          const std::string& flag) {
  std::vector<std::size_t> out;
  for (double v : parse_csv_doubles(text, flag)) {
    if (!(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw UsageError(flag + ": entries must be positive integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

// Writes to `path`, or stdout when path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw soc_alloc::FormatError("cannot write " + path);
  out << text;
}

struct RiskFlags {
  std::string eta;
  std::string gamma_tilde;

  void add_to(CLI::App* app) {
    app->add_option("--eta", eta, "Confidence levels, comma separated (one per resource)");
    app->add_option("--gamma-tilde", gamma_tilde,
                    "Normalized conditional-expectation caps, comma separated");
  }

  // Flags override whatever the instance file carries.
  void apply(soc_alloc::RiskSpec& risk) const {
    if (!eta.empty()) risk.eta = parse_csv_doubles(eta, "--eta");
    if (!gamma_tilde.empty()) {
      risk.gamma_tilde = parse_csv_doubles(gamma_tilde, "--gamma-tilde");
    }
  }
};

std::istream& open_input(const std::string& path, std::ifstream& file) {
  if (path == "-") return std::cin;
  file.open(path);
  if (!file) throw soc_alloc::FormatError("cannot open " + path);
  return file;
}

// Reads a plain or streamed instance document completely.
soc_alloc::Instance read_any_instance(const std::string& path) {
  std::ifstream file;
  std::istream& in = open_input(path, file);
  std::string first;
  std::getline(in, first);
  json head = json::parse(first, nullptr, false);
  if (!head.is_discarded() && head.is_object() && head.value("stream", false)) {
    soc_alloc::Instance inst = soc_alloc::instance_header_from_json(head);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      inst.requests.push_back(soc_alloc::request_from_json(
          json::parse(line), inst.m, inst.k,
          "requests[" + std::to_string(inst.requests.size()) + "]"));
    }
    return inst;
  }
  std::stringstream rest;
  rest << first << '\n' << in.rdbuf();
  try {
    return soc_alloc::instance_from_json(json::parse(rest.str()));
  } catch (const json::parse_error& e) {
    throw soc_alloc::FormatError(path + ": " + e.what());
  }
}

// A missing risk specification is not fatal here; transformed() handles it.
void require_valid(const soc_alloc::Instance& inst) {
  std::string msg;
  for (const auto& v : soc_alloc::validate_instance(inst)) {
    if (v.where == "risk") continue;
    msg += "\n  " + v.where + ": " + v.message;
  }
  if (!msg.empty()) throw soc_alloc::StructuralError("invalid instance:" + msg);
}

bool has_risk(const soc_alloc::RiskSpec& r) { return r.eta || r.gamma_tilde; }

// psi for the instance; without any risk specification the mean-value
// problem (psi = 0) is solved.
soc_alloc::Instance transformed(soc_alloc::Instance inst, bool quiet = false) {
  if (!has_risk(inst.risk)) {
    if (!quiet) {
      std::cerr << "note: no --eta/--gamma-tilde given and none in the "
                   "instance; using psi = 0\n";
    }
    inst.risk.psi.assign(inst.m, 0.0);
    return inst;
  }
  return soc_alloc::to_soc(std::move(inst));
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string experiment = "uniform";
  std::size_t n = 0;
  std::size_t m = 4;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::string d;
  RiskFlags risk;
  std::string out;
  bool stream = false;
};

soc_alloc::GeneratorConfig generator_config(const std::string& experiment,
                                            std::size_t n, std::size_t m,
                                            std::size_t k, std::uint64_t seed,
                                            const std::string& d,
                                            const RiskFlags& risk) {
  soc_alloc::GeneratorConfig cfg;
  if (experiment != "uniform" && experiment != "chi-square" &&
      experiment != "chi_square") {
    throw UsageError("--experiment must be uniform or chi-square");
  }
  cfg.experiment = soc_alloc::parse_experiment(experiment);
  cfg.n = n;
  cfg.m = m;
  cfg.k = k;
  cfg.seed = seed;
  if (!d.empty()) cfg.d = parse_csv_doubles(d, "--d");
  soc_alloc::RiskSpec spec;
  risk.apply(spec);
  cfg.eta = spec.eta;
  cfg.gamma_tilde = spec.gamma_tilde;
  return cfg;
}

int run_generate(const GenerateArgs& a) {
  const auto cfg = generator_config(a.experiment, a.n, a.m, a.k, a.seed, a.d, a.risk);
  soc_alloc::Instance header = soc_alloc::instance_header(cfg);
  if (!a.stream) {
    soc_alloc::Instance inst = soc_alloc::generate(cfg);
    emit(a.out, soc_alloc::instance_to_json(inst).dump() + "\n");
    return 0;
  }
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!a.out.empty() && a.out != "-") {
    file.open(a.out, std::ios::binary);
    if (!file) throw soc_alloc::FormatError("cannot write " + a.out);
    out = &file;
  }
  json head = soc_alloc::instance_header_to_json(header);
  head["stream"] = true;
  *out << head.dump() << '\n';
  for (std::size_t t = 0; t < cfg.n; ++t) {
    *out << soc_alloc::request_to_json(soc_alloc::generate_request(cfg, t)).dump()
         << '\n';
  }
  out->flush();
  return 0;
}

// ------------------------------------------------------------ solve-online

struct SolveArgs {
  std::string instance = "-";
  std::string variant = "vanilla";
  std::uint64_t seed = 0;
  RiskFlags risk;
  std::string out;
  bool trace = false;
  std::string trace_csv;
};

int run_solve(const SolveArgs& a) {
  const auto variant = soc_alloc::parse_variant(a.variant);
  if (!variant) {
    throw UsageError("--variant must be vanilla, marginal or marginal-dynamic");
  }
  const soc_alloc::VariantConfig config{*variant, a.seed,
                                        a.trace || !a.trace_csv.empty()};

  std::ifstream file;
  std::istream& in = open_input(a.instance, file);
  std::string first;
  std::getline(in, first);
  json head = json::parse(first, nullptr, false);

  soc_alloc::SolutionTrace trace;
  if (!head.is_discarded() && head.is_object() && head.value("stream", false)) {
    // Streamed input: decide each request as its line arrives.
    soc_alloc::Instance inst = soc_alloc::instance_header_from_json(head);
    a.risk.apply(inst.risk);
    inst = transformed(std::move(inst));
    soc_alloc::OnlineSolver solver(inst.n, inst.d, inst.risk.psi, config);
    std::string line;
    std::size_t seen = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto req = soc_alloc::request_from_json(
          json::parse(line), inst.m, inst.k, "requests[" + std::to_string(seen) + "]");
      solver.step(req, soc_alloc::linearized_columns(req, inst.risk.psi, inst.n));
      ++seen;
    }
    if (seen != inst.n) {
      throw soc_alloc::FormatError("stream ended after " + std::to_string(seen) +
                                   " of " + std::to_string(inst.n) + " requests");
    }
    trace = std::move(solver).take_trace();
  } else {
    std::stringstream rest;
    rest << first << '\n' << in.rdbuf();
    soc_alloc::Instance inst;
    try {
      inst = soc_alloc::instance_from_json(json::parse(rest.str()));
    } catch (const json::parse_error& e) {
      throw soc_alloc::FormatError(a.instance + ": " + e.what());
    }
    a.risk.apply(inst.risk);
    require_valid(inst);
    inst = transformed(std::move(inst));
    const auto lin = soc_alloc::linearize(inst);
    trace = soc_alloc::run_online(inst, lin, config);
  }

  json doc = soc_alloc::trace_to_json(
      trace, {std::string(soc_alloc::variant_name(*variant)), a.seed});
  if (!a.trace) doc.erase("steps");
  emit(a.out, doc.dump() + "\n");
  if (!a.trace_csv.empty()) {
    std::ostringstream csv;
    soc_alloc::write_trace_csv(csv, trace);
    emit(a.trace_csv, csv.str());
  }
  return 0;
}

// ---------------------------------------------------------------- baseline

struct BaselineArgs {
  std::string instance = "-";
  double tol = 1e-6;
  std::string method = "newton";
  std::size_t max_evals = 20000;
  RiskFlags risk;
  std::string out;
};

soc_alloc::DualOptions dual_options(double tol, const std::string& method,
                                    std::size_t max_evals) {
  soc_alloc::DualOptions opts;
  if (!(tol > 0.0)) throw UsageError("--tol must be positive");
  opts.tol = tol;
  opts.max_evaluations = max_evals;
  if (method == "newton") {
    opts.method = soc_alloc::DualMethod::kSmoothedNewton;
  } else if (method == "subgradient") {
    opts.method = soc_alloc::DualMethod::kSubgradient;
  } else {
    throw UsageError("--method must be newton or subgradient");
  }
  return opts;
}

int run_baseline(const BaselineArgs& a) {
  const auto opts = dual_options(a.tol, a.method, a.max_evals);
  soc_alloc::Instance inst = read_any_instance(a.instance);
  a.risk.apply(inst.risk);
  require_valid(inst);
  inst = transformed(std::move(inst));
  const auto lin = soc_alloc::linearize(inst);
  try {
    const auto cert = soc_alloc::minimize_dual(lin, opts);
    json doc = soc_alloc::certificate_to_json(cert);
    doc["converged"] = true;
    emit(a.out, doc.dump(2) + "\n");
    return 0;
  } catch (const soc_alloc::ConvergenceError& e) {
    json doc = soc_alloc::certificate_to_json(e.best());
    doc["converged"] = false;
    emit(a.out, doc.dump(2) + "\n");
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string instance;
  std::string trace;
  std::string baseline;
  RiskFlags risk;
  std::string experiment = "custom";
  std::size_t trial = 0;
  std::string out;
  std::string json_out;
};

int run_evaluate(const EvaluateArgs& a) {
  soc_alloc::Instance inst = read_any_instance(a.instance);
  a.risk.apply(inst.risk);
  if (!has_risk(inst.risk)) {
    throw UsageError(
        "no risk specification: probability deviation needs --eta and the "
        "conditional-expectation violation needs --gamma-tilde (or generate "
        "the instance with them)");
  }
  require_valid(inst);
  inst = transformed(std::move(inst), true);
  soc_alloc::TraceMeta meta;
  const auto trace = soc_alloc::trace_from_json(
      soc_alloc::detail::read_json_file(a.trace), inst, &meta);
  std::optional<soc_alloc::DualCertificate> cert;
  if (!a.baseline.empty()) {
    cert = soc_alloc::certificate_from_json(
        soc_alloc::detail::read_json_file(a.baseline));
  }
  const auto report = soc_alloc::evaluate(trace, inst, cert ? &*cert : nullptr);
  const soc_alloc::RowKey key{a.experiment, meta.variant, inst.n, a.trial,
                              meta.seed, "ok"};
  emit(a.out, std::string(soc_alloc::kMetricsCsvVersion) + "\n" +
                  soc_alloc::metrics_csv_header() + "\n" +
                  soc_alloc::metrics_csv_row(key, report) + "\n");
  if (!a.json_out.empty()) {
    json doc = soc_alloc::metrics_to_json(report);
    doc["psi"] = inst.risk.psi;
    doc["baseline_note"] = std::string(soc_alloc::kBaselineNote);
    emit(a.json_out, doc.dump(2) + "\n");
  }
  return 0;
}

// -------------------------------------------------------------- experiment

struct ExperimentArgs {
  std::string experiment = "uniform";
  std::string n_grid = "2500,5000,7500,10000,12500,15000";
  std::size_t trials = 20;
  std::size_t m = 4;
  std::size_t k = 5;
  RiskFlags risk;
  std::string variants = "vanilla,marginal,marginal-dynamic";
  std::uint64_t seed = 0;
  std::string out;
  double tol = 1e-6;
  std::size_t threads = 0;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  if (a.risk.eta.empty() && a.risk.gamma_tilde.empty()) {
    throw UsageError("experiment needs --eta and/or --gamma-tilde");
  }
  soc_alloc::ExperimentPlan plan;
  plan.generator = generator_config(a.experiment, 1, a.m, a.k, 0, "", a.risk);
  plan.n_grid = parse_csv_counts(a.n_grid, "--n-grid");
  plan.trials = a.trials;
  plan.variants.clear();
  std::stringstream ss(a.variants);
  std::string name;
  while (std::getline(ss, name, ',')) {
    const auto v = soc_alloc::parse_variant(name);
    if (!v) throw UsageError("--variant: unknown variant '" + name + "'");
    plan.variants.push_back(*v);
  }
  plan.output_dir = a.out;
  plan.master_seed = a.seed;
  plan.baseline = dual_options(a.tol, "newton", 20000);
  plan.threads = a.threads;
  plan.log = true;
  const auto result = soc_alloc::run_experiment(plan);
  std::size_t failed = 0;
  for (const auto& row : result.rows) failed += row.key.status != "ok";
  std::cerr << "wrote " << result.rows.size() << " rows to "
            << (std::filesystem::path(a.out) / "metrics.csv").string();
  if (failed) std::cerr << " (" << failed << " rows with a failed baseline)";
  std::cerr << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online stochastic resource allocation with chance and "
               "conditional-expectation constraints"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic instance");
  g->add_option("--experiment", gen.experiment, "uniform | chi-square");
  g->add_option("--n", gen.n, "Number of requests")->required();
  g->add_option("--m", gen.m, "Number of resources");
  g->add_option("--k", gen.k, "Number of schemes per request");
  g->add_option("--seed", gen.seed, "Instance seed");
  g->add_option("--d", gen.d, "Per-step budget, comma separated (default 1)");
  gen.risk.add_to(g);
  g->add_option("--out", gen.out, "Output file (default stdout)");
  g->add_flag("--stream", gen.stream, "Emit NDJSON: header line, then one request per line");

  SolveArgs solve;
  auto* s = app.add_subcommand("solve-online", "Run an online variant over an instance");
  s->add_option("--instance", solve.instance, "Instance file, '-' for stdin (plain or streamed)");
  s->add_option("--variant", solve.variant, "vanilla | marginal | marginal-dynamic");
  s->add_option("--seed", solve.seed, "Tie-breaking seed");
  solve.risk.add_to(s);
  s->add_option("--out", solve.out, "Trace JSON output (default stdout)");
  s->add_flag("--trace", solve.trace, "Include per-step v_t and dual prices in the trace");
  s->add_option("--trace-csv", solve.trace_csv, "Also write per-step rows as CSV");

  BaselineArgs base;
  auto* b = app.add_subcommand("baseline", "Compute the LP-relaxation dual certificate");
  b->add_option("--instance", base.instance, "Instance file, '-' for stdin");
  b->add_option("--tol", base.tol, "Relative tolerance");
  b->add_option("--method", base.method, "newton | subgradient");
  b->add_option("--max-evals", base.max_evals, "Dual evaluation cap");
  base.risk.add_to(b);
  b->add_option("--out", base.out, "Certificate JSON output (default stdout)");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Compute metrics for a trace");
  e->add_option("--instance", ev.instance, "Instance file")->required();
  e->add_option("--trace", ev.trace, "Trace JSON from solve-online")->required();
  e->add_option("--baseline", ev.baseline, "Certificate JSON from baseline");
  ev.risk.add_to(e);
  e->add_option("--experiment", ev.experiment, "Label for the experiment column");
  e->add_option("--trial", ev.trial, "Trial index for the trial column");
  e->add_option("--out", ev.out, "Metrics CSV output (default stdout)");
  e->add_option("--json", ev.json_out, "Also write metrics with per-constraint detail as JSON");

  ExperimentArgs ex;
  auto* x = app.add_subcommand("experiment", "Run a full sweep");
  x->add_option("--experiment", ex.experiment, "uniform | chi-square");
  x->add_option("--n-grid", ex.n_grid, "Request counts, comma separated");
  x->add_option("--trials", ex.trials, "Trials per n");
  x->add_option("--m", ex.m, "Number of resources");
  x->add_option("--k", ex.k, "Number of schemes per request");
  ex.risk.add_to(x);
  x->add_option("--variant", ex.variants, "Variants, comma separated");
  x->add_option("--seed", ex.seed, "Master seed");
  x->add_option("--out", ex.out, "Output directory")->required();
  x->add_option("--tol", ex.tol, "Baseline relative tolerance");
  x->add_option("--threads", ex.threads, "Worker threads (default: SOC_ALLOC_THREADS or all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*g) return run_generate(gen);
    if (*s) return run_solve(solve);
    if (*b) return run_baseline(base);
    if (*e) return run_evaluate(ev);
    if (*x) return run_experiment_cmd(ex);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << '\n';
    return kExitUsage;
  } catch (const soc_alloc::ConfigError& err) {
    std::cerr << "usage error: " << err.what() << '\n';
    return kExitUsage;
  } catch (const soc_alloc::ConvergenceError& err) {
    std::cerr << "numerical failure: " << err.what() << '\n';
    return kExitNumerical;
  } catch (const json::exception& err) {
    std::cerr << "data error: " << err.what() << '\n';
    return kExitData;
  } catch (const std::exception& err) {
    std::cerr << "data error: " << err.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
