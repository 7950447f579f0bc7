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

// File formats.
//
// Instance (JSON):
//   {"n": .., "m": .., "k": .., "d": [m],
//    "risk": {"eta": [m], "gamma_tilde": [m], "psi": [m]},   // all optional
//    "requests": [{"c": [k], "a_bar": [[k] x m], "k_diag": [[k] x m]}, ...]}
// Streamed instance (NDJSON): the same object without "requests" plus
//   "stream": true on the first line, then one request object per line.
// Trace (JSON): decisions are 1-based scheme indices, 0 for "no scheme".
// Trace rows (CSV): t,scheme,v_t,p_1..p_m with p taken after the update.
// Certificate (JSON): {"value", "p_star", "iterations", "residual"}.
// Metrics (CSV): one row per (experiment, variant, n, trial); columns in
//   kMetricsColumns order, "NA" where a metric does not apply.

#ifndef SOC_ALLOC_IO_HPP_
#define SOC_ALLOC_IO_HPP_

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "soc_alloc/baseline.hpp"
#include "soc_alloc/error.hpp"
#include "soc_alloc/metrics.hpp"
#include "soc_alloc/model.hpp"
#include "soc_alloc/online.hpp"

namespace soc_alloc {

using json = nlohmann::json;

inline constexpr std::string_view kMetricsCsvVersion = "# soc_alloc metrics v1";
inline constexpr std::string_view kBaselineNote =
    "baseline is the LP relaxation of the linearized problem, an upper bound "
    "on the cone relaxation optimum; gaps are conservative (larger) and "
    "competitive ratios conservative (smaller)";

/// Shortest decimal text that reads back to exactly the same double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

namespace detail {

template <class T>
T field(const json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) {
    throw FormatError(std::string(where) + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string(where) + ": bad field '" + key + "': " +
                      e.what());
  }
}

inline json matrix_to_json(const Matrix& mat) {
  json rows = json::array();
  for (std::size_t r = 0; r < mat.rows; ++r) {
    rows.push_back(std::vector<double>(mat.data.begin() + r * mat.cols,
                                       mat.data.begin() + (r + 1) * mat.cols));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j, std::size_t rows,
                               std::size_t cols, const std::string& where) {
  if (!j.is_array() || j.size() != rows) {
    throw FormatError(where + ": expected " + std::to_string(rows) + " rows");
  }
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw FormatError(where + ": expected " + std::to_string(cols) +
                        " columns in row " + std::to_string(r));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw FormatError(where + ": non-numeric entry");
      out(r, c) = j[r][c].get<double>();
    }
  }
  return out;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << text;
  if (!out) throw FormatError("failed writing " + path);
}

}  // namespace detail

inline json request_to_json(const Request& r) {
  return {{"c", r.c},
          {"a_bar", detail::matrix_to_json(r.a_bar)},
          {"k_diag", detail::matrix_to_json(r.k_diag)}};
}

inline Request request_from_json(const json& j, std::size_t m, std::size_t k,
                                 const std::string& where) {
  Request r;
  r.c = detail::field<std::vector<double>>(j, "c", where.c_str());
  if (r.c.size() != k) throw FormatError(where + ": c must have k entries");
  r.a_bar = detail::matrix_from_json(j.at("a_bar"), m, k, where + ".a_bar");
  if (!j.contains("k_diag")) throw FormatError(where + ": missing field 'k_diag'");
  r.k_diag = detail::matrix_from_json(j.at("k_diag"), m, k, where + ".k_diag");
  return r;
}

inline json risk_to_json(const RiskSpec& risk) {
  json j = json::object();
  if (risk.eta) j["eta"] = *risk.eta;
  if (risk.gamma_tilde) j["gamma_tilde"] = *risk.gamma_tilde;
  if (!risk.psi.empty()) j["psi"] = risk.psi;
  return j;
}

inline RiskSpec risk_from_json(const json& j) {
  RiskSpec risk;
  if (!j.is_object()) throw FormatError("instance.risk: expected an object");
  if (j.contains("eta") && !j["eta"].is_null()) {
    risk.eta = detail::field<std::vector<double>>(j, "eta", "instance.risk");
  }
  if (j.contains("gamma_tilde") && !j["gamma_tilde"].is_null()) {
    risk.gamma_tilde =
        detail::field<std::vector<double>>(j, "gamma_tilde", "instance.risk");
  }
  if (j.contains("psi")) {
    risk.psi = detail::field<std::vector<double>>(j, "psi", "instance.risk");
  }
  return risk;
}

/// Header object shared by the plain and streamed instance formats.
inline json instance_header_to_json(const Instance& inst) {
  return {{"n", inst.n},
          {"m", inst.m},
          {"k", inst.k},
          {"d", inst.d},
          {"risk", risk_to_json(inst.risk)}};
}

inline Instance instance_header_from_json(const json& j) {
  Instance inst;
  inst.n = detail::field<std::size_t>(j, "n", "instance");
  inst.m = detail::field<std::size_t>(j, "m", "instance");
  inst.k = detail::field<std::size_t>(j, "k", "instance");
  inst.d = detail::field<std::vector<double>>(j, "d", "instance");
  if (inst.d.size() != inst.m) throw FormatError("instance: d must have m entries");
  if (j.contains("risk")) inst.risk = risk_from_json(j.at("risk"));
  return inst;
}

inline json instance_to_json(const Instance& inst) {
  json j = instance_header_to_json(inst);
  json reqs = json::array();
  for (const Request& r : inst.requests) reqs.push_back(request_to_json(r));
  j["requests"] = std::move(reqs);
  return j;
}

inline Instance instance_from_json(const json& j) {
  Instance inst = instance_header_from_json(j);
  if (!j.contains("requests") || !j["requests"].is_array()) {
    throw FormatError("instance: missing 'requests' array");
  }
  const json& reqs = j["requests"];
  if (reqs.size() != inst.n) {
    throw FormatError("instance: expected " + std::to_string(inst.n) +
                      " requests, found " + std::to_string(reqs.size()));
  }
  inst.requests.reserve(inst.n);
  for (std::size_t t = 0; t < reqs.size(); ++t) {
    inst.requests.push_back(request_from_json(
        reqs[t], inst.m, inst.k, "requests[" + std::to_string(t) + "]"));
  }
  return inst;
}

inline Instance read_instance(const std::string& path) {
  return instance_from_json(detail::read_json_file(path));
}

inline void write_instance(const std::string& path, const Instance& inst) {
  detail::write_text_file(path, instance_to_json(inst).dump() + "\n");
}

struct TraceMeta {
  std::string variant = "vanilla";
  std::uint64_t seed = 0;
};

inline json trace_to_json(const SolutionTrace& trace, const TraceMeta& meta) {
  std::vector<std::size_t> decisions;
  decisions.reserve(trace.decisions.size());
  for (const Decision& d : trace.decisions) {
    decisions.push_back(d.accepted() ? *d.scheme + 1 : 0);
  }
  json j = {{"variant", meta.variant},
            {"seed", meta.seed},
            {"n", trace.decisions.size()},
            {"m", trace.mean_consumption.size()},
            {"decisions", decisions},
            {"objective", trace.objective},
            {"mean_consumption", trace.mean_consumption},
            {"variance_accum", trace.variance_accum}};
  if (trace.dual_path && trace.best_values) {
    j["steps"] = {{"v", *trace.best_values}, {"p", *trace.dual_path}};
  }
  return j;
}

/// Rebuilds a trace from its decisions by replaying them against `inst`,
/// then checks the stored totals against the replay.
inline SolutionTrace trace_from_json(const json& j, const Instance& inst,
                                     TraceMeta* meta = nullptr) {
  const auto decisions =
      detail::field<std::vector<std::size_t>>(j, "decisions", "trace");
  if (decisions.size() != inst.n || inst.requests.size() != inst.n) {
    throw StructuralError("trace: has " + std::to_string(decisions.size()) +
                          " decisions but the instance has " +
                          std::to_string(inst.n) + " requests");
  }
  SolutionTrace trace = SolutionTrace::empty(inst.m);
  for (std::size_t t = 0; t < decisions.size(); ++t) {
    const std::size_t s = decisions[t];
    if (s > inst.k) throw FormatError("trace: scheme index out of range");
    trace.record(inst.requests[t], s == 0 ? Decision::none() : Decision::pick(s - 1));
  }
  if (j.contains("objective")) {
    const double stored = j["objective"].get<double>();
    if (std::abs(stored - trace.objective) >
        1e-9 * std::max(1.0, std::abs(stored))) {
      throw StructuralError("trace: stored objective does not match the instance");
    }
  }
  if (j.contains("steps")) {
    trace.best_values = j["steps"].at("v").get<std::vector<double>>();
    trace.dual_path = j["steps"].at("p").get<std::vector<std::vector<double>>>();
  }
  if (meta) {
    meta->variant = j.value("variant", std::string("vanilla"));
    meta->seed = j.value("seed", std::uint64_t{0});
  }
  return trace;
}

inline void write_trace_csv(std::ostream& out, const SolutionTrace& trace) {
  if (!trace.dual_path || !trace.best_values) {
    throw StructuralError("trace csv: run was not recorded with per-step data");
  }
  const std::size_t m = trace.mean_consumption.size();
  out << "t,scheme,v_t";
  for (std::size_t j = 0; j < m; ++j) out << ",p_" << j + 1;
  out << '\n';
  for (std::size_t t = 0; t < trace.decisions.size(); ++t) {
    const Decision& d = trace.decisions[t];
    out << t + 1 << ',' << (d.accepted() ? *d.scheme + 1 : 0) << ','
        << format_number((*trace.best_values)[t]);
    for (double p : (*trace.dual_path)[t]) out << ',' << format_number(p);
    out << '\n';
  }
}

inline json certificate_to_json(const DualCertificate& cert) {
  return {{"value", cert.value},
          {"p_star", cert.p_star},
          {"iterations", cert.iterations},
          {"residual", cert.residual},
          {"note", std::string(kBaselineNote)}};
}

inline DualCertificate certificate_from_json(const json& j) {
  DualCertificate cert;
  cert.value = detail::field<double>(j, "value", "certificate");
  cert.p_star = detail::field<std::vector<double>>(j, "p_star", "certificate");
  cert.iterations = j.value("iterations", std::size_t{0});
  cert.residual = j.value("residual", 0.0);
  return cert;
}

// Identifies one metrics row.
struct RowKey {
  std::string experiment;
  std::string variant;
  std::size_t n = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
};

inline std::string metrics_csv_header() {
  std::string h = "experiment,variant,n,trial,seed,status";
  for (const auto& [name, value] : scalar_fields(MetricsReport{})) {
    h += ',';
    h += name;
  }
  return h;
}

inline std::string metrics_csv_row(const RowKey& key, const MetricsReport& r) {
  std::ostringstream row;
  row << key.experiment << ',' << key.variant << ',' << key.n << ','
      << key.trial << ',' << key.seed << ',' << key.status;
  for (const auto& [name, value] : scalar_fields(r)) {
    row << ',' << (value ? format_number(*value) : std::string("NA"));
  }
  return row.str();
}

inline json metrics_to_json(const MetricsReport& r) {
  json j = json::object();
  for (const auto& [name, value] : scalar_fields(r)) {
    j[name] = value ? json(*value) : json(nullptr);
  }
  json per = json::object();
  for (const auto& [name, values] : per_constraint_fields(r)) {
    if (!values->empty()) per[name] = *values;
  }
  j["per_constraint"] = std::move(per);
  return j;
}

inline json summary_to_json(const Summary& s) {
  return {{"mean", s.mean}, {"stddev", s.stddev}, {"count", s.count}};
}

inline json aggregate_to_json(const AggregateReport& agg) {
  json scalars = json::object();
  for (const auto& [name, s] : agg.scalars) {
    if (s.count > 0) scalars[name] = summary_to_json(s);
  }
  json per = json::object();
  for (const auto& [name, list] : agg.per_constraint) {
    if (list.empty()) continue;
    json arr = json::array();
    for (const Summary& s : list) arr.push_back(summary_to_json(s));
    per[name] = std::move(arr);
  }
  return {{"trials", agg.trials}, {"scalars", scalars}, {"per_constraint", per}};
}

}  // namespace soc_alloc

#endif  // SOC_ALLOC_IO_HPP_
