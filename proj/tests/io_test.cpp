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

#include "soc_alloc/io.hpp"

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "gtest/gtest.h"
#include "soc_alloc/baseline.hpp"
#include "soc_alloc/generator.hpp"
#include "soc_alloc/metrics.hpp"

namespace soc_alloc {
namespace {

TEST(InstanceJsonTest, LosslessRoundTrip) {
  GeneratorConfig cfg;
  cfg.experiment = Experiment::kChiSquare;
  cfg.n = 30;
  cfg.m = 3;
  cfg.k = 4;
  cfg.seed = 99;
  cfg.gamma_tilde = std::vector<double>{0.2, 0.3, 0.4};
  const Instance inst = to_soc(generate(cfg));
  const std::string text = instance_to_json(inst).dump();
  EXPECT_EQ(instance_from_json(json::parse(text)), inst);
}

TEST(InstanceJsonTest, RandomValuesSurviveText) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unif(-1e6, 1e6);
  Instance inst = fixture::random_instance(rng, 10, 2, 3);
  for (Request& r : inst.requests) {
    for (double& c : r.c) c = unif(rng) * 1e-7;
  }
  EXPECT_EQ(instance_from_json(json::parse(instance_to_json(inst).dump())), inst);
}

TEST(InstanceJsonTest, FormatErrors) {
  EXPECT_THROW(instance_from_json(json::parse(R"({"n": 1})")), FormatError);
  EXPECT_THROW(instance_from_json(json::parse(
                   R"({"n":1,"m":1,"k":1,"d":[1],"requests":[]})")),
               FormatError);
  EXPECT_THROW(instance_from_json(json::parse(
                   R"({"n":1,"m":1,"k":1,"d":[1],"requests":[{"c":[1],"a_bar":[[1,2]],"k_diag":[[0]]}]})")),
               FormatError);
  EXPECT_THROW(read_instance("/nonexistent/instance.json"), FormatError);
}

TEST(TraceJsonTest, RoundTripThroughReplay) {
  std::mt19937_64 rng(2);
  const Instance inst = to_soc(fixture::random_instance(rng, 100, 3, 4));
  const LinearizedInstance lin = linearize(inst);
  const SolutionTrace trace =
      run_online(inst, lin, {Variant::kMarginal, 5, true});
  TraceMeta meta{"marginal", 5};
  const json j = json::parse(trace_to_json(trace, meta).dump());
  TraceMeta back;
  const SolutionTrace again = trace_from_json(j, inst, &back);
  EXPECT_EQ(again.decisions, trace.decisions);
  EXPECT_EQ(again.objective, trace.objective);
  EXPECT_EQ(again.dual_path, trace.dual_path);
  EXPECT_EQ(back.variant, "marginal");
  EXPECT_EQ(back.seed, 5u);
}

TEST(TraceJsonTest, MismatchedInstanceRejected) {
  std::mt19937_64 rng(3);
  const Instance inst = to_soc(fixture::random_instance(rng, 20, 2, 2));
  const Instance other = to_soc(fixture::random_instance(rng, 20, 2, 2));
  const Instance shorter = to_soc(fixture::random_instance(rng, 19, 2, 2));
  const LinearizedInstance lin = linearize(inst);
  const json j = trace_to_json(run_online(inst, lin, {}), {});
  EXPECT_THROW(trace_from_json(j, shorter), StructuralError);
  if (run_online(inst, lin, {}).objective > 0) {
    EXPECT_THROW(trace_from_json(j, other), StructuralError);
  }
}

TEST(TraceCsvTest, Layout) {
  std::mt19937_64 rng(4);
  const Instance inst = to_soc(fixture::random_instance(rng, 3, 2, 2));
  const LinearizedInstance lin = linearize(inst);
  const SolutionTrace trace = run_online(inst, lin, {Variant::kVanilla, 0, true});
  std::ostringstream out;
  write_trace_csv(out, trace);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "t,scheme,v_t,p_1,p_2");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 3);
  std::ostringstream sink;
  EXPECT_THROW(write_trace_csv(sink, run_online(inst, lin, {})), StructuralError);
}

TEST(CertificateJsonTest, RoundTrip) {
  const DualCertificate cert{{0.25, 1.0 / 3.0}, 123.456, 17, 1e-7};
  const DualCertificate back =
      certificate_from_json(json::parse(certificate_to_json(cert).dump()));
  EXPECT_EQ(back.p_star, cert.p_star);
  EXPECT_EQ(back.value, cert.value);
  EXPECT_EQ(back.iterations, cert.iterations);
  EXPECT_EQ(back.residual, cert.residual);
}

TEST(MetricsCsvTest, FixedColumns) {
  EXPECT_EQ(metrics_csv_header(),
            "experiment,variant,n,trial,seed,status,objective,baseline,"
            "optimality_gap,competitive_ratio,probability_deviation,"
            "normalized_ce_violation,ce_violation,soc_violation");
  MetricsReport r;
  r.objective = 0.1;
  r.soc_violation = 2.5;
  r.probability_deviation = 0.0;
  EXPECT_EQ(metrics_csv_row({"uniform", "vanilla", 10, 2, 7, "ok"}, r),
            "uniform,vanilla,10,2,7,ok,0.1,NA,NA,NA,0,NA,NA,2.5");
}

TEST(FormatNumberTest, ShortestRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = unif(rng);
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(std::nan("")), "NA");
}

TEST(MetricsJsonTest, NullsForMissing) {
  MetricsReport r;
  r.soc_excess = {1.0, -2.0};
  const json j = metrics_to_json(r);
  EXPECT_TRUE(j["baseline"].is_null());
  EXPECT_EQ(j["per_constraint"]["soc_excess"].size(), 2u);
  EXPECT_FALSE(j["per_constraint"].contains("ce_excess"));
}

}  // namespace
}  // namespace soc_alloc
