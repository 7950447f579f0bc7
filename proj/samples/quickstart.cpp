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

// Minimal end-to-end use of the library: generate one instance, run the
// three online policies against the LP baseline, print their metrics.

#include <cstdio>

#include "soc_alloc.hpp"

int main() {
  using namespace soc_alloc;

  GeneratorConfig cfg;
  cfg.experiment = Experiment::kUniform;
  cfg.n = 2000;
  cfg.m = 4;
  cfg.k = 5;
  cfg.seed = 2026;
  cfg.eta = std::vector<double>{0.65, 0.75, 0.85, 0.95};

  const Instance inst = to_soc(generate(cfg));
  const LinearizedInstance lin = linearize(inst);
  const DualCertificate cert = minimize_dual(lin);

  std::printf("LP baseline %.4f (%zu evaluations)\n", cert.value, cert.iterations);
  for (Variant v : {Variant::kVanilla, Variant::kMarginal, Variant::kMarginalDynamic}) {
    const SolutionTrace trace = run_online(inst, lin, {v, cfg.seed, false});
    const MetricsReport r = evaluate(trace, inst, &cert);
    std::printf("%-17s revenue %9.4f  ratio %6.2f%%  prob. deviation %.4f  "
                "cone violation %.3f\n",
                std::string(variant_name(v)).c_str(), r.objective,
                r.competitive_ratio.value_or(0.0), *r.probability_deviation,
                r.soc_violation);
  }
}
