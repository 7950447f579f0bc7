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

// Small hand-rolled random instances for tests. Built from std::mt19937_64
// so they do not share code with the library generator.

#ifndef SOC_ALLOC_TESTS_FIXTURES_HPP_
#define SOC_ALLOC_TESTS_FIXTURES_HPP_

#include <cstddef>
#include <random>
#include <vector>

#include "soc_alloc/model.hpp"

namespace soc_alloc::fixture {

inline Request random_request(std::mt19937_64& rng, std::size_t m,
                              std::size_t k) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Request r;
  r.c.resize(k);
  for (double& c : r.c) c = unif(rng);
  r.a_bar = Matrix(m, k);
  r.k_diag = Matrix(m, k);
  for (double& a : r.a_bar.data) a = 4.0 * unif(rng);
  for (double& v : r.k_diag.data) {
    const double u = unif(rng);
    v = u * u;
  }
  return r;
}

inline Instance random_instance(std::mt19937_64& rng, std::size_t n,
                                std::size_t m, std::size_t k,
                                double d = 1.0) {
  Instance inst;
  inst.n = n;
  inst.m = m;
  inst.k = k;
  inst.d.assign(m, d);
  for (std::size_t t = 0; t < n; ++t) {
    inst.requests.push_back(random_request(rng, m, k));
  }
  inst.risk.eta = std::vector<double>(m, 0.9);
  return inst;
}

inline std::vector<Decision> random_decisions(std::mt19937_64& rng,
                                              std::size_t n, std::size_t k) {
  std::uniform_int_distribution<std::size_t> pick(0, k);
  std::vector<Decision> out(n);
  for (auto& d : out) {
    const std::size_t l = pick(rng);
    d = l == k ? Decision::none() : Decision::pick(l);
  }
  return out;
}

inline SolutionTrace replay(const Instance& inst,
                            const std::vector<Decision>& decisions) {
  SolutionTrace trace = SolutionTrace::empty(inst.m);
  for (std::size_t t = 0; t < decisions.size(); ++t) {
    trace.record(inst.requests[t], decisions[t]);
  }
  return trace;
}

}  // namespace soc_alloc::fixture

#endif  // SOC_ALLOC_TESTS_FIXTURES_HPP_
