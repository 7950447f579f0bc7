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

#include "soc_alloc/online.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "gtest/gtest.h"

namespace soc_alloc {
namespace {

Request scalar_request(std::vector<double> c, std::vector<double> a,
                       std::vector<double> var) {
  Request r;
  r.c = std::move(c);
  r.a_bar = Matrix(1, r.c.size());
  r.a_bar.data = std::move(a);
  r.k_diag = Matrix(1, r.c.size());
  r.k_diag.data = std::move(var);
  return r;
}

TEST(ReducedValuesTest, Arithmetic) {
  const Request r = scalar_request({0.5, 0.7}, {2.0, 3.0}, {0.0, 0.0});
  const std::vector<double> p0 = {0.0};
  EXPECT_EQ(reduced_values(p0, r, r.a_bar), r.c);
  const std::vector<double> p = {0.1};
  const auto v = reduced_values(p, r, r.a_bar);
  EXPECT_NEAR(v[0], 0.3, 1e-15);
  EXPECT_NEAR(v[1], 0.4, 1e-15);
}

TEST(ReducedValuesTest, ConstructedIndifference) {
  const Request r = scalar_request({1.0, 3.0}, {2.0, 6.0}, {0.0, 0.0});
  const std::vector<double> p = {0.5};
  for (double v : reduced_values(p, r, r.a_bar)) EXPECT_EQ(v, 0.0);
}

TEST(ReducedValuesTest, ShapeMismatchThrows) {
  const Request r = scalar_request({1.0}, {1.0}, {0.0});
  const std::vector<double> p = {0.1, 0.2};
  EXPECT_THROW(reduced_values(p, r, r.a_bar), StructuralError);
}

// Joint positive scaling of c and columns leaves the argmax set and signs
// unchanged.
TEST(ReducedValuesTest, ArgmaxInvariantUnderJointScaling) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unif(0.1, 3.0);
  for (int rep = 0; rep < 200; ++rep) {
    const Request r = fixture::random_request(rng, 3, 5);
    const std::vector<double> p = {unif(rng), unif(rng), unif(rng)};
    const double s = unif(rng);
    Request scaled = r;
    for (double& c : scaled.c) c *= s;
    Matrix cols = r.a_bar;
    for (double& a : cols.data) a *= s;
    const auto v = reduced_values(p, r, r.a_bar);
    const auto w = reduced_values(p, scaled, cols);
    for (std::size_t l = 0; l < 5; ++l) {
      EXPECT_NEAR(w[l], s * v[l], 1e-12);
    }
    EXPECT_EQ(std::max_element(v.begin(), v.end()) - v.begin(),
              std::max_element(w.begin(), w.end()) - w.begin());
  }
}

TEST(DecideTest, StrictPositivity) {
  DualState s = DualState::initial(1, 10);
  const Request neg = scalar_request({-0.2, -0.1}, {0.0, 0.0}, {0.0, 0.0});
  EXPECT_FALSE(decide(s, neg, neg.a_bar, {}).decision.accepted());
  const Request zero = scalar_request({0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0});
  EXPECT_FALSE(decide(s, zero, zero.a_bar, {}).decision.accepted());
}

TEST(DecideTest, UniqueArgmax) {
  const Request r = scalar_request({0.3, 0.7}, {0.0, 0.0}, {0.0, 0.0});
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    DualState s = DualState::initial(1, 10);
    const StepChoice c = decide(s, r, r.a_bar, {Variant::kVanilla, seed, false});
    EXPECT_EQ(c.decision, Decision::pick(1));
    EXPECT_DOUBLE_EQ(c.best_value, 0.7);
  }
}

TEST(DecideTest, UniformTieBreaking) {
  const Request r = scalar_request({0.5, 0.5, -1.0}, {0.0, 0.0, 0.0}, {0, 0, 0});
  int first = 0;
  int second = 0;
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    DualState s = DualState::initial(1, 10);
    const auto c = decide(s, r, r.a_bar, {Variant::kVanilla, std::uint64_t(i), false});
    ASSERT_TRUE(c.decision.accepted());
    (*c.decision.scheme == 0 ? first : second) += 1;
    EXPECT_NE(*c.decision.scheme, 2u);
  }
  EXPECT_NEAR(first / double(kDraws), 0.5, 0.02);
  EXPECT_NEAR(second / double(kDraws), 0.5, 0.02);
}

TEST(DualUpdateTest, Arithmetic) {
  DualState s = DualState::initial(1, 100);
  s.p = {0.2};
  dual_update(s, std::vector<double>{0.7}, std::vector<double>{1.0});
  EXPECT_NEAR(s.p[0], 0.17, 1e-15);
  EXPECT_EQ(s.t, 2u);

  s.p = {0.01};
  dual_update(s, std::vector<double>{0.0}, std::vector<double>{5.0});
  EXPECT_EQ(s.p[0], 0.0);

  s.p = {0.4};
  dual_update(s, std::vector<double>{1.0}, std::vector<double>{1.0});
  EXPECT_EQ(s.p[0], 0.4);
}

TEST(MarginalCostTest, Arithmetic) {
  DualState s = DualState::initial(1, 10);
  const Request r = scalar_request({1.0, 1.0}, {0.5, 0.0}, {4.0, 7.0});
  const std::vector<double> psi = {1.0};
  Matrix first = marginal_soc_cost(s, r, psi);
  EXPECT_DOUBLE_EQ(first(0, 0), 0.5 + 2.0);
  s.q_accum = {9.0};
  Matrix later = marginal_soc_cost(s, r, psi);
  EXPECT_NEAR(later(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(sqrt_increment(9.0, 7.0), 1.0, 1e-15);
  EXPECT_EQ(sqrt_increment(0.0, 0.0), 0.0);
  EXPECT_EQ(sqrt_increment(5.0, 0.0), 0.0);
}

TEST(MarginalCostTest, TelescopesToConeLhs) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 1 + rep % 60;
    Instance inst = to_soc(fixture::random_instance(rng, n, 3, 4));
    const auto decisions = fixture::random_decisions(rng, n, 4);
    DualState s = DualState::initial(3, n);
    std::vector<double> charged(3, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      const Matrix cost = marginal_soc_cost(s, inst.requests[t], inst.risk.psi);
      if (decisions[t].accepted()) {
        for (std::size_t j = 0; j < 3; ++j) {
          charged[j] += cost(j, *decisions[t].scheme);
        }
      }
      s.commit(inst.requests[t], decisions[t], inst.risk.psi);
    }
    const auto g = soc_lhs(fixture::replay(inst, decisions), inst);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(charged[j], g[j], 1e-10 * std::max(1.0, g[j]));
      EXPECT_NEAR(s.g_accum[j], g[j], 1e-10 * std::max(1.0, g[j]));
    }
  }
}

TEST(DynamicBudgetTest, Cases) {
  DualState s = DualState::initial(2, 10);
  const std::vector<double> d = {1.0, 2.0};
  EXPECT_EQ(dynamic_budget(s, d, 10), d);

  s.t = 4;
  s.g_accum = {3.0, 6.0};  // on schedule
  const auto on = dynamic_budget(s, d, 10);
  EXPECT_NEAR(on[0], 1.0, 1e-15);
  EXPECT_NEAR(on[1], 2.0, 1e-15);

  s.g_accum = {10.0, 25.0};
  const auto over = dynamic_budget(s, d, 10);
  EXPECT_EQ(over[0], 0.0);
  EXPECT_EQ(over[1], 0.0);

  s.t = 11;
  EXPECT_THROW(dynamic_budget(s, d, 10), StructuralError);
}

SolutionTrace run(const Instance& inst, Variant v, std::uint64_t seed,
                  bool record = false) {
  const LinearizedInstance lin = linearize(inst);
  return run_online(inst, lin, {v, seed, record});
}

TEST(RunOnlineTest, NonPositiveRevenueRejectsAll) {
  std::mt19937_64 rng(3);
  Instance inst = to_soc(fixture::random_instance(rng, 20, 2, 3));
  for (Request& r : inst.requests) {
    for (double& c : r.c) c = -c;
  }
  for (Variant v : {Variant::kVanilla, Variant::kMarginal, Variant::kMarginalDynamic}) {
    const SolutionTrace trace = run(inst, v, 1, true);
    for (const Decision& d : trace.decisions) EXPECT_FALSE(d.accepted());
    EXPECT_EQ(trace.objective, 0.0);
    EXPECT_EQ(trace.dual_path->back(), std::vector<double>(2, 0.0));
  }
}

TEST(RunOnlineTest, SingleStep) {
  Instance inst;
  inst.n = 1;
  inst.m = 1;
  inst.k = 1;
  inst.d = {1.0};
  inst.requests = {scalar_request({1.0}, {0.5}, {0.0})};
  inst.risk.eta = std::vector<double>{0.9};
  inst = to_soc(inst);
  const SolutionTrace trace = run(inst, Variant::kVanilla, 0);
  EXPECT_EQ(trace.decisions, std::vector<Decision>{Decision::pick(0)});
  EXPECT_EQ(trace.objective, 1.0);
}

// Hand-rolled vanilla loop written from the update rule, used as an oracle.
TEST(RunOnlineTest, VanillaMatchesDirectLoop) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 200;
    Instance inst = to_soc(fixture::random_instance(rng, n, 3, 4));
    const LinearizedInstance lin = linearize(inst);
    const SolutionTrace trace = run(inst, Variant::kVanilla, 9, true);
    std::vector<double> p(3, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      const Request& r = inst.requests[t];
      double best = -1e300;
      std::size_t arg = 0;
      for (std::size_t l = 0; l < 4; ++l) {
        double v = r.c[l];
        for (std::size_t j = 0; j < 3; ++j) v -= p[j] * lin.a_tilde[t](j, l);
        if (v > best) {
          best = v;
          arg = l;
        }
      }
      const bool take = best > 0.0;
      EXPECT_EQ(trace.decisions[t].accepted(), take) << "t=" << t;
      if (take) {
        EXPECT_EQ(*trace.decisions[t].scheme, arg);
      }
      for (std::size_t j = 0; j < 3; ++j) {
        const double used = take ? lin.a_tilde[t](j, arg) : 0.0;
        p[j] = std::max(p[j] + (used - 1.0) / std::sqrt(double(n)), 0.0);
        EXPECT_NEAR((*trace.dual_path)[t][j], p[j], 1e-12);
      }
    }
  }
}

TEST(RunOnlineTest, ZeroPsiVariantsAgree) {
  std::mt19937_64 rng(5);
  Instance inst = fixture::random_instance(rng, 300, 2, 3);
  inst.risk.psi.assign(2, 0.0);
  EXPECT_EQ(run(inst, Variant::kVanilla, 3).decisions,
            run(inst, Variant::kMarginal, 3).decisions);
}

TEST(RunOnlineTest, PrefixCausality) {
  std::mt19937_64 rng(7);
  Instance inst = to_soc(fixture::random_instance(rng, 200, 2, 3));
  const LinearizedInstance lin = linearize(inst);
  for (Variant v : {Variant::kVanilla, Variant::kMarginal, Variant::kMarginalDynamic}) {
    const auto whole = run(inst, v, 5).decisions;
    OnlineSolver solver(200, inst.d, inst.risk.psi, {v, 5, false});
    for (std::size_t t = 0; t < 100; ++t) {
      solver.step(inst.requests[t], lin.a_tilde[t]);
    }
    EXPECT_TRUE(std::equal(solver.trace().decisions.begin(),
                           solver.trace().decisions.end(), whole.begin()));
  }
}

TEST(RunOnlineTest, Deterministic) {
  std::mt19937_64 rng(8);
  Instance inst = to_soc(fixture::random_instance(rng, 500, 4, 5));
  for (Variant v : {Variant::kVanilla, Variant::kMarginal, Variant::kMarginalDynamic}) {
    EXPECT_EQ(run(inst, v, 42, true), run(inst, v, 42, true));
  }
}

TEST(RunOnlineTest, DualStaysBounded) {
  std::mt19937_64 rng(9);
  Instance inst = to_soc(fixture::random_instance(rng, 2000, 4, 5));
  const SolutionTrace trace = run(inst, Variant::kVanilla, 1, true);
  for (const auto& p : *trace.dual_path) {
    for (double pj : p) {
      EXPECT_GE(pj, 0.0);
      EXPECT_LT(pj, 2.0);  // c_max / d_min + 1 with c <= 1, d = 1
    }
  }
}

TEST(RunOnlineTest, AccumulatorsNondecreasing) {
  std::mt19937_64 rng(10);
  Instance inst = to_soc(fixture::random_instance(rng, 300, 2, 3));
  const LinearizedInstance lin = linearize(inst);
  OnlineSolver solver(300, inst.d, inst.risk.psi, {Variant::kMarginalDynamic, 2, false});
  std::vector<double> q(2, 0.0);
  std::vector<double> g(2, 0.0);
  for (std::size_t t = 0; t < 300; ++t) {
    solver.step(inst.requests[t], lin.a_tilde[t]);
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_GE(solver.state().q_accum[j], q[j]);
      EXPECT_GE(solver.state().g_accum[j], g[j]);
      q[j] = solver.state().q_accum[j];
      g[j] = solver.state().g_accum[j];
    }
  }
  EXPECT_THROW(solver.step(inst.requests[0], lin.a_tilde[0]), StructuralError);
}

TEST(RunOnlineTest, ShapeMismatch) {
  std::mt19937_64 rng(11);
  Instance inst = to_soc(fixture::random_instance(rng, 5, 2, 3));
  const LinearizedInstance lin = linearize(inst);
  Instance broken = inst;
  broken.requests.pop_back();
  EXPECT_THROW(run_online(broken, lin, {}), StructuralError);
}

TEST(VariantNameTest, RoundTrip) {
  for (Variant v : {Variant::kVanilla, Variant::kMarginal, Variant::kMarginalDynamic}) {
    EXPECT_EQ(parse_variant(variant_name(v)), v);
  }
  EXPECT_EQ(parse_variant("marginal+dynamic"), Variant::kMarginalDynamic);
  EXPECT_FALSE(parse_variant("greedy").has_value());
}

}  // namespace
}  // namespace soc_alloc
