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

// Seeded synthetic instances.
//
//   uniform     c ~ U[0,1], a_bar ~ U[0,4], k_diag ~ (U[0,1])^2, d = 1
//   chi-square  c ~ chi2(3), a_bar ~ (2/3) chi2(4), k_diag ~ ((2/3) chi2(2))^2,
//               d = 1
//
// Every coefficient is drawn from its own stream keyed by
// (seed, t, j, l, field), so any request can be generated independently of
// the others and in any order.

#ifndef SOC_ALLOC_GENERATOR_HPP_
#define SOC_ALLOC_GENERATOR_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "soc_alloc/error.hpp"
#include "soc_alloc/model.hpp"
#include "soc_alloc/rng.hpp"

namespace soc_alloc {

enum class Experiment { kUniform, kChiSquare, kCustom };

enum class Field : std::uint64_t { kRevenue = 0, kMean = 1, kVariance = 2 };

inline std::string_view experiment_name(Experiment e) {
  switch (e) {
    case Experiment::kUniform:
      return "uniform";
    case Experiment::kChiSquare:
      return "chi-square";
    case Experiment::kCustom:
      return "custom";
  }
  return "unknown";
}

inline Experiment parse_experiment(std::string_view name) {
  if (name == "uniform") return Experiment::kUniform;
  if (name == "chi-square" || name == "chi_square") return Experiment::kChiSquare;
  if (name == "custom") return Experiment::kCustom;
  throw ConfigError("unknown experiment '" + std::string(name) +
                    "' (expected uniform or chi-square)");
}

// User-supplied coefficient distribution for Experiment::kCustom. Receives
// a generator already keyed to the coefficient's coordinates.
using CoefficientSampler = std::function<double(Field, SplitMix64&)>;

struct GeneratorConfig {
  Experiment experiment = Experiment::kUniform;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::vector<double> d;  // empty means all ones
  std::optional<std::vector<double>> eta;
  std::optional<std::vector<double>> gamma_tilde;
  std::uint64_t seed = 0;
  CoefficientSampler custom;
};

namespace detail {

inline double chi_square(double dof, SplitMix64& rng) {
  return std::gamma_distribution<double>(0.5 * dof, 2.0)(rng);
}

inline double draw(const GeneratorConfig& cfg, Field field, std::size_t t,
                   std::size_t j, std::size_t l) {
  SplitMix64 rng(stream_key(cfg.seed, {t, j, l, static_cast<std::uint64_t>(field)}));
  switch (cfg.experiment) {
    case Experiment::kUniform: {
      const double u = to_unit(rng());
      if (field == Field::kRevenue) return u;
      if (field == Field::kMean) return 4.0 * u;
      return u * u;
    }
    case Experiment::kChiSquare: {
      if (field == Field::kRevenue) return chi_square(3.0, rng);
      if (field == Field::kMean) return (2.0 / 3.0) * chi_square(4.0, rng);
      const double s = (2.0 / 3.0) * chi_square(2.0, rng);
      return s * s;
    }
    case Experiment::kCustom:
      return cfg.custom(field, rng);
  }
  throw ConfigError("unknown experiment");
}

}  // namespace detail

inline void check_generator_config(const GeneratorConfig& cfg) {
  if (cfg.n < 1 || cfg.m < 1 || cfg.k < 1) {
    throw ConfigError("generator: n, m and k must be at least 1");
  }
  if (cfg.experiment == Experiment::kCustom && !cfg.custom) {
    throw ConfigError("generator: custom experiment needs a sampler");
  }
  if (!cfg.d.empty() && cfg.d.size() != cfg.m) {
    throw ConfigError("generator: budget vector must have m entries");
  }
  if (cfg.experiment != Experiment::kUniform &&
      cfg.experiment != Experiment::kChiSquare &&
      cfg.experiment != Experiment::kCustom) {
    throw ConfigError("generator: unknown experiment tag");
  }
}

/// Request t (0-based) of the instance described by `cfg`.
inline Request generate_request(const GeneratorConfig& cfg, std::size_t t) {
  Request r;
  r.c.resize(cfg.k);
  r.a_bar = Matrix(cfg.m, cfg.k);
  r.k_diag = Matrix(cfg.m, cfg.k);
  for (std::size_t l = 0; l < cfg.k; ++l) {
    r.c[l] = detail::draw(cfg, Field::kRevenue, t, 0, l);
  }
  for (std::size_t j = 0; j < cfg.m; ++j) {
    for (std::size_t l = 0; l < cfg.k; ++l) {
      r.a_bar(j, l) = detail::draw(cfg, Field::kMean, t, j, l);
      r.k_diag(j, l) = detail::draw(cfg, Field::kVariance, t, j, l);
    }
  }
  return r;
}

/// Instance header (everything except the requests).
inline Instance instance_header(const GeneratorConfig& cfg) {
  check_generator_config(cfg);
  Instance inst;
  inst.n = cfg.n;
  inst.m = cfg.m;
  inst.k = cfg.k;
  inst.d = cfg.d.empty() ? std::vector<double>(cfg.m, 1.0) : cfg.d;
  inst.risk.eta = cfg.eta;
  inst.risk.gamma_tilde = cfg.gamma_tilde;
  return inst;
}

inline Instance generate(const GeneratorConfig& cfg) {
  Instance inst = instance_header(cfg);
  inst.requests.reserve(cfg.n);
  for (std::size_t t = 0; t < cfg.n; ++t) {
    inst.requests.push_back(generate_request(cfg, t));
  }
  return inst;
}

}  // namespace soc_alloc

#endif  // SOC_ALLOC_GENERATOR_HPP_
