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

#ifndef SOC_ALLOC_SOC_ALLOC_HPP_
#define SOC_ALLOC_SOC_ALLOC_HPP_

#include "soc_alloc/baseline.hpp"
#include "soc_alloc/error.hpp"
#include "soc_alloc/experiment.hpp"
#include "soc_alloc/generator.hpp"
#include "soc_alloc/io.hpp"
#include "soc_alloc/metrics.hpp"
#include "soc_alloc/model.hpp"
#include "soc_alloc/online.hpp"
#include "soc_alloc/prob_math.hpp"
#include "soc_alloc/rng.hpp"
#include "soc_alloc/transform.hpp"

#endif  // SOC_ALLOC_SOC_ALLOC_HPP_
