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

#ifndef SOC_ALLOC_ERROR_HPP_
#define SOC_ALLOC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace soc_alloc {

// Input outside the mathematical domain of a function (non-finite, p outside
// (0,1), nonpositive cap).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Missing or contradictory configuration, e.g. a constraint with neither a
// confidence level nor a conditional-expectation cap.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dimension mismatch between an instance, its linearization and a trace.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input document (instance, trace or certificate files).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace soc_alloc

#endif  // SOC_ALLOC_ERROR_HPP_
