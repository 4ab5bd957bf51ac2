// SPDX-License-Identifier: Apache-2.0
//
// Copyright (C) 2026 The overbeam authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace overbeam {

// Invalid arguments: empty path lists, mismatched shapes, bad enum names.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A documented precondition on a value (unit norm, positive definiteness) does not hold.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Singular or ill-conditioned linear algebra, non-finite likelihoods.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A beam-pattern design violates its normalization assumptions beyond tolerance.
class DesignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exhaustive design search would exceed the configured enumeration cap.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Refinement into an empty sub-range, or any other impossible estimator state.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace overbeam
