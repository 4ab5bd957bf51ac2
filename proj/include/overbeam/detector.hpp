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

#include <vector>

#include <Eigen/Dense>

#include "overbeam/grid_channel.hpp"

namespace overbeam {

/// Stacked pilot observations of one stage. Row i of `g` is the generator
/// row used in slot i; columns index the K*K sub-range combinations.
struct MeasurementStack {
  Eigen::VectorXcd y;
  Eigen::MatrixXd g;
  double p_s = 1.0;  // stage power
  double c_s = 1.0;  // stage gain constant
  int n = 1;         // antennas
  double p_r = 1.0;  // path gain variance
  double n0 = 1.0;
  // Hypotheses allowed by the current partition (empty = all). Columns
  // whose transmit or receive sub-range is empty are excluded.
  std::vector<bool> admissible;

  int slots() const { return static_cast<int>(y.size()); }
  int hypotheses() const { return static_cast<int>(g.cols()); }
  int k() const;
  /// P_s N^2 C_s^4 P_R.
  double signal_variance() const;
  bool is_admissible(int d) const;
  void validate() const;
};

struct Hypothesis {
  int d = 1;    // combined index, 1-based
  int k_t = 1;  // transmit sub-range, 1-based
  int k_r = 1;  // receive sub-range, 1-based

  static Hypothesis from_index(int d, int k);
  static Hypothesis from_pair(int k_t, int k_r, int k);
  bool operator==(const Hypothesis&) const = default;
};

struct Detection {
  Hypothesis hypothesis;
  double confidence = 0.0;
  Eigen::VectorXd posterior;
};

Eigen::MatrixXcd hypothesis_covariance(const MeasurementStack& stack, int d);

/// -M log(pi) - log det(Sigma_d) - y^H Sigma_d^{-1} y via the rank-one
/// determinant and inverse identities. Throws NumericalError when N0 = 0.
double log_likelihood(const MeasurementStack& stack, int d);

/// Posterior over the K*K single-path hypotheses under a uniform prior.
/// With N0 = 0 the zero-noise limit is taken: only hypotheses whose column
/// spans y keep mass.
Eigen::VectorXd posterior(const MeasurementStack& stack);

Detection detect(const MeasurementStack& stack);

}  // namespace overbeam
