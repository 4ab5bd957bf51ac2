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

#include <span>

#include <Eigen/Dense>

namespace overbeam {

struct LinkBudget {
  double p_s = 1.0;
  double c_s = 1.0;
  int n = 1;
  double p_r = 1.0;
  double n0 = 1.0;
  double e_min = 0.0;  // squared minimum column distance
  int m = 4;
  int r = 0;
  int k = 3;
  double p_fb = 1.0;
  double alpha_abs = 1.0;

  /// P_s C_s^4 N^2 P_R.
  double signal_scale() const;
  void validate() const;
};

/// 1/2 [1 - sqrt(gb^2 / (gb^2 + 2))].
double pairwise_error_prob(double gamma_bar);

/// sqrt(P_s C_s^4 N^2 P_R / (2 N0)) * distance.
double gamma_bar(const LinkBudget& budget, double distance);
/// Same for columns d, d2 (1-based) of g.
double gamma_bar(const LinkBudget& budget, const Eigen::MatrixXd& g, int d, int d2);

enum class PeeMode { Upper, Approx, Lower };

double pee_single_stage(const LinkBudget& budget, const Eigen::MatrixXd& g, PeeMode mode);

struct MultistagePee {
  double product = 0.0;  // 1 - prod(1 - p_s)
  double sum = 0.0;      // union bound
};

MultistagePee pee_multistage(std::span<const double> per_stage);

/// 2^{K^2/(M+R)} - 1.
double shannon_snr_bound(int k, int slots);

/// Minimum E_s/N0 (linear) for M+R slots:
/// (M+R)^2 (2^{K^2/(M+R)} - 1) / (C^4 N^2 |alpha|^2 [M/K^2 + R p_FB]).
double min_energy_bound(const LinkBudget& budget);

}  // namespace overbeam
