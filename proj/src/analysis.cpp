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

#include "overbeam/analysis.hpp"

#include <cmath>

#include "overbeam/codebook.hpp"
#include "overbeam/error.hpp"

namespace overbeam {

double LinkBudget::signal_scale() const {
  const double c2 = c_s * c_s;
  return p_s * c2 * c2 * static_cast<double>(n) * n * p_r;
}

void LinkBudget::validate() const {
  if (p_s < 0.0 || c_s < 0.0 || p_r < 0.0 || n0 < 0.0 || e_min < 0.0 || alpha_abs < 0.0) {
    throw ArgumentError("link budget quantities must be nonnegative");
  }
  if (!(p_fb >= 0.0 && p_fb <= 1.0)) throw ArgumentError("p_FB must lie in [0, 1]");
  if (n < 1 || m < 1 || r < 0 || k < 1) throw ArgumentError("invalid slot counts in budget");
}

double pairwise_error_prob(double gb) {
  if (!(gb >= 0.0)) throw ArgumentError("gamma_bar must be nonnegative");
  if (std::isinf(gb)) return 0.0;
  const double g2 = gb * gb;
  // 1 - sqrt(x/(x+2)) rewritten to keep precision at large x.
  const double root = std::sqrt(g2 / (g2 + 2.0));
  return 0.5 * (2.0 / (g2 + 2.0)) / (1.0 + root);
}

double gamma_bar(const LinkBudget& budget, double distance) {
  budget.validate();
  if (budget.n0 == 0.0) return distance > 0.0 ? INFINITY : 0.0;
  return std::sqrt(budget.signal_scale() / (2.0 * budget.n0)) * distance;
}

double gamma_bar(const LinkBudget& budget, const Eigen::MatrixXd& g, int d, int d2) {
  if (d < 1 || d2 < 1 || d > g.cols() || d2 > g.cols()) {
    throw BoundsError("gamma_bar: column index outside 1..K^2");
  }
  if (d == d2) throw ArgumentError("gamma_bar needs two different hypotheses");
  return gamma_bar(budget, (g.col(d - 1) - g.col(d2 - 1)).norm());
}

double pee_single_stage(const LinkBudget& budget, const Eigen::MatrixXd& g, PeeMode mode) {
  const int nh = static_cast<int>(g.cols());
  if ((g.colwise().norm().array() <= 0.0).any()) {
    throw ArgumentError("every generator column must be nonzero");
  }
  const ColumnDistances cd = min_column_distance(g);
  if (mode == PeeMode::Lower) {
    return pairwise_error_prob(gamma_bar(budget, cd.d_min));
  }
  const double prior = 1.0 / nh;
  double total = 0.0;
  for (int i = 0; i < nh; ++i) {
    if (mode == PeeMode::Upper) {
      for (int j = 0; j < nh; ++j) {
        if (j != i) total += prior * pairwise_error_prob(gamma_bar(budget, g, i + 1, j + 1));
      }
    } else {
      for (int j : cd.neighbors[i]) {
        total += prior * pairwise_error_prob(gamma_bar(budget, g, i + 1, j + 1));
      }
    }
  }
  return total;
}

MultistagePee pee_multistage(std::span<const double> per_stage) {
  MultistagePee out;
  double keep = 1.0;
  for (double p : per_stage) {
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("stage PEE outside [0, 1]");
    keep *= 1.0 - p;
    out.sum += p;
  }
  out.product = 1.0 - keep;
  return out;
}

double shannon_snr_bound(int k, int slots) {
  if (slots < 1) throw ArgumentError("need at least one slot");
  return std::exp2(static_cast<double>(k) * k / slots) - 1.0;
}

double min_energy_bound(const LinkBudget& b) {
  b.validate();
  const int slots = b.m + b.r;
  const double c2 = b.c_s * b.c_s;
  const double useful = static_cast<double>(b.m) / (b.k * b.k) + b.r * b.p_fb;
  const double denom =
      c2 * c2 * static_cast<double>(b.n) * b.n * b.alpha_abs * b.alpha_abs * useful;
  if (!(denom > 0.0)) throw ArgumentError("min_energy_bound: denominator is zero");
  return static_cast<double>(slots) * slots * shannon_snr_bound(b.k, slots) / denom;
}

}  // namespace overbeam
