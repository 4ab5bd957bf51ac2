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

#include "overbeam/detector.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "overbeam/error.hpp"

namespace overbeam {

int MeasurementStack::k() const {
  const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(g.cols()))));
  if (k * k != g.cols()) throw ArgumentError("generator width is not a perfect square");
  return k;
}

double MeasurementStack::signal_variance() const {
  const double c2 = c_s * c_s;
  return p_s * static_cast<double>(n) * n * c2 * c2 * p_r;
}

bool MeasurementStack::is_admissible(int d) const {
  return admissible.empty() || admissible.at(d - 1);
}

void MeasurementStack::validate() const {
  if (y.size() != g.rows()) {
    throw ArgumentError("stack has " + std::to_string(y.size()) + " observations but " +
                        std::to_string(g.rows()) + " generator rows");
  }
  if (y.size() == 0) throw ArgumentError("empty measurement stack");
  if (!admissible.empty() && static_cast<int>(admissible.size()) != g.cols()) {
    throw ArgumentError("admissible mask length differs from the hypothesis count");
  }
  if (!y.allFinite()) throw ArgumentError("non-finite observation in stack");
  if (n0 < 0.0 || p_s < 0.0 || p_r < 0.0) throw ArgumentError("negative power in stack");
}

Hypothesis Hypothesis::from_index(int d, int k) {
  if (d < 1 || d > k * k) throw BoundsError("hypothesis index outside 1..K^2");
  const int kt = (d + k - 1) / k;
  return {d, kt, d - k * (kt - 1)};
}

Hypothesis Hypothesis::from_pair(int k_t, int k_r, int k) {
  if (k_t < 1 || k_t > k || k_r < 1 || k_r > k) throw BoundsError("sub-range outside 1..K");
  return {k * (k_t - 1) + k_r, k_t, k_r};
}

namespace {

void check_index(const MeasurementStack& s, int d) {
  if (d < 1 || d > s.hypotheses()) throw BoundsError("hypothesis index outside 1..K^2");
}

// Log-likelihood without the -M log(pi) term.
double ll_core(const MeasurementStack& s, int d, double y2) {
  const auto gd = s.g.col(d - 1);
  const double a = gd.squaredNorm();
  const double sig = s.signal_variance();
  const cplx proj = gd.cast<cplx>().dot(s.y);
  const double m = s.slots();
  const double logdet = m * std::log(s.n0) + std::log1p(sig * a / s.n0);
  const double quad = (y2 - sig * std::norm(proj) / (s.n0 + sig * a)) / s.n0;
  return -logdet - quad;
}

}  // namespace

Eigen::MatrixXcd hypothesis_covariance(const MeasurementStack& stack, int d) {
  stack.validate();
  check_index(stack, d);
  const Eigen::VectorXcd gd = stack.g.col(d - 1).cast<cplx>();
  const int m = stack.slots();
  Eigen::MatrixXcd cov = stack.signal_variance() * gd * gd.adjoint();
  cov += stack.n0 * Eigen::MatrixXcd::Identity(m, m);
  if (stack.n0 == 0.0 && m > 1) {
    throw NumericalError("covariance is singular: N0 = 0 with a rank-one signal term");
  }
  return cov;
}

double log_likelihood(const MeasurementStack& stack, int d) {
  stack.validate();
  check_index(stack, d);
  if (stack.n0 <= 0.0) throw NumericalError("log-likelihood undefined for N0 = 0");
  return -stack.slots() * std::log(std::numbers::pi) +
         ll_core(stack, d, stack.y.squaredNorm());
}

Eigen::VectorXd posterior(const MeasurementStack& stack) {
  stack.validate();
  const int nh = stack.hypotheses();
  const double ninf = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd ll = Eigen::VectorXd::Constant(nh, ninf);
  const double y2 = stack.y.squaredNorm();
  if (stack.n0 > 0.0) {
    for (int d = 1; d <= nh; ++d) {
      if (stack.is_admissible(d)) ll(d - 1) = ll_core(stack, d, y2);
    }
  } else {
    // Zero-noise limit: hypotheses whose column does not span y drop out; the
    // rest keep -log(sigma^2 a) - |y|^2 / (sigma^2 a) up to a common term.
    const double sig = stack.signal_variance();
    for (int d = 1; d <= nh; ++d) {
      if (!stack.is_admissible(d)) continue;
      const Eigen::VectorXcd gd = stack.g.col(d - 1).cast<cplx>();
      const double a = gd.squaredNorm();
      if (a == 0.0 || sig == 0.0) {
        if (y2 == 0.0) ll(d - 1) = 0.0;
        continue;
      }
      const Eigen::VectorXcd resid = stack.y - gd * (gd.dot(stack.y) / a);
      if (resid.norm() <= 1e-9 * std::max(1.0, std::sqrt(y2))) {
        ll(d - 1) = -std::log(sig * a) - y2 / (sig * a);
      }
    }
  }
  const double top = ll.maxCoeff();
  if (!std::isfinite(top)) {
    throw NumericalError("every hypothesis has zero likelihood");
  }
  // Eigen's vectorized exp clamps -inf to a denormal, so masked entries are
  // zeroed explicitly.
  Eigen::VectorXd p(nh);
  for (int i = 0; i < nh; ++i) p(i) = std::isfinite(ll(i)) ? std::exp(ll(i) - top) : 0.0;
  p /= p.sum();
  return p;
}

Detection detect(const MeasurementStack& stack) {
  Detection out;
  out.posterior = posterior(stack);
  int best = 0;
  for (int i = 1; i < out.posterior.size(); ++i) {
    if (out.posterior(i) > out.posterior(best)) best = i;
  }
  out.hypothesis = Hypothesis::from_index(best + 1, stack.k());
  out.confidence = out.posterior(best);
  return out;
}

}  // namespace overbeam
