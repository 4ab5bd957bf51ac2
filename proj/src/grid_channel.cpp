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

#include "overbeam/grid_channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "overbeam/error.hpp"

namespace overbeam {

namespace {

constexpr double kUnitNormTol = 1e-9;

void check_unit_norm(const BeamformingVector& v, const char* name) {
  const double norm = v.weights.norm();
  if (std::abs(norm - 1.0) > kUnitNormTol) {
    throw ContractError(std::string("measure: beamformer ") + name +
                        " has norm " + std::to_string(norm) + ", expected 1");
  }
}

void check_index(const SteeringAngleGrid& grid, int idx) {
  if (idx < 0 || idx >= grid.size()) {
    throw BoundsError("grid index " + std::to_string(idx) + " outside [0, " +
                      std::to_string(grid.size()) + ")");
  }
}

}  // namespace

std::string_view to_string(GridConvention c) {
  switch (c) {
    case GridConvention::PaperLiteral:
      return "paper-literal";
    case GridConvention::Dft:
      return "dft";
  }
  return "unknown";
}

GridConvention parse_grid_convention(std::string_view name) {
  if (name == "paper-literal") return GridConvention::PaperLiteral;
  if (name == "dft") return GridConvention::Dft;
  throw ArgumentError("unknown grid convention '" + std::string(name) + "'");
}

SteeringAngleGrid::SteeringAngleGrid(int n, GridConvention convention)
    : n_(n), convention_(convention) {
  if (n <= 0) throw ArgumentError("antenna count must be positive");
  angles_.resize(n);
  for (int i = 0; i < n; ++i) {
    angles_[i] = convention == GridConvention::PaperLiteral
                     ? std::numbers::pi * i / n
                     : static_cast<double>(i) / n;
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  response_.resize(n, n);
  for (int col = 0; col < n; ++col) {
    for (int row = 0; row < n; ++row) {
      response_(row, col) =
          std::polar(scale, 2.0 * std::numbers::pi * angles_[col] * row);
    }
  }
}

double SteeringAngleGrid::angle(int idx) const {
  check_index(*this, idx);
  return angles_[idx];
}

Eigen::VectorXcd steering_vector(const SteeringAngleGrid& grid, int idx) {
  check_index(grid, idx);
  return grid.response().col(idx);
}

double steering_angle_from_physical(double theta) { return std::sin(theta) / 2.0; }

Eigen::MatrixXcd build_channel(const SteeringAngleGrid& grid,
                               std::span<const PathParams> paths) {
  if (paths.empty()) throw ArgumentError("build_channel: empty path list");
  const int n = grid.size();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& p : paths) {
    check_index(grid, p.aod_idx);
    check_index(grid, p.aoa_idx);
    h.noalias() += (static_cast<double>(n) * p.alpha) *
                   grid.response().col(p.aoa_idx) *
                   grid.response().col(p.aod_idx).adjoint();
  }
  return h;
}

std::vector<PathParams> sample_paths(const SteeringAngleGrid& grid, int count,
                                     double gain_variance, Rng& rng) {
  if (count < 1) throw ArgumentError("sample_paths: need at least one path");
  if (!(gain_variance > 0.0)) {
    throw ArgumentError("sample_paths: gain variance must be positive");
  }
  std::uniform_int_distribution<int> index(0, grid.size() - 1);
  std::vector<PathParams> paths(count);
  for (auto& p : paths) {
    p.alpha = complex_normal(gain_variance, rng);
    p.aod_idx = index(rng);
    p.aoa_idx = index(rng);
  }
  return paths;
}

BeamformingVector make_beamformer(const SteeringAngleGrid& grid,
                                  Eigen::VectorXcd weights,
                                  double gain_constant) {
  if (weights.size() != grid.size()) {
    throw ArgumentError("beamformer length does not match the array size");
  }
  BeamformingVector v;
  v.grid_response = grid.response().adjoint() * weights;
  v.weights = std::move(weights);
  v.gain_constant = gain_constant;
  return v;
}

BeamformingVector steering_beam(const SteeringAngleGrid& grid, int idx) {
  return make_beamformer(grid, steering_vector(grid, idx), 1.0);
}

Channel::Channel(const SteeringAngleGrid& grid, std::vector<PathParams> paths)
    : paths_(std::move(paths)), matrix_(build_channel(grid, paths_)) {}

cplx Channel::gain(const BeamformingVector& f, const BeamformingVector& w) const {
  const double n = static_cast<double>(matrix_.rows());
  cplx sum{0.0, 0.0};
  // w^H u_r = conj(u_r^H w), u_t^H f = (U^H f)[t]
  for (const auto& p : paths_) {
    sum += p.alpha * std::conj(w.grid_response[p.aoa_idx]) *
           f.grid_response[p.aod_idx];
  }
  return n * sum;
}

cplx complex_normal(double n0, Rng& rng) {
  if (n0 <= 0.0) return {0.0, 0.0};
  std::normal_distribution<double> normal(0.0, std::sqrt(n0 / 2.0));
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

cplx measure(const Eigen::MatrixXcd& h, const BeamformingVector& f,
             const BeamformingVector& w, double power, double n0, Rng& rng) {
  check_unit_norm(f, "f");
  check_unit_norm(w, "w");
  if (power < 0.0) throw ArgumentError("measure: negative transmit power");
  const cplx signal = w.weights.dot(h * f.weights);  // dot conjugates w
  return std::sqrt(power) * signal + complex_normal(n0, rng);
}

cplx measure(const Channel& channel, const BeamformingVector& f,
             const BeamformingVector& w, double power, double n0, Rng& rng) {
  check_unit_norm(f, "f");
  check_unit_norm(w, "w");
  if (power < 0.0) throw ArgumentError("measure: negative transmit power");
  return std::sqrt(power) * channel.gain(f, w) + complex_normal(n0, rng);
}

}  // namespace overbeam
