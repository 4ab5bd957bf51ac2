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

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "overbeam/random.hpp"

namespace overbeam {

using cplx = std::complex<double>;

/// How grid index i maps to a steering angle.
///   PaperLiteral: eps_i = pi * i / N  (non-orthogonal Vandermonde response)
///   Dft:          eps_i = i / N       (unitary DFT response)
enum class GridConvention { PaperLiteral, Dft };

std::string_view to_string(GridConvention c);
GridConvention parse_grid_convention(std::string_view name);

/// Discrete steering angles of a uniform linear array with N elements,
/// together with the N x N array-response matrix U = [u(eps_0) ... u(eps_{N-1})].
class SteeringAngleGrid {
 public:
  explicit SteeringAngleGrid(int n,
                             GridConvention convention = GridConvention::PaperLiteral);

  int size() const { return n_; }
  GridConvention convention() const { return convention_; }
  double angle(int idx) const;
  std::span<const double> angles() const { return angles_; }
  const Eigen::MatrixXcd& response() const { return response_; }

 private:
  int n_;
  GridConvention convention_;
  std::vector<double> angles_;
  Eigen::MatrixXcd response_;
};

/// u(eps_idx): entry n is exp(j 2 pi eps n) / sqrt(N). Throws BoundsError.
Eigen::VectorXcd steering_vector(const SteeringAngleGrid& grid, int idx);

/// Steering angle of a physical direction theta for half-wavelength spacing,
/// phi = sin(theta) / 2.
double steering_angle_from_physical(double theta);

struct PathParams {
  cplx alpha{0.0, 0.0};
  int aod_idx = 0;  // transmit grid index
  int aoa_idx = 0;  // receive grid index

  bool operator==(const PathParams&) const = default;
};

/// H = N * sum_l alpha_l u(phi_r) u(phi_t)^H for a symmetric N x N array.
Eigen::MatrixXcd build_channel(const SteeringAngleGrid& grid,
                               std::span<const PathParams> paths);

/// alpha ~ CN(0, P_R), indices uniform over the grid.
std::vector<PathParams> sample_paths(const SteeringAngleGrid& grid, int count,
                                     double gain_variance, Rng& rng);

/// Unit-norm antenna weights. `grid_response` caches U^H weights so on-grid
/// channel gains can be evaluated in O(L).
struct BeamformingVector {
  Eigen::VectorXcd weights;
  double gain_constant = 1.0;
  Eigen::VectorXcd grid_response;
};

BeamformingVector make_beamformer(const SteeringAngleGrid& grid,
                                  Eigen::VectorXcd weights,
                                  double gain_constant = 1.0);

/// Beam steered at a single grid angle, f = u(eps_idx).
BeamformingVector steering_beam(const SteeringAngleGrid& grid, int idx);

/// Sparse geometric channel: keeps the path list next to the dense matrix.
class Channel {
 public:
  Channel(const SteeringAngleGrid& grid, std::vector<PathParams> paths);

  int antennas() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  std::span<const PathParams> paths() const { return paths_; }

  /// w^H H f from the beams' grid responses; equals the dense product for
  /// on-grid paths.
  cplx gain(const BeamformingVector& f, const BeamformingVector& w) const;

 private:
  std::vector<PathParams> paths_;
  Eigen::MatrixXcd matrix_;
};

struct NoiseModel {
  double n0 = 1.0;
  std::uint64_t seed = 0;
};

/// One circularly symmetric CN(0, n0) sample.
cplx complex_normal(double n0, Rng& rng);

/// y = sqrt(P) w^H H f x + n with pilot x = 1 and n ~ CN(0, n0).
/// Throws ContractError if ||f|| or ||w|| differs from 1 by more than 1e-9.
cplx measure(const Eigen::MatrixXcd& h, const BeamformingVector& f,
             const BeamformingVector& w, double power, double n0, Rng& rng);

/// Same as above, using the O(L) on-grid evaluation of w^H H f.
cplx measure(const Channel& channel, const BeamformingVector& f,
             const BeamformingVector& w, double power, double n0, Rng& rng);

}  // namespace overbeam
