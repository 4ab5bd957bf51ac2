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
#include <vector>

#include "overbeam/estimators.hpp"

namespace overbeam {

/// One stage of the non-overlapped search: K*K one-hot slots in the order
/// d = K(k_t - 1) + k_r, decision by the largest |y|.
StageOutcome run_stage_nonoverlapped(const Channel& channel, StageState state,
                                     const EstimationContext& ctx, Rng& rng,
                                     std::span<const KnownPath> known = {});

struct SweepPeak {
  int aod_idx = 0;
  int aoa_idx = 0;
  double peak = 0.0;
  int measurements = 0;
  std::vector<MeasurementRecord> records;  // slot = N * aod + aoa
};

/// Measures every (u(eps_i), u(eps_j)) pair and returns the strongest.
SweepPeak exhaustive_sweep(const Channel& channel,
                           std::span<const BeamformingVector> beams, double power,
                           double n0, Rng& rng, std::span<const KnownPath> known = {});

SweepPeak exhaustive_sweep(const Channel& channel, const SteeringAngleGrid& grid,
                           double power, double n0, Rng& rng);

}  // namespace overbeam
