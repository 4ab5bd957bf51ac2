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

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "overbeam/codebook.hpp"
#include "overbeam/detector.hpp"
#include "overbeam/grid_channel.hpp"

namespace overbeam {

enum class Algorithm { Fce, Race, Baseline, Exhaustive };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

struct EstimatorConfig {
  int n = 27;
  int k = 3;
  int m = 4;
  double p_t = 1.0;
  double n0 = 1.0;
  double p_r = 1.0;
  double gamma = 1e-2;
  int m_max = 9;
  int paths = 1;
  Algorithm algorithm = Algorithm::Fce;
  GridConvention convention = GridConvention::PaperLiteral;

  int stages() const { return stage_count(n, k); }
  void validate() const;
};

/// P_T / C_s^4.
double stage_power(double p_t, double c_s);

/// Bits fed back per decision epoch: ceil(log2(K) + 1).
int feedback_bits_per_decision(int k);

struct MeasurementRecord {
  cplx y;
  int stage = 1;
  int slot = 0;          // 0-based within the stage
  double power = 0.0;    // transmit power of the slot
  double gain = 0.0;     // C_T * C_R of the slot beams, 0 when nothing is sent
  bool augmented = false;
  const BeamformingVector* tx = nullptr;
  const BeamformingVector* rx = nullptr;
};

struct StageState {
  int stage = 1;
  SubRangePartition tx;
  SubRangePartition rx;
  MeasurementStack stack;
  std::vector<MeasurementRecord> records;
  int extra = 0;  // R
};

struct StageOutcome {
  Hypothesis choice;
  double confidence = 1.0;
  StageState state;
};

struct EstimateResult {
  double phiT_hat = 0.0;
  double phiR_hat = 0.0;
  int aod_idx = 0;
  int aoa_idx = 0;
  cplx alpha_hat{0.0, 0.0};
  cplx alpha_hat_final_stage{0.0, 0.0};
  int total_measurements = 0;
  double total_energy = 0.0;
  int feedback_bits = 0;
  double min_confidence = 1.0;
  bool low_confidence = false;
  std::vector<Hypothesis> choices;     // per stage
  std::vector<int> extra_per_stage;    // R per stage
};

/// Previously estimated paths whose expected contribution is removed from
/// every new observation.
struct KnownPath {
  cplx alpha;
  int aod_idx;
  int aoa_idx;
};

/// Grid, synthesized beam tables and design shared by all runs with one
/// configuration. Read-only after construction, safe to share across threads.
class EstimationContext {
 public:
  explicit EstimationContext(const EstimatorConfig& config,
                             std::optional<DesignPair> design = std::nullopt);

  const EstimatorConfig& config() const { return config_; }
  const SteeringAngleGrid& grid() const { return *grid_; }
  const BeamSynthesizer& synthesizer() const { return *synth_; }
  const DesignPair& design() const { return design_; }
  const GeneratorMatrix& generator_matrix() const { return generator_; }
  const BeamTable& beams() const { return *table_; }
  /// Steering beams u(eps_i) for the exhaustive sweep.
  const std::vector<BeamformingVector>& steering_beams() const { return steering_; }

  /// Expected total energy per unit P_T of a run that makes no wrong
  /// decision, for a path placed uniformly on the grid. RACE is charged as
  /// FCE (R = 0).
  double energy_per_unit_power(Algorithm algorithm) const;

 private:
  EstimatorConfig config_;
  DesignPair design_;
  GeneratorMatrix generator_;
  std::unique_ptr<SteeringAngleGrid> grid_;
  std::unique_ptr<BeamSynthesizer> synth_;
  std::unique_ptr<BeamTable> table_;
  std::vector<BeamformingVector> steering_;
};

StageState begin_stage(const EstimationContext& ctx, const SubRangePartition& tx,
                       const SubRangePartition& rx);

/// Power of a slot whose beams have gain constants c_t and c_r: the stage
/// power rule applied per slot, so every slot carries amplitude sqrt(P_T) N.
double slot_power(double p_t, double c_t, double c_r);

StageOutcome run_stage_fce(const Channel& channel, StageState state,
                           const EstimationContext& ctx, Rng& rng,
                           std::span<const KnownPath> known = {});

StageOutcome run_stage_race(const Channel& channel, StageState state,
                            const EstimationContext& ctx, Rng& rng,
                            std::span<const KnownPath> known = {});

EstimateResult run_multistage(const Channel& channel, const EstimationContext& ctx,
                              Rng& rng, std::span<const KnownPath> known = {});

/// Scalar LMMSE estimate P_R r_hat^H r / (P_R |r_hat|^2 + N0).
cplx lmmse_alpha(const Eigen::VectorXcd& r, const Eigen::VectorXcd& r_hat, double p_r,
                 double n0);
/// Same estimate through the full (r_hat P_R r_hat^H + N0 I)^{-1} solve.
cplx lmmse_alpha_matrix(const Eigen::VectorXcd& r, const Eigen::VectorXcd& r_hat,
                        double p_r, double n0);

/// Expected noiseless observation of each record for a unit-gain path at
/// (aod_idx, aoa_idx).
Eigen::VectorXcd expected_response(std::span<const MeasurementRecord> records, int n,
                                   int aod_idx, int aoa_idx);

/// Estimates config().paths paths one after another with any algorithm.
std::vector<EstimateResult> estimate_multipath(const Channel& channel,
                                               const EstimationContext& ctx, Rng& rng);

}  // namespace overbeam
