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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "overbeam/codebook.hpp"
#include "overbeam/estimators.hpp"

namespace overbeam {

/// An algorithm plus its own slot cap, written "race" or "race:18".
struct AlgorithmSpec {
  Algorithm algorithm = Algorithm::Fce;
  int m_max = 0;  // 0 = use the config value
  std::string label;
};

AlgorithmSpec parse_algorithm_spec(std::string_view text);

enum class GainModel { Rayleigh, FixedMagnitude };

struct SweepConfig {
  EstimatorConfig base;
  std::vector<double> snr_db;  // E_T / N0
  int trials = 1000;
  std::vector<AlgorithmSpec> algorithms;
  std::uint64_t seed = 1;
  std::string out;
  int threads = 0;  // 0 = one per hardware thread
  std::string design_path;
  GainModel gain = GainModel::Rayleigh;

  void validate() const;
};

/// Reads `key = value` lines ('#' starts a comment) on top of `base`.
SweepConfig parse_sweep_config(std::istream& in, SweepConfig base = {});
SweepConfig load_sweep_config(const std::string& path, SweepConfig base = {});

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

WilsonInterval wilson_interval(std::uint64_t errors, std::uint64_t trials,
                               double z = 1.959963984540054);

struct SweepRow {
  std::string algorithm;
  double snr_db = 0.0;
  double pee = 0.0;
  double pee_lo = 0.0;
  double pee_hi = 0.0;
  double mean_meas = 0.0;
  double mean_energy = 0.0;
  double mse_alpha_db = 0.0;
  double mean_fb_bits = 0.0;
  double mse_alpha_final_db = 0.0;
  std::uint64_t errors = 0;
  std::uint64_t trials = 0;

  bool operator==(const SweepRow&) const = default;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool operator==(const SweepResult&) const = default;
};

/// Transmit constant P_T giving the requested E_T/N0 for a run that makes
/// no wrong decision. RACE uses the FCE budget.
double power_for_budget(const EstimationContext& ctx, Algorithm algorithm, double snr_db,
                        double n0);

SweepResult run_sweep(const SweepConfig& config,
                      std::optional<DesignPair> design = std::nullopt);

void emit_csv(const SweepResult& result, std::ostream& out);
void emit_csv(const SweepResult& result, const std::string& path);
SweepResult read_csv(std::istream& in);
SweepResult read_csv(const std::string& path);

/// Writes the PEE curves over config.snr_db to `pee_path` and the minimum
/// energy curves over R to `energy_path`.
void emit_bounds(const SweepConfig& config, std::ostream& pee_out, std::ostream& energy_out,
                 std::optional<DesignPair> design = std::nullopt);
void emit_bounds(const SweepConfig& config, const std::string& pee_path,
                 const std::string& energy_path,
                 std::optional<DesignPair> design = std::nullopt);

}  // namespace overbeam
