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

#include "overbeam/baselines.hpp"

#include <cmath>

#include "overbeam/error.hpp"

namespace overbeam {

StageOutcome run_stage_nonoverlapped(const Channel& channel, StageState state,
                                     const EstimationContext& ctx, Rng& rng,
                                     std::span<const KnownPath> known) {
  const auto& cfg = ctx.config();
  const int k = cfg.k;
  const RangeBeams& tx = ctx.beams().at(state.tx.active());
  const RangeBeams& rx = ctx.beams().at(state.rx.active());
  std::vector<double> mags;
  for (int a = 1; a <= k; ++a) {
    for (int b = 1; b <= k; ++b) {
      const int d = k * (a - 1) + b;
      const auto& f = tx.one_hot[a - 1];
      const auto& w = rx.one_hot[b - 1];
      MeasurementRecord rec;
      rec.stage = state.stage;
      rec.slot = d - 1;
      if (f && w) {
        rec.tx = &*f;
        rec.rx = &*w;
        rec.gain = f->gain_constant * w->gain_constant;
        rec.power = slot_power(cfg.p_t, f->gain_constant, w->gain_constant);
        rec.y = measure(channel, *f, *w, rec.power, cfg.n0, rng);
        for (const auto& p : known) {
          rec.y -= std::sqrt(rec.power) * static_cast<double>(cfg.n) * p.alpha *
                   std::conj(w->grid_response(p.aoa_idx)) * f->grid_response(p.aod_idx);
        }
      } else {
        rec.y = complex_normal(cfg.n0, rng);
      }
      state.records.push_back(rec);
      mags.push_back(std::abs(rec.y));
    }
  }
  const int k2 = k * k;
  state.stack.y.resize(k2);
  state.stack.g = Eigen::MatrixXd::Identity(k2, k2);
  double log_sum = 0.0;
  int count = 0;
  for (int i = 0; i < k2; ++i) {
    state.stack.y(i) = state.records[i].y;
    if (state.records[i].gain > 0.0) {
      log_sum += std::log(std::sqrt(state.records[i].gain));
      ++count;
    }
  }
  state.stack.c_s = count ? std::exp(log_sum / count) : 1.0;
  state.stack.p_s = stage_power(cfg.p_t, state.stack.c_s);

  int best = -1;
  for (int i = 0; i < k2; ++i) {
    if (!state.stack.is_admissible(i + 1)) continue;
    if (best < 0 || mags[i] > mags[best]) best = i;
  }
  if (best < 0) throw StateError("no admissible sub-range combination");
  StageOutcome out;
  out.choice = Hypothesis::from_index(best + 1, k);
  out.confidence = detect(state.stack).posterior(best);
  out.state = std::move(state);
  return out;
}

SweepPeak exhaustive_sweep(const Channel& channel,
                           std::span<const BeamformingVector> beams, double power,
                           double n0, Rng& rng, std::span<const KnownPath> known) {
  const int n = channel.antennas();
  if (static_cast<int>(beams.size()) != n) {
    throw ArgumentError("exhaustive sweep needs one steering beam per grid angle");
  }
  SweepPeak out;
  out.peak = -1.0;
  out.records.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto& f = beams[i];
      const auto& w = beams[j];
      MeasurementRecord rec;
      rec.slot = n * i + j;
      rec.tx = &f;
      rec.rx = &w;
      rec.gain = f.gain_constant * w.gain_constant;
      rec.power = power;
      rec.y = measure(channel, f, w, power, n0, rng);
      for (const auto& p : known) {
        rec.y -= std::sqrt(power) * static_cast<double>(n) * p.alpha *
                 std::conj(w.grid_response(p.aoa_idx)) * f.grid_response(p.aod_idx);
      }
      out.records.push_back(rec);
      ++out.measurements;
      const double mag = std::abs(rec.y);
      if (mag > out.peak) {
        out.peak = mag;
        out.aod_idx = i;
        out.aoa_idx = j;
      }
    }
  }
  return out;
}

SweepPeak exhaustive_sweep(const Channel& channel, const SteeringAngleGrid& grid,
                           double power, double n0, Rng& rng) {
  std::vector<BeamformingVector> beams;
  beams.reserve(grid.size());
  for (int i = 0; i < grid.size(); ++i) beams.push_back(steering_beam(grid, i));
  SweepPeak out = exhaustive_sweep(channel, beams, power, n0, rng);
  for (auto& r : out.records) r.tx = r.rx = nullptr;
  return out;
}

}  // namespace overbeam
