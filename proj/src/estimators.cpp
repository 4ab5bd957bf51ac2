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

#include "overbeam/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "overbeam/baselines.hpp"
#include "overbeam/error.hpp"

namespace overbeam {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Fce: return "fce";
    case Algorithm::Race: return "race";
    case Algorithm::Baseline: return "baseline";
    case Algorithm::Exhaustive: return "exhaustive";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "fce") return Algorithm::Fce;
  if (name == "race") return Algorithm::Race;
  if (name == "baseline") return Algorithm::Baseline;
  if (name == "exhaustive") return Algorithm::Exhaustive;
  throw ConfigError("unknown algorithm '" + std::string(name) +
                    "' (expected fce, race, baseline or exhaustive)");
}

void EstimatorConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (n < 1) fail("N must be >= 1");
  if (k < 2) fail("K must be >= 2");
  if (m < 1) fail("M must be >= 1");
  if (m_max < m) fail("M_max must be >= M");
  if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma must lie in (0, 1)");
  if (paths < 1) fail("L must be >= 1");
  if (!(p_t >= 0.0) || !(n0 >= 0.0) || !(p_r > 0.0)) fail("powers must be nonnegative");
}

double stage_power(double p_t, double c_s) {
  if (!(c_s > 0.0)) throw ArgumentError("stage gain constant must be positive");
  const double c2 = c_s * c_s;
  return p_t / (c2 * c2);
}

double slot_power(double p_t, double c_t, double c_r) {
  const double g = c_t * c_r;
  if (!(g > 0.0)) throw ArgumentError("slot gain constants must be positive");
  return p_t / (g * g);
}

int feedback_bits_per_decision(int k) {
  return static_cast<int>(std::ceil(std::log2(static_cast<double>(k)) + 1.0));
}

// ---------------------------------------------------------------------------

EstimationContext::EstimationContext(const EstimatorConfig& config,
                                     std::optional<DesignPair> design)
    : config_(config) {
  config_.validate();
  if (design) {
    design_ = *std::move(design);
  } else if (config_.k == 3 && config_.m == 4) {
    design_ = default_design_k3_m4();
  } else {
    throw ConfigError("no built-in design for K=" + std::to_string(config_.k) +
                      ", M=" + std::to_string(config_.m) + "; supply a design file");
  }
  if (design_.transmit.rows() != config_.m || design_.transmit.cols() != config_.k) {
    throw ConfigError("design is " + std::to_string(design_.transmit.rows()) + "x" +
                      std::to_string(design_.transmit.cols()) + ", config wants M=" +
                      std::to_string(config_.m) + ", K=" + std::to_string(config_.k));
  }
  generator_ = generator(design_.transmit, design_.receive);
  grid_ = std::make_unique<SteeringAngleGrid>(config_.n, config_.convention);
  synth_ = std::make_unique<BeamSynthesizer>(*grid_);
  table_ = std::make_unique<BeamTable>(*synth_, config_.k, &design_);
  steering_.reserve(config_.n);
  for (int i = 0; i < config_.n; ++i) steering_.push_back(steering_beam(*grid_, i));
}

namespace {

double inv_sq(const std::optional<BeamformingVector>& b) {
  return b ? 1.0 / (b->gain_constant * b->gain_constant) : 0.0;
}

}  // namespace

double EstimationContext::energy_per_unit_power(Algorithm algorithm) const {
  const int n = config_.n;
  if (algorithm == Algorithm::Exhaustive) return static_cast<double>(n) * n;
  const int k = config_.k;
  const int m = config_.m;
  double total = 0.0;
  std::vector<SubRangePartition> level{SubRangePartition::initial(n, k)};
  for (int s = 1; s <= table_->stages(); ++s) {
    // Expected 1/C^2 per slot beam, over where the path sits at this stage.
    std::vector<double> et(m, 0.0), er(m, 0.0), eh(k, 0.0);
    std::vector<SubRangePartition> next;
    for (const auto& p : level) {
      const double w = static_cast<double>(p.active().size()) / n;
      const RangeBeams& node = table_->at(p.active());
      for (int i = 0; i < m; ++i) {
        et[i] += w * inv_sq(node.transmit[i]);
        er[i] += w * inv_sq(node.receive[i]);
      }
      for (int j = 0; j < k; ++j) eh[j] += w * inv_sq(node.one_hot[j]);
      if (s < table_->stages()) {
        for (int j = 1; j <= k; ++j) {
          if (!p.part(j).empty()) next.push_back(p.refine(j));
        }
      }
    }
    if (algorithm == Algorithm::Baseline) {
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) total += eh[a] * eh[b];
      }
    } else {
      for (int i = 0; i < m; ++i) total += et[i] * er[i];
    }
    level = std::move(next);
  }
  return total;
}

// ---------------------------------------------------------------------------

StageState begin_stage(const EstimationContext& ctx, const SubRangePartition& tx,
                       const SubRangePartition& rx) {
  const auto& cfg = ctx.config();
  StageState st{tx.stage(), tx, rx, {}, {}, 0};
  st.stack.n = cfg.n;
  st.stack.p_r = cfg.p_r;
  st.stack.n0 = cfg.n0;
  st.stack.g.resize(0, cfg.k * cfg.k);
  st.stack.admissible.assign(cfg.k * cfg.k, false);
  for (int a = 1; a <= cfg.k; ++a) {
    for (int b = 1; b <= cfg.k; ++b) {
      st.stack.admissible[cfg.k * (a - 1) + b - 1] = !tx.part(a).empty() && !rx.part(b).empty();
    }
  }
  return st;
}

namespace {

cplx known_contribution(std::span<const KnownPath> known, const BeamformingVector& f,
                        const BeamformingVector& w, double power, int n) {
  cplx sum{0.0, 0.0};
  for (const auto& p : known) {
    sum += p.alpha * std::conj(w.grid_response(p.aoa_idx)) * f.grid_response(p.aod_idx);
  }
  return std::sqrt(power) * static_cast<double>(n) * sum;
}

// One pilot slot with beams f, w (either may be absent: nothing is sent and
// only noise is observed). Appends the record and the generator row.
void take_slot(const Channel& channel, StageState& st, const EstimationContext& ctx,
               const BeamformingVector* f, const BeamformingVector* w,
               const Eigen::RowVectorXd& g_row, bool augmented, Rng& rng,
               std::span<const KnownPath> known) {
  const auto& cfg = ctx.config();
  MeasurementRecord rec;
  rec.stage = st.stage;
  rec.slot = static_cast<int>(st.records.size());
  rec.augmented = augmented;
  if (f && w) {
    rec.tx = f;
    rec.rx = w;
    rec.gain = f->gain_constant * w->gain_constant;
    rec.power = slot_power(cfg.p_t, f->gain_constant, w->gain_constant);
    rec.y = measure(channel, *f, *w, rec.power, cfg.n0, rng);
    if (!known.empty()) rec.y -= known_contribution(known, *f, *w, rec.power, cfg.n);
  } else {
    rec.y = complex_normal(cfg.n0, rng);
  }
  st.records.push_back(rec);

  auto& s = st.stack;
  const int rows = static_cast<int>(s.y.size());
  s.y.conservativeResize(rows + 1);
  s.y(rows) = rec.y;
  s.g.conservativeResize(rows + 1, Eigen::NoChange);
  s.g.row(rows) = g_row;
}

// Gain constant shared by the stage's slots (geometric mean of the per-slot
// products) and the matching stage power; slot powers already equalize the
// per-slot products, so P_s C_s^4 = P_T.
void set_stage_power(StageState& st, double p_t) {
  double log_sum = 0.0;
  int count = 0;
  for (const auto& r : st.records) {
    if (r.gain > 0.0) {
      log_sum += std::log(std::sqrt(r.gain));
      ++count;
    }
  }
  st.stack.c_s = count ? std::exp(log_sum / count) : 1.0;
  st.stack.p_s = stage_power(p_t, st.stack.c_s);
}

const BeamformingVector* opt_ptr(const std::optional<BeamformingVector>& b) {
  return b ? &*b : nullptr;
}

}  // namespace

StageOutcome run_stage_fce(const Channel& channel, StageState state,
                           const EstimationContext& ctx, Rng& rng,
                           std::span<const KnownPath> known) {
  const auto& cfg = ctx.config();
  const RangeBeams& tx = ctx.beams().at(state.tx.active());
  const RangeBeams& rx = ctx.beams().at(state.rx.active());
  const Eigen::MatrixXd& g = ctx.generator_matrix().matrix();
  for (int m = 0; m < cfg.m; ++m) {
    take_slot(channel, state, ctx, opt_ptr(tx.transmit[m]), opt_ptr(rx.receive[m]), g.row(m),
              false, rng, known);
  }
  set_stage_power(state, cfg.p_t);
  const Detection det = detect(state.stack);
  return {det.hypothesis, det.confidence, std::move(state)};
}

StageOutcome run_stage_race(const Channel& channel, StageState state,
                            const EstimationContext& ctx, Rng& rng,
                            std::span<const KnownPath> known) {
  const auto& cfg = ctx.config();
  StageOutcome out = run_stage_fce(channel, std::move(state), ctx, rng, known);
  const RangeBeams& tx = ctx.beams().at(out.state.tx.active());
  const RangeBeams& rx = ctx.beams().at(out.state.rx.active());
  const int k2 = cfg.k * cfg.k;
  while (out.confidence < 1.0 - cfg.gamma && out.state.stack.slots() < cfg.m_max) {
    const Hypothesis h = out.choice;
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(k2);
    row(h.d - 1) = 1.0;
    take_slot(channel, out.state, ctx, opt_ptr(tx.one_hot[h.k_t - 1]),
              opt_ptr(rx.one_hot[h.k_r - 1]), row, true, rng, known);
    ++out.state.extra;
    set_stage_power(out.state, cfg.p_t);
    const Detection det = detect(out.state.stack);
    out.choice = det.hypothesis;
    out.confidence = det.confidence;
  }
  return out;
}

// ---------------------------------------------------------------------------

cplx lmmse_alpha(const Eigen::VectorXcd& r, const Eigen::VectorXcd& r_hat, double p_r,
                 double n0) {
  if (r.size() != r_hat.size()) throw ArgumentError("r and r_hat differ in length");
  const double denom = p_r * r_hat.squaredNorm() + n0;
  if (!(denom > 0.0)) throw NumericalError("LMMSE denominator is zero");
  return p_r * r_hat.dot(r) / denom;
}

cplx lmmse_alpha_matrix(const Eigen::VectorXcd& r, const Eigen::VectorXcd& r_hat,
                        double p_r, double n0) {
  if (r.size() != r_hat.size()) throw ArgumentError("r and r_hat differ in length");
  const auto n = r.size();
  const Eigen::MatrixXcd cov =
      p_r * r_hat * r_hat.adjoint() + n0 * Eigen::MatrixXcd::Identity(n, n);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(cov);
  if (!lu.isInvertible()) throw NumericalError("LMMSE covariance is singular");
  const Eigen::VectorXcd x = lu.solve(r);
  return p_r * r_hat.dot(x);
}

Eigen::VectorXcd expected_response(std::span<const MeasurementRecord> records, int n,
                                   int aod_idx, int aoa_idx) {
  Eigen::VectorXcd out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.tx || !r.rx) {
      out(i) = 0.0;
      continue;
    }
    out(i) = std::sqrt(r.power) * static_cast<double>(n) *
             std::conj(r.rx->grid_response(aoa_idx)) * r.tx->grid_response(aod_idx);
  }
  return out;
}

namespace {

void finish_estimate(EstimateResult& res, const std::vector<MeasurementRecord>& all,
                     std::size_t final_begin, const EstimatorConfig& cfg) {
  const Eigen::VectorXcd r_hat = expected_response(all, cfg.n, res.aod_idx, res.aoa_idx);
  Eigen::VectorXcd r(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) r(i) = all[i].y;
  const auto tail = static_cast<Eigen::Index>(all.size() - final_begin);
  if (cfg.n0 == 0.0 && r_hat.squaredNorm() == 0.0) {
    throw NumericalError("LMMSE undefined: N0 = 0 and the expected response is zero");
  }
  res.alpha_hat = lmmse_alpha(r, r_hat, cfg.p_r, cfg.n0);
  const double tail_norm = r_hat.tail(tail).squaredNorm();
  res.alpha_hat_final_stage = (cfg.n0 == 0.0 && tail_norm == 0.0)
                                  ? res.alpha_hat
                                  : lmmse_alpha(r.tail(tail), r_hat.tail(tail), cfg.p_r, cfg.n0);
  res.low_confidence = res.min_confidence < 1.0 - cfg.gamma;
}

EstimateResult run_exhaustive(const Channel& channel, const EstimationContext& ctx,
                              Rng& rng, std::span<const KnownPath> known) {
  const auto& cfg = ctx.config();
  SweepPeak peak = exhaustive_sweep(channel, ctx.steering_beams(), cfg.p_t, cfg.n0, rng, known);
  EstimateResult res;
  res.aod_idx = peak.aod_idx;
  res.aoa_idx = peak.aoa_idx;
  res.phiT_hat = ctx.grid().angle(peak.aod_idx);
  res.phiR_hat = ctx.grid().angle(peak.aoa_idx);
  res.total_measurements = peak.measurements;
  res.total_energy = cfg.p_t * peak.measurements;
  res.feedback_bits = static_cast<int>(std::ceil(std::log2(static_cast<double>(cfg.n))));
  res.min_confidence = 1.0;
  finish_estimate(res, peak.records, 0, cfg);
  return res;
}

}  // namespace

EstimateResult run_multistage(const Channel& channel, const EstimationContext& ctx,
                              Rng& rng, std::span<const KnownPath> known) {
  const auto& cfg = ctx.config();
  if (channel.antennas() != cfg.n) throw ArgumentError("channel size differs from N");
  if (cfg.algorithm == Algorithm::Exhaustive) return run_exhaustive(channel, ctx, rng, known);

  EstimateResult res;
  std::vector<MeasurementRecord> all;
  std::size_t final_begin = 0;
  SubRangePartition tx = SubRangePartition::initial(cfg.n, cfg.k);
  SubRangePartition rx = tx;
  const int bits = feedback_bits_per_decision(cfg.k);
  for (int s = 1; s <= ctx.beams().stages(); ++s) {
    StageState st = begin_stage(ctx, tx, rx);
    StageOutcome out;
    switch (cfg.algorithm) {
      case Algorithm::Fce: out = run_stage_fce(channel, std::move(st), ctx, rng, known); break;
      case Algorithm::Race: out = run_stage_race(channel, std::move(st), ctx, rng, known); break;
      default: out = run_stage_nonoverlapped(channel, std::move(st), ctx, rng, known); break;
    }
    res.choices.push_back(out.choice);
    res.extra_per_stage.push_back(out.state.extra);
    res.min_confidence = std::min(res.min_confidence, out.confidence);
    res.feedback_bits += (out.state.extra + 1) * bits;
    final_begin = all.size();
    for (const auto& r : out.state.records) {
      res.total_energy += r.power;
      all.push_back(r);
    }
    tx = tx.refine(out.choice.k_t);
    rx = rx.refine(out.choice.k_r);
  }
  if (tx.active().size() != 1 || rx.active().size() != 1) {
    throw StateError("search ended on a range wider than one grid angle");
  }
  res.total_measurements = static_cast<int>(all.size());
  res.aod_idx = tx.active().begin;
  res.aoa_idx = rx.active().begin;
  res.phiT_hat = ctx.grid().angle(res.aod_idx);
  res.phiR_hat = ctx.grid().angle(res.aoa_idx);
  finish_estimate(res, all, final_begin, cfg);
  return res;
}

std::vector<EstimateResult> estimate_multipath(const Channel& channel,
                                               const EstimationContext& ctx, Rng& rng) {
  std::vector<EstimateResult> out;
  std::vector<KnownPath> known;
  for (int l = 0; l < ctx.config().paths; ++l) {
    out.push_back(run_multistage(channel, ctx, rng, known));
    known.push_back({out.back().alpha_hat, out.back().aod_idx, out.back().aoa_idx});
  }
  return out;
}

}  // namespace overbeam
