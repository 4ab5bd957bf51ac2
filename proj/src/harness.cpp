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

#include "overbeam/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "overbeam/analysis.hpp"
#include "overbeam/error.hpp"

namespace overbeam {

AlgorithmSpec parse_algorithm_spec(std::string_view text) {
  AlgorithmSpec spec;
  spec.label = std::string(text);
  const auto colon = text.find(':');
  spec.algorithm = parse_algorithm(text.substr(0, colon));
  if (colon != std::string_view::npos) {
    const auto cap = text.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(cap.data(), cap.data() + cap.size(), spec.m_max);
    if (ec != std::errc() || ptr != cap.data() + cap.size() || spec.m_max < 1) {
      throw ConfigError("bad slot cap in algorithm '" + spec.label + "'");
    }
  }
  return spec;
}

void SweepConfig::validate() const {
  base.validate();
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (snr_db.empty()) throw ConfigError("snr_db list is empty");
  for (std::size_t i = 1; i < snr_db.size(); ++i) {
    if (!(snr_db[i] > snr_db[i - 1])) throw ConfigError("snr_db must be strictly increasing");
  }
  if (algorithms.empty()) throw ConfigError("no algorithms selected");
  for (const auto& a : algorithms) {
    if (a.m_max != 0 && a.m_max < base.m) {
      throw ConfigError("slot cap of '" + a.label + "' is below M");
    }
  }
  if (threads < 0) throw ConfigError("threads must be >= 0");
}

// ---------------------------------------------------------------------------
// Config files

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': cannot parse '" + v + "'");
  }
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

SweepConfig parse_sweep_config(std::istream& in, SweepConfig cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string val = trim(std::string_view(line).substr(eq + 1));
    auto& b = cfg.base;
    if (key == "n") b.n = parse_number<int>(key, val);
    else if (key == "k") b.k = parse_number<int>(key, val);
    else if (key == "m") b.m = parse_number<int>(key, val);
    else if (key == "m_max") b.m_max = parse_number<int>(key, val);
    else if (key == "gamma") b.gamma = parse_number<double>(key, val);
    else if (key == "paths") b.paths = parse_number<int>(key, val);
    else if (key == "p_r") b.p_r = parse_number<double>(key, val);
    else if (key == "n0") b.n0 = parse_number<double>(key, val);
    else if (key == "convention") {
      try {
        b.convention = parse_grid_convention(val);
      } catch (const std::exception& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "algorithms") {
      cfg.algorithms.clear();
      for (const auto& a : split_list(val)) cfg.algorithms.push_back(parse_algorithm_spec(a));
    } else if (key == "snr_db") {
      cfg.snr_db.clear();
      for (const auto& s : split_list(val)) cfg.snr_db.push_back(parse_number<double>(key, s));
    } else if (key == "trials") cfg.trials = parse_number<int>(key, val);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, val);
    else if (key == "out") cfg.out = val;
    else if (key == "threads") cfg.threads = parse_number<int>(key, val);
    else if (key == "design") cfg.design_path = val;
    else if (key == "gain") {
      if (val == "rayleigh") cfg.gain = GainModel::Rayleigh;
      else if (val == "fixed") cfg.gain = GainModel::FixedMagnitude;
      else throw ConfigError("gain must be 'rayleigh' or 'fixed'");
    } else {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

SweepConfig load_sweep_config(const std::string& path, SweepConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_sweep_config(in, std::move(base));
}

// ---------------------------------------------------------------------------
// Monte Carlo

WilsonInterval wilson_interval(std::uint64_t errors, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, std::min(p, centre - half)), std::min(1.0, std::max(p, centre + half))};
}

double power_for_budget(const EstimationContext& ctx, Algorithm algorithm, double snr_db,
                        double n0) {
  const Algorithm charged = algorithm == Algorithm::Race ? Algorithm::Fce : algorithm;
  const double ref = n0 > 0.0 ? n0 : 1.0;
  return std::pow(10.0, snr_db / 10.0) * ref / ctx.energy_per_unit_power(charged);
}

namespace {

struct TrialOutcome {
  bool error = false;
  int measurements = 0;
  double energy = 0.0;
  double sq_err = 0.0;
  double sq_err_final = 0.0;
  int feedback_bits = 0;
};

bool same_pairs(std::vector<std::pair<int, int>> a, std::vector<std::pair<int, int>> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

TrialOutcome run_trial(const EstimationContext& ctx, const SweepConfig& cfg, int point,
                       int trial) {
  const auto& ec = ctx.config();
  Rng chan_rng = make_rng(cfg.seed, static_cast<std::uint64_t>(point),
                          static_cast<std::uint64_t>(trial), 0);
  Rng noise_rng = make_rng(cfg.seed, static_cast<std::uint64_t>(point),
                           static_cast<std::uint64_t>(trial), 1);
  std::vector<PathParams> paths = sample_paths(ctx.grid(), ec.paths, ec.p_r, chan_rng);
  if (cfg.gain == GainModel::FixedMagnitude) {
    for (auto& p : paths) {
      const double mag = std::abs(p.alpha);
      p.alpha = mag > 0.0 ? p.alpha / mag * std::sqrt(ec.p_r) : cplx(std::sqrt(ec.p_r), 0.0);
    }
  }
  const Channel channel(ctx.grid(), paths);
  const auto est = estimate_multipath(channel, ctx, noise_rng);

  TrialOutcome out;
  std::vector<std::pair<int, int>> truth, found;
  for (const auto& p : paths) truth.emplace_back(p.aod_idx, p.aoa_idx);
  for (const auto& e : est) {
    found.emplace_back(e.aod_idx, e.aoa_idx);
    out.measurements += e.total_measurements;
    out.energy += e.total_energy;
    out.feedback_bits += e.feedback_bits;
  }
  out.error = !same_pairs(truth, found);
  // Coefficient error per true path against the estimate on the same grid
  // pair (a missed path counts as estimated zero).
  for (const auto& p : paths) {
    cplx a{0.0, 0.0}, af{0.0, 0.0};
    for (const auto& e : est) {
      if (e.aod_idx == p.aod_idx && e.aoa_idx == p.aoa_idx) {
        a = e.alpha_hat;
        af = e.alpha_hat_final_stage;
        break;
      }
    }
    out.sq_err += std::norm(p.alpha - a);
    out.sq_err_final += std::norm(p.alpha - af);
  }
  out.sq_err /= static_cast<double>(paths.size());
  out.sq_err_final /= static_cast<double>(paths.size());
  return out;
}

std::vector<TrialOutcome> run_trials(const EstimationContext& ctx, const SweepConfig& cfg,
                                     int point) {
  std::vector<TrialOutcome> results(cfg.trials);
  int workers = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, cfg.trials);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    try {
      for (int t = next++; t < cfg.trials; t = next++) {
        results[t] = run_trial(ctx, cfg, point, t);
      }
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
      next = cfg.trials;
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

double to_db(double v) { return 10.0 * std::log10(v); }

}  // namespace

SweepResult run_sweep(const SweepConfig& config, std::optional<DesignPair> design) {
  config.validate();
  if (!design && !config.design_path.empty()) design = load_design(config.design_path);
  SweepResult result;
  for (const auto& spec : config.algorithms) {
    EstimatorConfig ec = config.base;
    ec.algorithm = spec.algorithm;
    if (spec.m_max > 0) ec.m_max = spec.m_max;
    ec.p_t = 1.0;
    const EstimationContext probe(ec, design);
    for (std::size_t i = 0; i < config.snr_db.size(); ++i) {
      ec.p_t = power_for_budget(probe, spec.algorithm, config.snr_db[i], ec.n0);
      const EstimationContext ctx(ec, design);
      const auto trials = run_trials(ctx, config, static_cast<int>(i));

      SweepRow row;
      row.algorithm = spec.label;
      row.snr_db = config.snr_db[i];
      row.trials = trials.size();
      double meas = 0.0, energy = 0.0, se = 0.0, se_final = 0.0, fb = 0.0;
      for (const auto& t : trials) {
        row.errors += t.error ? 1 : 0;
        meas += t.measurements;
        energy += t.energy;
        se += t.sq_err;
        se_final += t.sq_err_final;
        fb += t.feedback_bits;
      }
      const double n = static_cast<double>(row.trials);
      row.pee = static_cast<double>(row.errors) / n;
      const auto ci = wilson_interval(row.errors, row.trials);
      row.pee_lo = ci.lo;
      row.pee_hi = ci.hi;
      row.mean_meas = meas / n;
      row.mean_energy = energy / n;
      row.mse_alpha_db = to_db(se / n);
      row.mse_alpha_final_db = to_db(se_final / n);
      row.mean_fb_bits = fb / n;
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

constexpr const char* kHeader =
    "algorithm,EtN0_dB,pee,pee_lo,pee_hi,mean_meas,mean_energy,mse_alpha_dB,mean_fb_bits,"
    "mse_alpha_final_dB,errors,trials";

std::string fmt(double v) {
  char buf[64];
  // 17 significant digits: lossless for every double.
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, ptr);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

void emit_csv(const SweepResult& result, std::ostream& out) {
  out << kHeader << '\n';
  for (const auto& r : result.rows) {
    out << r.algorithm << ',' << fmt(r.snr_db) << ',' << fmt(r.pee) << ',' << fmt(r.pee_lo)
        << ',' << fmt(r.pee_hi) << ',' << fmt(r.mean_meas) << ',' << fmt(r.mean_energy) << ','
        << fmt(r.mse_alpha_db) << ',' << fmt(r.mean_fb_bits) << ','
        << fmt(r.mse_alpha_final_db) << ',' << r.errors << ',' << r.trials << '\n';
  }
}

void emit_csv(const SweepResult& result, const std::string& path) {
  auto out = open_out(path);
  emit_csv(result, out);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

SweepResult read_csv(std::istream& in) {
  SweepResult res;
  std::string line;
  if (!std::getline(in, line) || trim(line) != kHeader) {
    throw IoError("sweep CSV header mismatch");
  }
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(trim(cell));
    if (f.size() != 12) throw IoError("sweep CSV row has " + std::to_string(f.size()) + " fields");
    SweepRow r;
    try {
      r.algorithm = f[0];
      r.snr_db = parse_number<double>("EtN0_dB", f[1]);
      r.pee = parse_number<double>("pee", f[2]);
      r.pee_lo = parse_number<double>("pee_lo", f[3]);
      r.pee_hi = parse_number<double>("pee_hi", f[4]);
      r.mean_meas = parse_number<double>("mean_meas", f[5]);
      r.mean_energy = parse_number<double>("mean_energy", f[6]);
      r.mse_alpha_db = parse_number<double>("mse_alpha_dB", f[7]);
      r.mean_fb_bits = parse_number<double>("mean_fb_bits", f[8]);
      r.mse_alpha_final_db = parse_number<double>("mse_alpha_final_dB", f[9]);
      r.errors = parse_number<std::uint64_t>("errors", f[10]);
      r.trials = parse_number<std::uint64_t>("trials", f[11]);
    } catch (const ConfigError& e) {
      throw IoError(std::string("sweep CSV: ") + e.what());
    }
    res.rows.push_back(std::move(r));
  }
  return res;
}

SweepResult read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_csv(in);
}

// ---------------------------------------------------------------------------
// Analytical curves

void emit_bounds(const SweepConfig& config, std::ostream& pee_out, std::ostream& energy_out,
                 std::optional<DesignPair> design) {
  config.validate();
  if (!design && !config.design_path.empty()) design = load_design(config.design_path);
  EstimatorConfig ec = config.base;
  ec.algorithm = Algorithm::Fce;
  const EstimationContext ctx(ec, design);
  const Eigen::MatrixXd& g = ctx.generator_matrix().matrix();
  const int stages = ctx.beams().stages();
  const double n0 = ec.n0 > 0.0 ? ec.n0 : 1.0;

  // Stage-1 gain constant of the design beams.
  const RangeBeams& root = ctx.beams().root();
  double log_sum = 0.0;
  for (int m = 0; m < ec.m; ++m) {
    log_sum += 0.5 * std::log(root.transmit[m]->gain_constant * root.receive[m]->gain_constant);
  }
  const double c_s = std::exp(log_sum / ec.m);

  pee_out << "EtN0_dB,pee_lower,pee_approx,pee_upper,pee_multi_product,pee_multi_sum\n";
  for (double db : config.snr_db) {
    LinkBudget b;
    b.c_s = c_s;
    b.p_s = stage_power(power_for_budget(ctx, Algorithm::Fce, db, n0), c_s);
    b.n = ec.n;
    b.p_r = ec.p_r;
    b.n0 = n0;
    b.m = ec.m;
    b.k = ec.k;
    const double lo = pee_single_stage(b, g, PeeMode::Lower);
    const double ap = pee_single_stage(b, g, PeeMode::Approx);
    const double up = pee_single_stage(b, g, PeeMode::Upper);
    const std::vector<double> per_stage(stages, ap);
    const MultistagePee ms = pee_multistage(per_stage);
    pee_out << fmt(db) << ',' << fmt(lo) << ',' << fmt(ap) << ',' << fmt(up) << ','
            << fmt(ms.product) << ',' << fmt(ms.sum) << '\n';
  }

  energy_out << "R,slots,EsN0_dB_pfb_1,EsN0_dB_pfb_worst\n";
  const int r_max = std::max(ec.m_max - ec.m, 0);
  for (int r = 0; r <= r_max; ++r) {
    LinkBudget b;
    b.c_s = c_s;
    b.n = ec.n;
    b.m = ec.m;
    b.r = r;
    b.k = ec.k;
    b.alpha_abs = std::sqrt(ec.p_r);
    b.p_fb = 1.0;
    const double best = min_energy_bound(b);
    b.p_fb = 1.0 / (ec.k * ec.k);
    const double worst = min_energy_bound(b);
    energy_out << r << ',' << ec.m + r << ',' << fmt(to_db(best)) << ',' << fmt(to_db(worst))
               << '\n';
  }
}

void emit_bounds(const SweepConfig& config, const std::string& pee_path,
                 const std::string& energy_path, std::optional<DesignPair> design) {
  auto pee = open_out(pee_path);
  auto energy = open_out(energy_path);
  emit_bounds(config, pee, energy, std::move(design));
  pee.flush();
  energy.flush();
  if (!pee) throw IoError("write to '" + pee_path + "' failed");
  if (!energy) throw IoError("write to '" + energy_path + "' failed");
}

}  // namespace overbeam
