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

// Command-line front end: Monte Carlo sweeps, analytical curves and the
// offline design search.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "overbeam/codebook.hpp"
#include "overbeam/error.hpp"
#include "overbeam/harness.hpp"

namespace {

using namespace overbeam;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// "0,5,10" or "start:step:stop".
std::vector<double> parse_snr_list(const std::string& text) {
  std::vector<double> out;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw ConfigError("bad number '" + s + "' in --snr-db");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::stringstream ss(text);
    std::string a, b, c;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c)) {
      throw ConfigError("--snr-db range must be start:step:stop");
    }
    const double start = number(a), step = number(b), stop = number(c);
    if (!(step > 0.0)) throw ConfigError("--snr-db step must be positive");
    for (int i = 0; start + i * step <= stop + 1e-9; ++i) out.push_back(start + i * step);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(number(item));
  }
  return out;
}

struct GridFlags {
  std::string config;
  std::string snr;
  std::string out;
};

SweepConfig default_sweep() {
  SweepConfig cfg;
  cfg.snr_db = {0, 5, 10, 15, 20, 25, 30};
  cfg.trials = 10000;
  cfg.algorithms = {parse_algorithm_spec("fce"), parse_algorithm_spec("race"),
                    parse_algorithm_spec("baseline")};
  return cfg;
}

SweepConfig resolve(const GridFlags& flags) {
  SweepConfig cfg = default_sweep();
  if (!flags.config.empty()) cfg = load_sweep_config(flags.config, cfg);
  if (!flags.snr.empty()) cfg.snr_db = parse_snr_list(flags.snr);
  if (!flags.out.empty()) cfg.out = flags.out;
  return cfg;
}

std::string energy_path_for(const std::string& out) {
  std::filesystem::path p(out);
  const auto stem = p.stem().string();
  return (p.parent_path() / (stem + "_energy" + p.extension().string())).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"overbeam: overlapped beam-pattern channel estimation simulator"};
  app.require_subcommand(1);

  GridFlags sweep_flags;
  std::string algos;
  int trials = 0;
  long long seed = -1;
  int threads = -1;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo PEE / energy / MSE sweep over E_T/N0");
  sweep->add_option("--config", sweep_flags.config, "key = value config file");
  sweep->add_option("--algo", algos, "comma list: fce, race[:M_max], baseline, exhaustive");
  sweep->add_option("--snr-db", sweep_flags.snr, "E_T/N0 points in dB: a,b,c or start:step:stop");
  sweep->add_option("--trials", trials, "trials per point");
  sweep->add_option("--seed", seed, "base seed");
  sweep->add_option("--threads", threads, "worker threads (0 = all cores)");
  sweep->add_option("--out", sweep_flags.out, "output CSV (default: stdout)");

  GridFlags bounds_flags;
  auto* bounds = app.add_subcommand("bounds", "analytical PEE and minimum-energy curves");
  bounds->add_option("--config", bounds_flags.config, "key = value config file");
  bounds->add_option("--snr-db", bounds_flags.snr, "E_T/N0 points in dB");
  bounds->add_option("--out", bounds_flags.out,
                     "PEE CSV; the energy curves go to <stem>_energy<ext> (default: stdout)");

  int m = 4, kt = 3, kr = 3, wt = 2, wr = 2;
  std::uint64_t cap = 10'000'000;
  std::string design_out;
  std::string convention = "paper-literal";
  auto* search = app.add_subcommand("design-search", "exhaustive beam-pattern design search");
  search->add_option("--m", m, "measurement slots M")->capture_default_str();
  search->add_option("--kt", kt, "transmit sub-ranges")->capture_default_str();
  search->add_option("--kr", kr, "receive sub-ranges")->capture_default_str();
  search->add_option("--wt", wt, "nonzero entries per transmit row")->capture_default_str();
  search->add_option("--wr", wr, "nonzero entries per receive row")->capture_default_str();
  search->add_option("--cap", cap, "enumeration cap")->capture_default_str();
  search->add_option("--convention", convention, "grid convention recorded in the header");
  search->add_option("--out", design_out, "design file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sweep) {
      SweepConfig cfg = resolve(sweep_flags);
      if (!algos.empty()) {
        cfg.algorithms.clear();
        std::stringstream ss(algos);
        std::string a;
        while (std::getline(ss, a, ',')) {
          if (!a.empty()) cfg.algorithms.push_back(parse_algorithm_spec(a));
        }
      }
      if (trials != 0) cfg.trials = trials;
      if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
      if (threads >= 0) cfg.threads = threads;
      const SweepResult res = run_sweep(cfg);
      if (cfg.out.empty()) {
        emit_csv(res, std::cout);
      } else {
        emit_csv(res, cfg.out);
      }
    } else if (*bounds) {
      const SweepConfig cfg = resolve(bounds_flags);
      if (cfg.out.empty()) {
        std::ostringstream energy;
        emit_bounds(cfg, std::cout, energy);
        std::cout << '\n' << energy.str();
      } else {
        emit_bounds(cfg, cfg.out, energy_path_for(cfg.out));
      }
    } else if (*search) {
      const DesignSearchResult res = search_optimal_design(m, kt, kr, wt, wr, cap);
      DesignFileInfo info{wt, wr, parse_grid_convention(convention)};
      if (design_out.empty()) {
        write_design(std::cout, res.design, info);
      } else {
        save_design(design_out, res.design, info);
      }
      std::cerr << "d_min = " << res.d_min << " (" << res.candidates << " pairs, "
                << res.rejected << " rejected)\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ArgumentError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BudgetError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DesignError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
