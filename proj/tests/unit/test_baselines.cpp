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

#include <array>

#include "doctest.h"
#include "oracles.hpp"
#include "overbeam/baselines.hpp"
#include "overbeam/error.hpp"

using namespace overbeam;

TEST_SUITE("baselines") {

TEST_CASE("one-hot stage") {
  EstimatorConfig c;
  c.n0 = 0.0;
  c.algorithm = Algorithm::Baseline;
  const EstimationContext ctx(c);
  const auto p0 = SubRangePartition::initial(27, 3);
  const Channel ch(ctx.grid(), {PathParams{{0.2, 0.9}, 12, 20}});
  Rng rng(1);
  const auto out = run_stage_nonoverlapped(ch, begin_stage(ctx, p0, p0), ctx, rng);
  REQUIRE(out.state.records.size() == 9);
  for (int i = 0; i < 9; ++i) {
    if (i == 5) {
      CHECK(std::abs(out.state.records[i].y) > 1.0);
    } else {
      CHECK(std::abs(out.state.records[i].y) < 1e-9);
    }
  }
  CHECK(out.choice == Hypothesis{6, 2, 3});
  CHECK(out.confidence == 1.0);
}

TEST_CASE("slot budget against FCE") {
  EstimatorConfig c;
  c.n0 = 0.5;
  Rng cr(3);
  c.algorithm = Algorithm::Baseline;
  const EstimationContext base(c);
  c.algorithm = Algorithm::Fce;
  const EstimationContext fce(c);
  for (int t = 0; t < 50; ++t) {
    const Channel ch(base.grid(), sample_paths(base.grid(), 1, 1.0, cr));
    Rng a = make_rng(1, t), b = make_rng(1, t);
    const auto rb = run_multistage(ch, base, a);
    const auto rf = run_multistage(ch, fce, b);
    CHECK(rb.total_measurements == 27);
    CHECK(rf.total_measurements == 12);
    CHECK(static_cast<double>(rb.total_measurements) / rf.total_measurements == 2.25);
  }
}

TEST_CASE("pure noise gives a uniform choice") {
  EstimatorConfig c;
  c.p_t = 1e-12;
  c.algorithm = Algorithm::Baseline;
  const EstimationContext ctx(c);
  const auto p0 = SubRangePartition::initial(27, 3);
  const Channel ch(ctx.grid(), {PathParams{{1.0, 0.0}, 3, 3}});
  const int trials = 10000;
  std::array<int, 9> counts{};
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(42, t);
    ++counts[run_stage_nonoverlapped(ch, begin_stage(ctx, p0, p0), ctx, rng).choice.d - 1];
  }
  double chi2 = 0.0;
  const double e = trials / 9.0;
  for (int n : counts) chi2 += (n - e) * (n - e) / e;
  CHECK(chi2 < 20.09);  // chi-square, 8 dof, p = 0.01
}

TEST_CASE("magnitude argmax is the ML choice") {
  EstimatorConfig c;
  c.n0 = 2.0;
  c.p_t = 0.05;
  c.algorithm = Algorithm::Baseline;
  const EstimationContext ctx(c);
  const auto p0 = SubRangePartition::initial(27, 3);
  Rng cr(8);
  for (int t = 0; t < 300; ++t) {
    const Channel ch(ctx.grid(), sample_paths(ctx.grid(), 1 + t % 3, 1.0, cr));
    Rng rng = make_rng(9, t);
    const auto out = run_stage_nonoverlapped(ch, begin_stage(ctx, p0, p0), ctx, rng);
    CHECK(detect(out.state.stack).hypothesis == out.choice);
  }
}

TEST_CASE("exhaustive sweep") {
  SUBCASE("single path, every placement") {
    const SteeringAngleGrid grid(8);
    int wrong = 0;
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        const Channel ch(grid, {PathParams{{0.0, -1.3}, i, j}});
        Rng rng(0);
        const SweepPeak p = exhaustive_sweep(ch, grid, 1.0, 0.0, rng);
        wrong += p.aod_idx != i || p.aoa_idx != j;
        wrong += p.measurements != 64 || p.records.size() != 64;
      }
    }
    CHECK(wrong == 0);
  }
  SUBCASE("dominant path wins") {
    const SteeringAngleGrid grid(8);
    const cplx a1{0.9, 0.3}, a2{-0.2, 0.35};
    REQUIRE(std::abs(a1) > 2.0 * std::abs(a2));
    // Virtual channel u_i^H H u_j built from the oracle's steering vectors.
    const Eigen::MatrixXcd h = oracle::rank_one_channel(8, a1, oracle::grid_angle(8, 1, false),
                                                        oracle::grid_angle(8, 6, false)) +
                               oracle::rank_one_channel(8, a2, oracle::grid_angle(8, 4, false),
                                                        oracle::grid_angle(8, 2, false));
    int bi = 0, bj = 0;
    double top = -1.0;
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        const double v = std::abs(oracle::steering(8, oracle::grid_angle(8, j, false)).dot(
            h * oracle::steering(8, oracle::grid_angle(8, i, false))));
        if (v > top) {
          top = v;
          bi = i;
          bj = j;
        }
      }
    }
    REQUIRE(bi == 1);
    REQUIRE(bj == 6);
    const Channel ch(grid, {PathParams{a1, 1, 6}, PathParams{a2, 4, 2}});
    Rng rng(0);
    const SweepPeak p = exhaustive_sweep(ch, grid, 1.0, 0.0, rng);
    CHECK(p.aod_idx == 1);
    CHECK(p.aoa_idx == 6);
    CHECK(p.peak == doctest::Approx(top));
  }
  SUBCASE("through the estimator") {
    EstimatorConfig c;
    c.n0 = 0.0;
    c.algorithm = Algorithm::Exhaustive;
    const EstimationContext ctx(c);
    const Channel ch(ctx.grid(), {PathParams{{0.5, 0.5}, 19, 7}});
    Rng rng(0);
    const auto r = run_multistage(ch, ctx, rng);
    CHECK(r.aod_idx == 19);
    CHECK(r.aoa_idx == 7);
    CHECK(r.total_measurements == 729);
    CHECK(r.total_energy == doctest::Approx(729.0));
    CHECK(r.feedback_bits == 5);
    CHECK(std::abs(r.alpha_hat - cplx(0.5, 0.5)) < 1e-9);
  }
  SUBCASE("beam count must match") {
    const SteeringAngleGrid grid(8);
    const Channel ch(grid, {PathParams{{1.0, 0.0}, 0, 0}});
    std::vector<BeamformingVector> beams{steering_beam(grid, 0)};
    Rng rng(0);
    CHECK_THROWS_AS(exhaustive_sweep(ch, beams, 1.0, 0.0, rng), ArgumentError);
  }
}

}
