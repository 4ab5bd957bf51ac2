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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "overbeam/codebook.hpp"
#include "overbeam/error.hpp"

using namespace overbeam;

namespace {

const double kR2 = std::sqrt(2.0);

Eigen::MatrixXd reference_generator() {
  Eigen::MatrixXd g(4, 9);
  g << 2, kR2, 0, kR2, 1, 0, 0, 0, 0,
       0, kR2, 2, 0, 1, kR2, 0, 0, 0,
       0, 0, 0, kR2, 1, 0, 2, kR2, 0,
       0, 0, 0, 0, 1, kR2, 0, kR2, 2;
  return g / 3.0;
}

}  // namespace

TEST_SUITE("codebook") {

TEST_CASE("default K=3, M=4 design") {
  const DesignPair d = default_design_k3_m4();
  CHECK(d.transmit(0, 0) == doctest::Approx(std::sqrt(2.0) / std::sqrt(3.0)));
  CHECK(d.transmit(0, 0) == doctest::Approx(0.8165).epsilon(1e-4));
  for (const auto* b : {&d.transmit, &d.receive}) {
    for (int m = 0; m < 4; ++m) CHECK(std::abs(b->row_norms()(m) - 1.0) < 1e-12);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(b->column_norms()(k) - std::sqrt(4.0 / 3.0)) < 1e-12);
  }
  CHECK(d.transmit.amplitudes().row(0) == d.transmit.amplitudes().row(1));
  CHECK(d.transmit.amplitudes().row(2) == d.transmit.amplitudes().row(3));
  CHECK(d.receive.amplitudes().row(0) == d.receive.amplitudes().row(2));
  CHECK(d.receive.amplitudes().row(1) == d.receive.amplitudes().row(3));
  CHECK(d.transmit.role() == BeamRole::Transmit);
  CHECK(d.receive.role() == BeamRole::Receive);
}

TEST_CASE("beam-pattern amplitudes must be nonnegative") {
  Eigen::MatrixXd bad(1, 2);
  bad << 0.5, -0.1;
  CHECK_THROWS_AS(BeamPatternMatrix{bad}, ArgumentError);
}

TEST_CASE("generator of the default design") {
  const DesignPair d = default_design_k3_m4();
  const GeneratorMatrix g = generator(d.transmit, d.receive);
  CHECK((g.matrix() - reference_generator()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(g.column_index(3, 1) == 7);
  CHECK(g.column_index(1, 2) == 2);
}

TEST_CASE("generator of one-hot rows") {
  for (int i = 1; i <= 3; ++i) {
    for (int j = 1; j <= 3; ++j) {
      Eigen::MatrixXd bt = Eigen::MatrixXd::Zero(1, 3), br = Eigen::MatrixXd::Zero(1, 3);
      bt(0, i - 1) = 1.0;
      br(0, j - 1) = 1.0;
      const GeneratorMatrix g = generator(BeamPatternMatrix(bt), BeamPatternMatrix(br));
      Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(9);
      e(3 * (i - 1) + j - 1) = 1.0;
      CHECK(g.matrix().row(0) == e);
    }
  }
}

TEST_CASE("generator against a double loop on random matrices") {
  std::srand(12);
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd bt = Eigen::MatrixXd::Random(5, 2).cwiseAbs();
    const Eigen::MatrixXd br = Eigen::MatrixXd::Random(5, 3).cwiseAbs();
    const GeneratorMatrix g = generator(BeamPatternMatrix(bt), BeamPatternMatrix(br));
    CHECK(g.matrix() == oracle::generator_loop(bt, br));
    for (int a = 1; a <= 2; ++a) {
      for (int b = 1; b <= 3; ++b) {
        CHECK(g.matrix().col(g.column_index(a, b) - 1) == bt.col(a - 1).cwiseProduct(br.col(b - 1)));
      }
    }
  }
  CHECK_THROWS_AS(generator(BeamPatternMatrix(Eigen::MatrixXd::Ones(4, 3)),
                            BeamPatternMatrix(Eigen::MatrixXd::Ones(3, 3))),
                  ArgumentError);
}

TEST_CASE("minimum column distance") {
  SUBCASE("default design: equal per-column minima") {
    const DesignPair d = default_design_k3_m4();
    const ColumnDistances cd = min_column_distance(generator(d.transmit, d.receive));
    const double expect = std::sqrt((8.0 - 4.0 * kR2) / 9.0);
    CHECK(std::abs(cd.d_min - expect) < 1e-12);
    CHECK(std::abs(cd.d_min - oracle::min_pair_distance(reference_generator())) < 1e-12);
    CHECK(std::abs((reference_generator().col(0) - reference_generator().col(1)).norm() - expect) < 1e-12);
    for (double v : cd.column_min) CHECK(std::abs(v - expect) < 1e-12);
    // column 1 is closest to columns 2 and 4
    CHECK(cd.neighbors[0] == std::vector<int>{1, 3});
  }
  SUBCASE("orthogonal columns") {
    const double c = 0.7;
    const ColumnDistances cd = min_column_distance(Eigen::MatrixXd(c * Eigen::MatrixXd::Identity(9, 9)));
    CHECK(cd.d_min == doctest::Approx(c * kR2));
    CHECK(cd.neighbors[4].size() == 8);
  }
  SUBCASE("duplicate column") {
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(3, 3);
    g.col(2) = g.col(0);
    CHECK(min_column_distance(g).d_min == 0.0);
  }
  CHECK_THROWS_AS(min_column_distance(Eigen::MatrixXd::Ones(3, 1)), ArgumentError);
}

TEST_CASE("partitions") {
  SUBCASE("exact power-of-K split") {
    const auto p = SubRangePartition::initial(27, 3).refine(1);
    CHECK(p.active() == SubRange{0, 9});
    CHECK(p.part(1) == SubRange{0, 3});
    CHECK(p.part(2) == SubRange{3, 6});
    CHECK(p.part(3) == SubRange{6, 9});
    CHECK(p.stage() == 2);
  }
  SUBCASE("three refinements reach one grid angle") {
    CHECK(stage_count(27, 3) == 3);
    auto p = SubRangePartition::initial(27, 3);
    for (int k : {2, 3}) p = p.refine(k);
    CHECK(p.active() == SubRange{15, 18});
    p = p.refine(2);
    CHECK(p.active().size() == 1);
    CHECK(p.active().begin == 16);
  }
  SUBCASE("ceil split") {
    const auto p = SubRangePartition::initial(10, 3);
    CHECK(p.part(1).size() == 4);
    CHECK(p.part(2).size() == 3);
    CHECK(p.part(3).size() == 3);
    CHECK(stage_count(10, 3) == 3);
    const auto q = p.refine(1).refine(1);
    CHECK(q.part(1).size() == 1);
    CHECK(q.part(2).size() == 1);
    CHECK(q.part(3).empty());
    CHECK_THROWS_AS(q.refine(3), StateError);
  }
  SUBCASE("parts cover the range, sizes within one") {
    for (int n = 1; n <= 40; ++n) {
      const auto p = SubRangePartition::initial(n, 3);
      int at = 0, lo = n, hi = 0;
      for (const auto& r : p.all_parts()) {
        CHECK(r.begin == at);
        at = r.end;
        lo = std::min(lo, r.size());
        hi = std::max(hi, r.size());
      }
      CHECK(at == n);
      CHECK(hi - lo <= 1);
      for (int i = 0; i < n; ++i) CHECK(p.part(p.locate(i)).contains(i));
    }
  }
  CHECK_THROWS_AS(SubRangePartition::initial(9, 3).refine(4), BoundsError);
  CHECK(SubRangePartition::initial(9, 3).refine(2).locate(0) == 0);
  CHECK(stage_count(1, 3) == 1);
}

TEST_CASE("single-angle beams") {
  const int n = 5;
  SteeringAngleGrid grid(n);
  BeamSynthesizer synth(grid);
  const auto p = SubRangePartition::initial(n, n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> amps(n, 0.0);
    amps[i] = 1.0;
    const auto beam = synth.synthesize(p, amps);
    REQUIRE(beam);
    CHECK(std::abs(beam->weights.norm() - 1.0) < 1e-12);
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
    e(i) = beam->gain_constant;
    CHECK((grid.response().adjoint() * beam->weights - e).cwiseAbs().maxCoeff() < 1e-6);
    // proportional to column i of U^{-H}
    const Eigen::VectorXcd col = grid.response().adjoint().inverse().col(i);
    CHECK(std::abs(std::abs(col.normalized().dot(beam->weights)) - 1.0) < 1e-9);
  }
}

TEST_CASE("stage-1 beams of the default design on N = 27") {
  SteeringAngleGrid grid(27);
  BeamSynthesizer synth(grid);
  const DesignPair d = default_design_k3_m4();
  const auto p = SubRangePartition::initial(27, 3);
  std::vector<BeamformingVector> beams;
  for (const auto* b : {&d.transmit, &d.receive}) {
    for (int m = 0; m < 4; ++m) {
      std::vector<double> amps(b->amplitudes().row(m).begin(), b->amplitudes().row(m).end());
      const auto beam = synth.synthesize(p, amps);
      REQUIRE(beam);
      CHECK(std::abs(beam->weights.norm() - 1.0) < 1e-9);
      // target mapped by sub-range, evaluated directly
      Eigen::VectorXcd target(27);
      for (int i = 0; i < 27; ++i) target(i) = beam->gain_constant * amps[i / 9];
      const Eigen::VectorXcd achieved = grid.response().adjoint() * beam->weights;
      CHECK((achieved - target).cwiseAbs().maxCoeff() < 1e-6);
      beams.push_back(*beam);
    }
  }
  // mirrored rows give equal constants
  CHECK(std::abs(beams[0].gain_constant - beams[2].gain_constant) < 1e-9);
  const StageGain sg = stage_gain_constant(beams);
  CHECK(sg.spread <= 1e-6);
  CHECK_FALSE(sg.warning);
  CHECK(sg.value == beams[0].gain_constant);
}

TEST_CASE("stage gain constant") {
  SteeringAngleGrid grid(9);
  auto beam = steering_beam(grid, 2);
  SUBCASE("single beamformer") {
    beam.gain_constant = 0.37;
    CHECK(stage_gain_constant(std::vector{beam}).value == 0.37);
  }
  SUBCASE("asymmetric rows take the warning path") {
    BeamSynthesizer synth(grid);
    const auto p = SubRangePartition::initial(9, 3);
    const std::vector<double> a{0.8, 0.6, 0.0};
    std::vector<double> b{0.8, 0.6, 0.008};
    const double nb = std::hypot(0.8, 0.6, 0.008);
    for (auto& v : b) v /= nb;
    const std::vector<BeamformingVector> beams{*synth.synthesize(p, a), *synth.synthesize(p, b)};
    const double c0 = beams[0].gain_constant, c1 = beams[1].gain_constant;
    const double spread = std::abs(c0 - c1) / std::max(c0, c1);
    REQUIRE(spread > 1e-6);
    REQUIRE(spread <= 1e-2);
    const StageGain sg = stage_gain_constant(beams);
    CHECK(sg.warning);
    CHECK(sg.value == doctest::Approx(std::sqrt(c0 * c1)));
  }
  SUBCASE("large spread is a design violation") {
    auto other = beam;
    beam.gain_constant = 1.0;
    other.gain_constant = 0.5;
    CHECK_THROWS_AS(stage_gain_constant(std::vector{beam, other}), DesignError);
  }
  CHECK_THROWS_AS(stage_gain_constant(std::vector<BeamformingVector>{}), ArgumentError);
}

TEST_CASE("zero target and amplitude length") {
  SteeringAngleGrid grid(9);
  BeamSynthesizer synth(grid);
  const auto p = SubRangePartition::initial(9, 3);
  const std::vector<double> zero(3, 0.0);
  CHECK_FALSE(synth.synthesize(p, zero));
  CHECK_THROWS_AS(synthesize_beamformer(grid, p, zero), ArgumentError);
  const std::vector<double> short_row(2, 1.0);
  CHECK_THROWS_AS(synth.synthesize(p, short_row), ArgumentError);
}

TEST_CASE("ill-conditioned response is refused") {
  // Paper-literal angles wrap to nearly coincident phases for large N.
  SteeringAngleGrid grid(64);
  CHECK_THROWS_AS(BeamSynthesizer(grid, 10.0), NumericalError);
  try {
    BeamSynthesizer s(grid, 10.0);
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("condition") != std::string::npos);
  }
}

TEST_CASE("design search") {
  const DesignPair def = default_design_k3_m4();
  const double d_default = min_column_distance(generator(def.transmit, def.receive)).d_min;

  SUBCASE("M=4, W=2 does at least as well as the default design") {
    const auto res = search_optimal_design(4, 3, 3, 2, 2);
    CHECK(res.d_min >= d_default - 1e-12);
    CHECK(res.candidates == 81 * 81);
    const auto g = generator(res.design.transmit, res.design.receive);
    CHECK(std::abs(min_column_distance(g).d_min - res.d_min) < 1e-12);
    for (const auto* b : {&res.design.transmit, &res.design.receive}) {
      CHECK(b->row_norm_spread() < 1e-6);
      CHECK(std::abs(b->row_norms()(0) - 1.0) < 1e-12);
    }
  }
  SUBCASE("non-decreasing in M") {
    const double d4 = search_optimal_design(4, 3, 3, 2, 2).d_min;
    const double d5 = search_optimal_design(5, 3, 3, 2, 2).d_min;
    CHECK(d5 >= d4 - 1e-12);
    // Three rows give only eight binary column patterns for nine columns.
    CHECK_THROWS_AS(search_optimal_design(3, 3, 3, 2, 2), DesignError);
  }
  SUBCASE("full-width rows cannot separate anything") {
    CHECK_THROWS_AS(search_optimal_design(4, 3, 3, 3, 3), DesignError);
  }
  SUBCASE("one-hot rows over four slots") {
    // Every valid pair lights each of the 4 combinations once: G is a
    // permutation of I, so d_min = sqrt(2) and the tie goes to the
    // lexicographically smallest binarization.
    const auto res = search_optimal_design(4, 2, 2, 1, 1);
    CHECK(res.d_min == doctest::Approx(kR2));
    Eigen::MatrixXd bt(4, 2), br(4, 2);
    bt << 0, 1, 0, 1, 1, 0, 1, 0;
    br << 0, 1, 1, 0, 0, 1, 1, 0;
    CHECK(res.design.transmit.amplitudes() == bt);
    CHECK(res.design.receive.amplitudes() == br);
  }
  SUBCASE("two slots cannot light four combinations") {
    CHECK_THROWS_AS(search_optimal_design(2, 2, 2, 1, 1), DesignError);
  }
  SUBCASE("enumeration cap") {
    CHECK_THROWS_AS(search_optimal_design(8, 3, 3, 2, 2, 1000), BudgetError);
    CHECK_THROWS_AS(search_optimal_design(4, 3, 3, 0, 2), ArgumentError);
  }
}

TEST_CASE("column-then-row normalization") {
  Eigen::MatrixXd b(3, 3);
  b << 1, 1, 0, 0, 1, 1, 1, 0, 1;
  const Eigen::MatrixXd n = normalize_columns_then_rows(b);
  for (int r = 0; r < 3; ++r) CHECK(n.row(r).norm() == doctest::Approx(1.0));
  CHECK(n(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("design files") {
  const DesignPair d = default_design_k3_m4();
  std::stringstream ss;
  write_design(ss, d, {2, 2, GridConvention::PaperLiteral});
  DesignFileInfo info;
  const DesignPair back = read_design(ss, &info);
  CHECK(back.transmit.amplitudes() == d.transmit.amplitudes());
  CHECK(back.receive.amplitudes() == d.receive.amplitudes());
  CHECK(info.weight_t == 2);
  CHECK(info.convention == GridConvention::PaperLiteral);

  std::stringstream bad("# M=2 K=3 W=2 convention=dft role=transmit\n1 0 0\n");
  CHECK_THROWS_AS(read_design(bad), IoError);
  CHECK_THROWS_AS(load_design("/nonexistent/design.txt"), IoError);
}

TEST_CASE("beam table") {
  SteeringAngleGrid grid(27);
  BeamSynthesizer synth(grid);
  const DesignPair d = default_design_k3_m4();
  const BeamTable table(synth, 3, &d);
  CHECK(table.size() == 13);
  CHECK(table.stages() == 3);
  CHECK(table.root().transmit.size() == 4);
  CHECK(table.root().one_hot.size() == 3);
  const auto& leaf = table.at({12, 15});
  REQUIRE(leaf.one_hot[1]);
  CHECK(std::abs(leaf.one_hot[1]->grid_response(13)) ==
        doctest::Approx(leaf.one_hot[1]->gain_constant));
  CHECK(std::abs(leaf.one_hot[1]->grid_response(12)) < 1e-9);
  CHECK_THROWS_AS(table.at({0, 4}), StateError);

  const SteeringAngleGrid grid10(10);
  const BeamSynthesizer synth10(grid10);
  const BeamTable ragged(synth10, 3, &d);
  CHECK(ragged.stages() == 3);
}

}
