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
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "overbeam/grid_channel.hpp"

namespace overbeam {

enum class BeamRole { Transmit, Receive };

/// M x K nonnegative amplitudes: row m is the beam pattern used in slot m,
/// column k its gain over sub-range k.
class BeamPatternMatrix {
 public:
  BeamPatternMatrix() = default;
  explicit BeamPatternMatrix(Eigen::MatrixXd amplitudes,
                             BeamRole role = BeamRole::Transmit);

  int rows() const { return static_cast<int>(amplitudes_.rows()); }
  int cols() const { return static_cast<int>(amplitudes_.cols()); }
  BeamRole role() const { return role_; }
  const Eigen::MatrixXd& amplitudes() const { return amplitudes_; }
  double operator()(int m, int k) const { return amplitudes_(m, k); }

  Eigen::VectorXd row_norms() const;
  Eigen::VectorXd column_norms() const;
  /// (max - min) / max over row norms (resp. column norms).
  double row_norm_spread() const;
  double column_norm_spread() const;

  BeamPatternMatrix with_row(const Eigen::RowVectorXd& row) const;

 private:
  Eigen::MatrixXd amplitudes_;
  BeamRole role_ = BeamRole::Transmit;
};

struct DesignPair {
  BeamPatternMatrix transmit;
  BeamPatternMatrix receive;
};

/// The symmetric K = 3, M = 4 overlapped design: two patterns
/// b1 = [sqrt(2/3), sqrt(1/3), 0] and b2 = [0, sqrt(1/3), sqrt(2/3)],
/// scheduled (b1, b1, b2, b2) at the transmitter and (b1, b2, b1, b2) at the
/// receiver so that every pattern pair is visited once.
DesignPair default_design_k3_m4();

/// Row-wise Kronecker product G = B_T (.) B_R. Column d (1-based) belongs to
/// the sub-range combination d = K_R (k_t - 1) + k_r.
class GeneratorMatrix {
 public:
  GeneratorMatrix() = default;
  GeneratorMatrix(Eigen::MatrixXd g, int kt, int kr);

  const Eigen::MatrixXd& matrix() const { return g_; }
  int rows() const { return static_cast<int>(g_.rows()); }
  int cols() const { return static_cast<int>(g_.cols()); }
  int kt() const { return kt_; }
  int kr() const { return kr_; }

  /// 1-based combined index for 1-based sub-range indices.
  int column_index(int k_t, int k_r) const { return kr_ * (k_t - 1) + k_r; }

 private:
  Eigen::MatrixXd g_;
  int kt_ = 0;
  int kr_ = 0;
};

GeneratorMatrix generator(const BeamPatternMatrix& bt, const BeamPatternMatrix& br);

struct ColumnDistances {
  double d_min = 0.0;
  std::vector<double> column_min;           // per column, 0-based
  std::vector<std::vector<int>> neighbors;  // columns attaining column_min
};

/// Pairwise Euclidean distances between generator columns. Columns whose
/// distance lies within `tie_tol` (relative) of the per-column minimum are
/// reported as neighbors.
ColumnDistances min_column_distance(const Eigen::MatrixXd& g, double tie_tol = 1e-9);
inline ColumnDistances min_column_distance(const GeneratorMatrix& g,
                                           double tie_tol = 1e-9) {
  return min_column_distance(g.matrix(), tie_tol);
}

/// Half-open interval of grid indices.
struct SubRange {
  int begin = 0;
  int end = 0;
  int size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool contains(int idx) const { return idx >= begin && idx < end; }
  bool operator==(const SubRange&) const = default;
};

/// K contiguous sub-ranges covering the active range of one stage. Sizes
/// differ by at most one; larger parts come first.
class SubRangePartition {
 public:
  SubRangePartition() = default;
  static SubRangePartition initial(int n, int k);
  SubRangePartition(SubRange active, int k, int stage);

  /// Keep sub-range `k` (1-based) and split it into K parts for the next
  /// stage. Throws StateError if that sub-range is empty.
  SubRangePartition refine(int k) const;

  int stage() const { return stage_; }
  int parts() const { return static_cast<int>(parts_.size()); }
  const SubRange& active() const { return active_; }
  const SubRange& part(int k) const { return parts_.at(k - 1); }
  std::span<const SubRange> all_parts() const { return parts_; }

  /// 1-based sub-range holding `idx`, or 0 when outside the active range.
  int locate(int idx) const;

 private:
  SubRange active_;
  int stage_ = 1;
  std::vector<SubRange> parts_;
};

/// Smallest S with K^S >= N (at least 1).
int stage_count(int n, int k);

/// Pseudo-inverse beam synthesis against the array response U of a grid:
/// f = U^{-H} z / ||U^{-H} z||, so that U^H f = C z on every grid angle.
class BeamSynthesizer {
 public:
  explicit BeamSynthesizer(const SteeringAngleGrid& grid, double max_condition = 1e10);

  const SteeringAngleGrid& grid() const { return *grid_; }
  double condition_number() const { return condition_; }

  /// Target z: amplitudes[k-1] on the grid angles of sub-range k, zero
  /// elsewhere. Returns nullopt when the target is identically zero.
  std::optional<BeamformingVector> synthesize(const SubRangePartition& partition,
                                              std::span<const double> amplitudes) const;

  /// The target response z with unit gain constant.
  Eigen::VectorXd target(const SubRangePartition& partition,
                         std::span<const double> amplitudes) const;

 private:
  const SteeringAngleGrid* grid_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
  double condition_ = 0.0;
};

/// Convenience wrapper: throws ArgumentError on an all-zero target.
BeamformingVector synthesize_beamformer(const SteeringAngleGrid& grid,
                                        const SubRangePartition& partition,
                                        std::span<const double> amplitudes);

struct StageGain {
  double value = 0.0;   // common C_s, or the geometric mean when spread
  double spread = 0.0;  // (max - min) / max over the per-slot constants
  bool warning = false;
};

/// Common gain constant of one stage's beamformers. Spread above 1e-6 sets
/// the warning flag; above 1e-2 throws DesignError.
StageGain stage_gain_constant(std::span<const BeamformingVector> beams);

struct DesignSearchResult {
  DesignPair design;
  double d_min = 0.0;
  std::uint64_t candidates = 0;  // pairs evaluated
  std::uint64_t rejected = 0;    // pairs with an unilluminated combination
};

/// Exhaustive search over binarized M x K matrices with fixed row weights,
/// normalized columns-then-rows, maximizing the minimum generator-column
/// distance. Ties go to the lexicographically smallest (B_T, B_R) bit pattern.
DesignSearchResult search_optimal_design(int m, int kt, int kr, int wt, int wr,
                                         std::uint64_t enumeration_cap = 10'000'000);

/// Single-pass column-then-row normalization of a nonnegative matrix. Zero
/// columns and rows are left at zero.
Eigen::MatrixXd normalize_columns_then_rows(const Eigen::MatrixXd& binary);

struct DesignFileInfo {
  int weight_t = 0;
  int weight_r = 0;
  GridConvention convention = GridConvention::PaperLiteral;
};

/// Plain-text matrix format: a '#' header line per block recording
/// M, K, W, convention and role, then one row per line.
void write_design(std::ostream& out, const DesignPair& design, const DesignFileInfo& info);
DesignPair read_design(std::istream& in, DesignFileInfo* info = nullptr);
void save_design(const std::string& path, const DesignPair& design,
                 const DesignFileInfo& info);
DesignPair load_design(const std::string& path, DesignFileInfo* info = nullptr);

/// Beams for one node of the refinement tree: one per design row and one
/// one-hot beam per sub-range, for each link end. Entries are empty when the
/// corresponding target response vanishes (empty sub-ranges).
struct RangeBeams {
  SubRangePartition partition;
  std::vector<std::optional<BeamformingVector>> transmit;  // design rows of B_T
  std::vector<std::optional<BeamformingVector>> receive;   // design rows of B_R
  std::vector<std::optional<BeamformingVector>> one_hot;   // e_k, k = 1..K
};

/// Precomputed beams for every active range reachable by refinement. Built
/// once; read-only afterwards, so one table can serve many worker threads.
class BeamTable {
 public:
  BeamTable(const BeamSynthesizer& synth, int k, const DesignPair* design);

  int k() const { return k_; }
  int stages() const { return stages_; }
  const RangeBeams& at(const SubRange& active) const;
  const RangeBeams& root() const { return at(root_); }
  std::size_t size() const { return nodes_.size(); }

 private:
  void build(const BeamSynthesizer& synth, const SubRangePartition& p,
             const DesignPair* design);
  static std::uint64_t key(const SubRange& r) {
    return (static_cast<std::uint64_t>(r.begin) << 32) |
           static_cast<std::uint32_t>(r.end);
  }

  int k_;
  int stages_;
  SubRange root_;
  std::unordered_map<std::uint64_t, RangeBeams> nodes_;
};

}  // namespace overbeam
