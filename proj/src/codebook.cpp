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

#include "overbeam/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "overbeam/error.hpp"

namespace overbeam {

// ---------------------------------------------------------------------------
// Beam-pattern and generator matrices

BeamPatternMatrix::BeamPatternMatrix(Eigen::MatrixXd amplitudes, BeamRole role)
    : amplitudes_(std::move(amplitudes)), role_(role) {
  if (amplitudes_.size() == 0) throw ArgumentError("empty beam-pattern matrix");
  if ((amplitudes_.array() < 0.0).any()) {
    throw ArgumentError("beam-pattern amplitudes must be nonnegative");
  }
}

Eigen::VectorXd BeamPatternMatrix::row_norms() const {
  return amplitudes_.rowwise().norm();
}

Eigen::VectorXd BeamPatternMatrix::column_norms() const {
  return amplitudes_.colwise().norm().transpose();
}

namespace {

double relative_spread(const Eigen::VectorXd& v) {
  const double hi = v.maxCoeff();
  if (hi <= 0.0) return 0.0;
  return (hi - v.minCoeff()) / hi;
}

}  // namespace

double BeamPatternMatrix::row_norm_spread() const { return relative_spread(row_norms()); }

double BeamPatternMatrix::column_norm_spread() const {
  return relative_spread(column_norms());
}

BeamPatternMatrix BeamPatternMatrix::with_row(const Eigen::RowVectorXd& row) const {
  if (row.size() != cols()) throw ArgumentError("appended row has wrong length");
  Eigen::MatrixXd grown(rows() + 1, cols());
  grown.topRows(rows()) = amplitudes_;
  grown.row(rows()) = row;
  return BeamPatternMatrix(std::move(grown), role_);
}

DesignPair default_design_k3_m4() {
  const double hi = std::sqrt(2.0) / std::sqrt(3.0);
  const double mid = 1.0 / std::sqrt(3.0);
  Eigen::RowVector3d b1(hi, mid, 0.0);
  Eigen::RowVector3d b2(0.0, mid, hi);
  Eigen::MatrixXd bt(4, 3);
  Eigen::MatrixXd br(4, 3);
  bt << b1, b1, b2, b2;
  br << b1, b2, b1, b2;
  return {BeamPatternMatrix(bt, BeamRole::Transmit), BeamPatternMatrix(br, BeamRole::Receive)};
}

GeneratorMatrix::GeneratorMatrix(Eigen::MatrixXd g, int kt, int kr)
    : g_(std::move(g)), kt_(kt), kr_(kr) {
  if (g_.cols() != kt * kr) throw ArgumentError("generator width must be K_T * K_R");
}

GeneratorMatrix generator(const BeamPatternMatrix& bt, const BeamPatternMatrix& br) {
  if (bt.rows() != br.rows()) {
    throw ArgumentError("generator: B_T has " + std::to_string(bt.rows()) +
                        " rows but B_R has " + std::to_string(br.rows()));
  }
  const int kt = bt.cols();
  const int kr = br.cols();
  Eigen::MatrixXd g(bt.rows(), kt * kr);
  for (int m = 0; m < bt.rows(); ++m) {
    for (int a = 0; a < kt; ++a) {
      g.row(m).segment(a * kr, kr) = bt(m, a) * br.amplitudes().row(m);
    }
  }
  return GeneratorMatrix(std::move(g), kt, kr);
}

ColumnDistances min_column_distance(const Eigen::MatrixXd& g, double tie_tol) {
  const int n = static_cast<int>(g.cols());
  if (n < 2) throw ArgumentError("min_column_distance: need at least two columns");
  Eigen::MatrixXd dist(n, n);
  for (int i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      dist(i, j) = dist(j, i) = (g.col(i) - g.col(j)).norm();
    }
  }
  ColumnDistances out;
  out.column_min.assign(n, std::numeric_limits<double>::infinity());
  out.neighbors.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j != i) out.column_min[i] = std::min(out.column_min[i], dist(i, j));
    }
    const double cut = out.column_min[i] + tie_tol * std::max(1.0, out.column_min[i]);
    for (int j = 0; j < n; ++j) {
      if (j != i && dist(i, j) <= cut) out.neighbors[i].push_back(j);
    }
  }
  out.d_min = *std::min_element(out.column_min.begin(), out.column_min.end());
  return out;
}

// ---------------------------------------------------------------------------
// Sub-range partitions

SubRangePartition::SubRangePartition(SubRange active, int k, int stage)
    : active_(active), stage_(stage) {
  if (k < 1) throw ArgumentError("partition needs K >= 1");
  if (active.size() < 0) throw ArgumentError("negative active range");
  const int base = active.size() / k;
  const int extra = active.size() % k;
  int at = active.begin;
  parts_.reserve(k);
  for (int i = 0; i < k; ++i) {
    const int len = base + (i < extra ? 1 : 0);
    parts_.push_back({at, at + len});
    at += len;
  }
}

SubRangePartition SubRangePartition::initial(int n, int k) {
  if (n < 1) throw ArgumentError("partition needs N >= 1");
  return SubRangePartition({0, n}, k, 1);
}

SubRangePartition SubRangePartition::refine(int k) const {
  if (k < 1 || k > parts()) {
    throw BoundsError("refine: sub-range " + std::to_string(k) + " outside 1.." +
                      std::to_string(parts()));
  }
  const SubRange& chosen = part(k);
  if (chosen.empty()) {
    throw StateError("refine: sub-range " + std::to_string(k) + " of stage " +
                     std::to_string(stage_) + " is empty");
  }
  return SubRangePartition(chosen, parts(), stage_ + 1);
}

int SubRangePartition::locate(int idx) const {
  for (int k = 0; k < parts(); ++k) {
    if (parts_[k].contains(idx)) return k + 1;
  }
  return 0;
}

int stage_count(int n, int k) {
  if (n < 1 || k < 2) throw ArgumentError("stage_count needs N >= 1 and K >= 2");
  int stages = 0;
  long long span = 1;
  while (span < n) {
    span *= k;
    ++stages;
  }
  return std::max(stages, 1);
}

// ---------------------------------------------------------------------------
// Beam synthesis

BeamSynthesizer::BeamSynthesizer(const SteeringAngleGrid& grid, double max_condition)
    : grid_(&grid) {
  const Eigen::MatrixXcd uh = grid.response().adjoint();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(uh).singularValues();
  const double smin = sv(sv.size() - 1);
  condition_ = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(condition_ <= max_condition)) {
    throw NumericalError("array response is ill-conditioned (condition estimate " +
                         std::to_string(condition_) + ")");
  }
  lu_.compute(uh);
}

Eigen::VectorXd BeamSynthesizer::target(const SubRangePartition& partition,
                                        std::span<const double> amplitudes) const {
  if (static_cast<int>(amplitudes.size()) != partition.parts()) {
    throw ArgumentError("amplitude row length differs from the number of sub-ranges");
  }
  Eigen::VectorXd z = Eigen::VectorXd::Zero(grid_->size());
  for (int k = 0; k < partition.parts(); ++k) {
    const SubRange& r = partition.all_parts()[k];
    if (r.begin < 0 || r.end > grid_->size()) throw BoundsError("sub-range outside the grid");
    z.segment(r.begin, r.size()).setConstant(amplitudes[k]);
  }
  return z;
}

std::optional<BeamformingVector> BeamSynthesizer::synthesize(
    const SubRangePartition& partition, std::span<const double> amplitudes) const {
  const Eigen::VectorXd z = target(partition, amplitudes);
  if (z.squaredNorm() == 0.0) return std::nullopt;
  const Eigen::VectorXcd raw = lu_.solve(z.cast<cplx>());
  const double raw_norm = raw.norm();
  if (!std::isfinite(raw_norm) || raw_norm == 0.0) {
    throw NumericalError("beam synthesis failed (condition estimate " +
                         std::to_string(condition_) + ")");
  }
  const double c = 1.0 / raw_norm;
  BeamformingVector beam = make_beamformer(*grid_, raw * c, c);
  const double deviation = (beam.grid_response - c * z.cast<cplx>()).cwiseAbs().maxCoeff();
  if (deviation > 1e-6 * c) {
    throw NumericalError("synthesized response deviates by " + std::to_string(deviation) +
                         " from the target (condition estimate " +
                         std::to_string(condition_) + ")");
  }
  return beam;
}

BeamformingVector synthesize_beamformer(const SteeringAngleGrid& grid,
                                        const SubRangePartition& partition,
                                        std::span<const double> amplitudes) {
  BeamSynthesizer synth(grid);
  auto beam = synth.synthesize(partition, amplitudes);
  if (!beam) throw ArgumentError("synthesize_beamformer: target response is zero");
  return *std::move(beam);
}

StageGain stage_gain_constant(std::span<const BeamformingVector> beams) {
  if (beams.empty()) throw ArgumentError("stage_gain_constant: no beamformers");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  double log_sum = 0.0;
  for (const auto& b : beams) {
    lo = std::min(lo, b.gain_constant);
    hi = std::max(hi, b.gain_constant);
    log_sum += std::log(b.gain_constant);
  }
  StageGain out;
  out.spread = (hi - lo) / hi;
  if (out.spread > 1e-2) {
    throw DesignError("per-slot gain constants spread by " + std::to_string(out.spread) +
                      " (limit 1e-2)");
  }
  out.warning = out.spread > 1e-6;
  out.value = out.warning ? std::exp(log_sum / static_cast<double>(beams.size()))
                          : beams.front().gain_constant;
  return out;
}

// ---------------------------------------------------------------------------
// Design search

Eigen::MatrixXd normalize_columns_then_rows(const Eigen::MatrixXd& binary) {
  Eigen::MatrixXd b = binary;
  for (int c = 0; c < b.cols(); ++c) {
    const double n = b.col(c).norm();
    if (n > 0.0) b.col(c) /= n;
  }
  for (int r = 0; r < b.rows(); ++r) {
    const double n = b.row(r).norm();
    if (n > 0.0) b.row(r) /= n;
  }
  return b;
}

namespace {

// Row patterns of width k with exactly w ones, in lexicographic order of the
// bit sequence (entry 0 first, 0 < 1).
std::vector<std::vector<int>> row_patterns(int k, int w) {
  std::vector<std::vector<int>> out;
  std::vector<int> bits(k, 0);
  std::fill(bits.end() - w, bits.end(), 1);
  do {
    out.push_back(bits);
  } while (std::next_permutation(bits.begin(), bits.end()));
  return out;
}

std::uint64_t checked_power(std::uint64_t base, int exp, std::uint64_t cap) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > cap / base) return cap + 1;
    r *= base;
  }
  return r;
}

struct Candidate {
  Eigen::MatrixXd normalized;
  std::vector<int> bits;  // row-major
};

std::vector<Candidate> enumerate_side(int m, int k, int w) {
  const auto patterns = row_patterns(k, w);
  const int p = static_cast<int>(patterns.size());
  std::vector<int> digit(m, 0);
  std::vector<Candidate> out;
  while (true) {
    Eigen::MatrixXd b(m, k);
    Candidate c;
    c.bits.reserve(m * k);
    for (int r = 0; r < m; ++r) {
      for (int j = 0; j < k; ++j) {
        b(r, j) = patterns[digit[r]][j];
        c.bits.push_back(patterns[digit[r]][j]);
      }
    }
    c.normalized = normalize_columns_then_rows(b);
    out.push_back(std::move(c));
    // Row 0 is the most significant digit.
    int pos = m - 1;
    while (pos >= 0 && ++digit[pos] == p) {
      digit[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

}  // namespace

DesignSearchResult search_optimal_design(int m, int kt, int kr, int wt, int wr,
                                         std::uint64_t enumeration_cap) {
  if (m < 1 || kt < 1 || kr < 1) throw ArgumentError("design search needs M, K >= 1");
  if (wt < 1 || wt > kt || wr < 1 || wr > kr) {
    throw ArgumentError("row weights must satisfy 1 <= W <= K");
  }
  if (kt * kr < 2) throw ArgumentError("design search needs at least two combinations");
  auto binom = [](int n, int r) {
    std::uint64_t v = 1;
    for (int i = 1; i <= r; ++i) v = v * (n - r + i) / i;
    return v;
  };
  const std::uint64_t nt = checked_power(binom(kt, wt), m, enumeration_cap);
  const std::uint64_t nr = checked_power(binom(kr, wr), m, enumeration_cap);
  if (nt > enumeration_cap || nr > enumeration_cap || nt * nr > enumeration_cap) {
    throw BudgetError("design search would enumerate more than " +
                      std::to_string(enumeration_cap) +
                      " candidate pairs; reduce M, K or W");
  }

  const auto tx = enumerate_side(m, kt, wt);
  const auto rx = enumerate_side(m, kr, wr);

  DesignSearchResult best;
  best.d_min = -1.0;
  int best_t = -1;
  int best_r = -1;
  Eigen::MatrixXd g(m, kt * kr);
  for (int it = 0; it < static_cast<int>(tx.size()); ++it) {
    for (int ir = 0; ir < static_cast<int>(rx.size()); ++ir) {
      ++best.candidates;
      const auto& bt = tx[it].normalized;
      const auto& br = rx[ir].normalized;
      for (int a = 0; a < kt; ++a) {
        for (int b = 0; b < kr; ++b) g.col(a * kr + b) = bt.col(a).cwiseProduct(br.col(b));
      }
      if ((g.colwise().squaredNorm().array() < 1e-24).any()) {
        ++best.rejected;
        continue;
      }
      double d2 = std::numeric_limits<double>::infinity();
      for (int i = 0; i < g.cols(); ++i) {
        for (int j = i + 1; j < g.cols(); ++j) {
          d2 = std::min(d2, (g.col(i) - g.col(j)).squaredNorm());
        }
      }
      const double d = std::sqrt(d2);
      // Identical columns make two combinations indistinguishable.
      if (d <= 1e-12) {
        ++best.rejected;
        continue;
      }
      if (d > best.d_min + 1e-12) {
        best.d_min = d;
        best_t = it;
        best_r = ir;
      }
    }
  }
  if (best_t < 0) {
    throw DesignError("no candidate design separates every pair of sub-range combinations");
  }
  best.design = {BeamPatternMatrix(tx[best_t].normalized, BeamRole::Transmit),
                 BeamPatternMatrix(rx[best_r].normalized, BeamRole::Receive)};
  return best;
}

// ---------------------------------------------------------------------------
// Plain-text design files

namespace {

void write_block(std::ostream& out, const BeamPatternMatrix& b, int weight,
                 GridConvention conv, const char* role) {
  out << "# M=" << b.rows() << " K=" << b.cols() << " W=" << weight
      << " convention=" << to_string(conv) << " role=" << role << '\n';
  out.precision(17);
  for (int r = 0; r < b.rows(); ++r) {
    for (int c = 0; c < b.cols(); ++c) {
      if (c) out << ' ';
      out << b(r, c);
    }
    out << '\n';
  }
}

}  // namespace

void write_design(std::ostream& out, const DesignPair& design, const DesignFileInfo& info) {
  out << "# overbeam beam-pattern design\n";
  write_block(out, design.transmit, info.weight_t, info.convention, "transmit");
  write_block(out, design.receive, info.weight_r, info.convention, "receive");
}

DesignPair read_design(std::istream& in, DesignFileInfo* info) {
  struct Block {
    std::string role;
    int m = 0, k = 0, w = 0;
    std::vector<std::vector<double>> rows;
  };
  std::vector<Block> blocks;
  std::string line;
  GridConvention conv = GridConvention::PaperLiteral;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("role=") == std::string::npos) continue;
      Block b;
      std::istringstream hs(line.substr(1));
      std::string tok;
      while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "M") b.m = std::stoi(val);
        else if (key == "K") b.k = std::stoi(val);
        else if (key == "W") b.w = std::stoi(val);
        else if (key == "role") b.role = val;
        else if (key == "convention") conv = parse_grid_convention(val);
      }
      blocks.push_back(std::move(b));
      continue;
    }
    if (blocks.empty()) throw IoError("design file: matrix row before any header");
    std::istringstream rs(line);
    std::vector<double> row;
    double v = 0.0;
    while (rs >> v) row.push_back(v);
    if (!rs.eof()) throw IoError("design file: malformed row '" + line + "'");
    blocks.back().rows.push_back(std::move(row));
  }
  auto to_matrix = [](const Block& b, BeamRole role) {
    if (static_cast<int>(b.rows.size()) != b.m) {
      throw IoError("design file: " + b.role + " block has " +
                    std::to_string(b.rows.size()) + " rows, header says " +
                    std::to_string(b.m));
    }
    Eigen::MatrixXd a(b.m, b.k);
    for (int r = 0; r < b.m; ++r) {
      if (static_cast<int>(b.rows[r].size()) != b.k) {
        throw IoError("design file: row width differs from K in " + b.role + " block");
      }
      for (int c = 0; c < b.k; ++c) a(r, c) = b.rows[r][c];
    }
    return BeamPatternMatrix(std::move(a), role);
  };
  const Block* t = nullptr;
  const Block* r = nullptr;
  for (const auto& b : blocks) {
    if (b.role == "transmit") t = &b;
    if (b.role == "receive") r = &b;
  }
  if (!t || !r) throw IoError("design file needs a transmit and a receive block");
  if (info) {
    info->weight_t = t->w;
    info->weight_r = r->w;
    info->convention = conv;
  }
  return {to_matrix(*t, BeamRole::Transmit), to_matrix(*r, BeamRole::Receive)};
}

void save_design(const std::string& path, const DesignPair& design,
                 const DesignFileInfo& info) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_design(out, design, info);
  if (!out) throw IoError("write to '" + path + "' failed");
}

DesignPair load_design(const std::string& path, DesignFileInfo* info) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open design file '" + path + "'");
  return read_design(in, info);
}

// ---------------------------------------------------------------------------
// Beam table

BeamTable::BeamTable(const BeamSynthesizer& synth, int k, const DesignPair* design)
    : k_(k), stages_(stage_count(synth.grid().size(), k)), root_{0, synth.grid().size()} {
  if (design) {
    if (design->transmit.cols() != k || design->receive.cols() != k) {
      throw ArgumentError("design width differs from K");
    }
    if (design->transmit.rows() != design->receive.rows()) {
      throw ArgumentError("transmit and receive designs differ in M");
    }
  }
  build(synth, SubRangePartition::initial(synth.grid().size(), k), design);
}

void BeamTable::build(const BeamSynthesizer& synth, const SubRangePartition& p,
                      const DesignPair* design) {
  RangeBeams node{p, {}, {}, {}};
  std::vector<double> amps(k_);
  if (design) {
    for (int m = 0; m < design->transmit.rows(); ++m) {
      for (int j = 0; j < k_; ++j) amps[j] = design->transmit(m, j);
      node.transmit.push_back(synth.synthesize(p, amps));
      for (int j = 0; j < k_; ++j) amps[j] = design->receive(m, j);
      node.receive.push_back(synth.synthesize(p, amps));
    }
  }
  for (int j = 0; j < k_; ++j) {
    std::fill(amps.begin(), amps.end(), 0.0);
    amps[j] = 1.0;
    node.one_hot.push_back(synth.synthesize(p, amps));
  }
  nodes_.emplace(key(p.active()), std::move(node));
  if (p.stage() >= stages_) return;
  for (int j = 1; j <= k_; ++j) {
    if (!p.part(j).empty()) build(synth, p.refine(j), design);
  }
}

const RangeBeams& BeamTable::at(const SubRange& active) const {
  auto it = nodes_.find(key(active));
  if (it == nodes_.end()) {
    throw StateError("no beams for active range [" + std::to_string(active.begin) + ", " +
                     std::to_string(active.end) + ")");
  }
  return it->second;
}

}  // namespace overbeam
