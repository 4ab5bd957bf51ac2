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
#include <random>

namespace overbeam {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent, order-free substreams.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for the substream identified by (seed, a, b, c). Distinct tuples give
/// statistically independent generators; the mapping does not depend on how
/// many workers consume the streams.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t a,
                                       std::uint64_t b = 0,
                                       std::uint64_t c = 0) {
  return mix64(mix64(mix64(mix64(seed) ^ a) ^ b) ^ c);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t a = 0,
                    std::uint64_t b = 0, std::uint64_t c = 0) {
  return Rng(substream_seed(seed, a, b, c));
}

}  // namespace overbeam
