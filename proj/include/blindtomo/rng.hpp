// Copyright 2026 The blindtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Seedable counter-based random streams.
//
// RngStream wraps Philox4x32-10 (Salmon et al., Random123). The 64-bit seed is
// the Philox key; the 128-bit counter is (block index, substream id). Every
// value drawn is a pure function of (seed, substream, draw position), so
// results do not depend on threading or on the standard library's
// distribution implementations: uniforms and normals are generated here.
//
// Stream splitting: independent streams for sub-tasks are obtained with
// derive_seed(master, i, j, ...), a SplitMix64 hash chain over the indices.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace blindtomo {

/// One Philox4x32 bijection with 10 rounds.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

/// Hash a master seed and a sequence of indices into a new seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> indices);

class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t substream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  std::uint32_t next_u32();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t substream() const { return substream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t substream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace blindtomo
