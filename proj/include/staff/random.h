// Copyright 2026 The Staff Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Seeded randomness with purpose-separated streams.
//
// Every random decision in the library is drawn from an Rng obtained through
// Rng::ForStream(root_seed, purpose, index). The stream seed is
//
//   s = Mix64(root_seed + 0x9E3779B97F4A7C15 * (purpose + 1))
//   s = Mix64(s ^ index)
//
// where Mix64 is the SplitMix64 finalizer, and the stream engine is
// std::mt19937_64 seeded with s. Streams never share state, so drawing more
// or fewer values from one stream leaves every other stream untouched.
//
// Bounded integers use rejection sampling on the raw 64-bit output
// (UniformBelow), and subsets are drawn with a partial Fisher-Yates shuffle
// (SampleIndices). Both are written out here instead of going through
// <random> distributions, whose outputs are implementation-defined.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace staff {

// Purposes are part of the reproducibility contract; never renumber.
enum class StreamPurpose : std::uint64_t {
  kVerify = 1,        // per region: which members are sent to the target
  kRegionSample = 2,  // per region: which members enter the coreset
  kTopup = 3,         // filling a budget shortfall
  kRandomBaseline = 4,
  kDataGeneration = 5,
  kModelInit = 6,
  kTraining = 7,
  kHarness = 8,
};

std::uint64_t Mix64(std::uint64_t x);

std::uint64_t StreamSeed(std::uint64_t root_seed, StreamPurpose purpose,
                         std::uint64_t index = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng ForStream(std::uint64_t root_seed, StreamPurpose purpose,
                       std::uint64_t index = 0) {
    return Rng(StreamSeed(root_seed, purpose, index));
  }

  std::uint64_t Next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t UniformBelow(std::uint64_t bound);

  // Uniform real in [0, 1) with 53 random bits.
  double UniformUnit();

  // Standard normal via Box-Muller, consuming two uniforms per call.
  double Normal();

  // k distinct positions out of [0, n), in draw order. k is clamped to n.
  std::vector<std::size_t> SampleIndices(std::size_t n, std::size_t k);

  template <typename T>
  std::vector<T> Sample(const std::vector<T>& items, std::size_t k) {
    std::vector<T> out;
    for (std::size_t i : SampleIndices(items.size(), k)) out.push_back(items[i]);
    return out;
  }

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = UniformBelow(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace staff
