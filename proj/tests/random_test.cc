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


#include "staff/random.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "reference_selection.h"

namespace staff {
namespace {

TEST(Mix64, MatchesSplitMixFirstOutput) {
  // First output of SplitMix64 seeded with zero.
  EXPECT_EQ(Mix64(0), 0xE220A8397B1DCDAFULL);
}

TEST(StreamSeed, IsDistinctPerPurposeAndIndex) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t purpose = 1; purpose <= 8; ++purpose) {
    for (std::uint64_t index = 0; index < 50; ++index) {
      seen.insert(StreamSeed(7, static_cast<StreamPurpose>(purpose), index));
    }
  }
  EXPECT_EQ(seen.size(), 8u * 50);
  EXPECT_NE(StreamSeed(1, StreamPurpose::kVerify), StreamSeed(2, StreamPurpose::kVerify));
}

TEST(Rng, StreamsMatchIndependentDerivation) {
  for (std::uint64_t root : {0ULL, 1ULL, 42ULL, ~0ULL}) {
    auto ours = Rng::ForStream(root, StreamPurpose::kRegionSample, 9);
    auto ref = testing::RefStream(root, 2, 9);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(ours.Next(), ref());
  }
}

TEST(Rng, SampleIndicesMatchesPartialFisherYates) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::vector<std::string> pool;
    for (int i = 0; i < 17; ++i) pool.push_back(std::to_string(i));
    Rng rng(seed);
    std::mt19937_64 g(seed);
    auto ours = rng.Sample(pool, 6);
    auto ref = testing::RefDraw(g, pool, 6);
    EXPECT_EQ(ours, ref);
  }
}

TEST(Rng, SampleIndicesAreDistinctAndClamped) {
  Rng rng(3);
  auto idx = rng.SampleIndices(10, 25);
  ASSERT_EQ(idx.size(), 10u);
  std::sort(idx.begin(), idx.end());
  for (std::size_t i = 0; i < idx.size(); ++i) EXPECT_EQ(idx[i], i);
  EXPECT_TRUE(rng.SampleIndices(0, 3).empty());
  EXPECT_TRUE(rng.SampleIndices(5, 0).empty());
}

TEST(Rng, UniformBelowIsUnbiased) {
  Rng rng(11);
  std::vector<int> counts(7, 0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) ++counts[rng.UniformBelow(7)];
  const double expect = draws / 7.0;
  const double sigma = std::sqrt(draws * (1.0 / 7.0) * (6.0 / 7.0));
  for (int c : counts) EXPECT_LT(std::abs(c - expect), 4.0 * sigma);
}

TEST(Rng, UnitAndNormalMoments) {
  Rng rng(12);
  const int n = 100000;
  double su = 0.0, sn = 0.0, sn2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.UniformUnit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.Normal();
    ASSERT_TRUE(std::isfinite(z));
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.015);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng rng(4);
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i;
  auto w = v;
  rng.Shuffle(w);
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}

}  // namespace
}  // namespace staff
