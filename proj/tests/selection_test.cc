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

#include "staff/selection.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "reference_selection.h"
#include "staff/error.h"
#include "staff/scoring.h"

namespace staff {
namespace {

using scoring::FileOracle;

ScoreTable Table(std::initializer_list<std::pair<const char*, double>> items) {
  ScoreTable t;
  for (const auto& [id, s] : items) t.Add(id, s);
  return t;
}

std::set<std::string> AsSet(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

std::set<std::string> Members(const Region& r) { return AsSet(r.member_ids); }

// Oracle that throws on every lookup.
class FailingOracle : public ScoreOracle {
 public:
  double Score(std::string_view) const override {
    throw Error(ErrorKind::kMissingScore, "score missing for id");
  }
};

TEST(PartitionRegions, ThreeScoresTwoRegions) {
  auto p = PartitionRegions(Table({{"a", 0.0}, {"b", 0.5}, {"c", 1.0}}), 2);
  ASSERT_EQ(p.regions.size(), 2u);
  EXPECT_EQ(Members(p.regions[0]), (std::set<std::string>{"a"}));
  EXPECT_EQ(Members(p.regions[1]), (std::set<std::string>{"b", "c"}));
  EXPECT_DOUBLE_EQ(p.width, 0.5);
  EXPECT_DOUBLE_EQ(p.regions[1].lo, 0.5);
  EXPECT_DOUBLE_EQ(p.regions[1].hi, 1.0);
}

TEST(PartitionRegions, EqualScoresLandInRegionZero) {
  auto p = PartitionRegions(Table({{"a", 0.3}, {"b", 0.3}, {"c", 0.3}}), 3);
  EXPECT_EQ(p.width, 0.0);
  EXPECT_EQ(p.regions[0].size(), 3u);
  EXPECT_TRUE(p.regions[1].empty());
  EXPECT_TRUE(p.regions[2].empty());
  EXPECT_EQ(VisitOrder(p), (std::vector<std::size_t>{0}));
}

TEST(PartitionRegions, Errors) {
  try {
    PartitionRegions(ScoreTable{}, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()), "empty dataset");
  }
  EXPECT_THROW(PartitionRegions(Table({{"a", 1.0}}), 0), Error);
  ScoreTable bad;
  EXPECT_THROW(bad.Add("x", std::nan("")), Error);
  EXPECT_THROW(bad.Add("x", -1.0), Error);
}

TEST(PartitionRegions, MatchesBruteForceRebinning) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    ScoreTable t;
    std::vector<testing::RefScore> ref;
    for (int i = 0; i < 1000; ++i) {
      const double s = trial % 2 ? rng.UniformUnit() : 10.0 * rng.UniformUnit() + 3.0;
      t.Add("s" + std::to_string(i), s);
      ref.push_back({"s" + std::to_string(i), s});
    }
    auto p = PartitionRegions(t, 50);
    auto bins = testing::RefBins(ref, 50);
    std::size_t total = 0;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < 50; ++i) {
      EXPECT_EQ(p.regions[i].member_ids, bins[i]) << "region " << i;
      total += p.regions[i].size();
      for (const auto& id : p.regions[i].member_ids) {
        EXPECT_TRUE(seen.insert(id).second);
        const double s = t.At(id);
        EXPECT_GE(s, p.regions[i].lo);
        if (i + 1 < 50) {
          EXPECT_LT(s, p.regions[i].hi);
        } else {
          EXPECT_LE(s, p.regions[i].hi);
        }
      }
      const double expected_width = (p.score_max - p.score_min) / 50.0;
      EXPECT_DOUBLE_EQ(p.width, expected_width);
    }
    EXPECT_EQ(total, 1000u);
  }
}

TEST(VerifyRegion, RatioOfSums) {
  Region r{0, 0, 1, {"a", "b"}};
  auto spec = Table({{"a", 0.5}, {"b", 1.5}});
  FileOracle target(Table({{"a", 1.0}, {"b", 3.0}}));
  Rng rng(1);
  auto out = VerifyRegion(r, spec, target, 10, rng);
  EXPECT_EQ(AsSet(out.sampled_ids), (std::set<std::string>{"a", "b"}));
  EXPECT_DOUBLE_EQ(out.ratio, 2.0);
}

TEST(VerifyRegion, IdentityTargetGivesOne) {
  auto spec = Table({{"a", 0.1}, {"b", 0.2}, {"c", 0.7}, {"d", 0.9}});
  FileOracle target(spec);
  auto p = PartitionRegions(spec, 3);
  for (const auto& r : p.regions) {
    if (r.empty()) continue;
    Rng rng(3);
    EXPECT_EQ(VerifyRegion(r, spec, target, 1, rng).ratio, 1.0);
  }
}

TEST(VerifyRegion, ZeroSpeculativeSumFallsBackToOne) {
  Region r{0, 0, 0, {"a", "b"}};
  auto spec = Table({{"a", 0.0}, {"b", 0.0}});
  FileOracle target(Table({{"a", 5.0}, {"b", 1.0}}));
  Rng rng(1);
  EXPECT_EQ(VerifyRegion(r, spec, target, 2, rng).ratio, 1.0);
}

TEST(VerifyRegion, SamplesMinOfBudgetAndSizeWithoutReplacement) {
  Region r{4, 0, 1, {}};
  ScoreTable spec;
  for (int i = 0; i < 30; ++i) {
    r.member_ids.push_back("m" + std::to_string(i));
    spec.Add("m" + std::to_string(i), 1.0 + i);
  }
  FileOracle target(spec);
  CountingOracle counted(target);
  Rng rng(9);
  auto out = VerifyRegion(r, spec, counted, 10, rng);
  EXPECT_EQ(out.region_index, 4u);
  EXPECT_EQ(out.sampled_ids.size(), 10u);
  EXPECT_EQ(AsSet(out.sampled_ids).size(), 10u);
  EXPECT_EQ(counted.queried(), out.sampled_ids);
}

TEST(VerifyRegion, TargetFailureIsReported) {
  Region r{0, 0, 1, {"a"}};
  auto spec = Table({{"a", 1.0}});
  Rng rng(1);
  try {
    VerifyRegion(r, spec, FailingOracle{}, 1, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingScore);
    EXPECT_NE(std::string(e.what()).find("verification scoring failed"), std::string::npos);
  }
}

TEST(AllocateBudget, Examples) {
  EXPECT_EQ(AllocateBudget(100, 0, 1.0, 50), 2u);
  EXPECT_EQ(AllocateBudget(2, 0, 2.0, 2), 2u);
  EXPECT_EQ(AllocateBudget(2, 2, 5.0, 1), 0u);
  EXPECT_EQ(AllocateBudget(10, 3, 100.0, 2), 7u);  // clamped to what is left
  EXPECT_EQ(AllocateBudget(10, 0, 0.0, 2), 0u);
}

TEST(AllocateBudget, MonotoneInRatio) {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t m = rng.UniformBelow(500);
    const std::size_t sel = m == 0 ? 0 : rng.UniformBelow(m + 1);
    const std::size_t rem = 1 + rng.UniformBelow(60);
    const double v1 = 5.0 * rng.UniformUnit();
    const double v2 = v1 + 5.0 * rng.UniformUnit();
    const auto a = AllocateBudget(m, sel, v1, rem);
    const auto b = AllocateBudget(m, sel, v2, rem);
    EXPECT_LE(a, b);
    EXPECT_LE(b, m - sel);
  }
}

TEST(CoresetBudget, FloorsWithRoundingGuard) {
  EXPECT_EQ(CoresetBudget(1000, 0.9), 100u);
  EXPECT_EQ(CoresetBudget(5, 0.6), 2u);
  EXPECT_EQ(CoresetBudget(7, 0.5), 3u);
  EXPECT_EQ(CoresetBudget(10, 0.0), 10u);
  EXPECT_EQ(CoresetBudget(3, 0.99), 0u);
}

SelectionConfig Cfg(SelectionMode mode, double p, std::size_t k, std::size_t bv,
                    std::uint64_t seed, bool topup = false) {
  SelectionConfig c;
  c.mode = mode;
  c.prune_rate = p;
  c.regions = k;
  c.verify_budget = bv;
  c.seed = seed;
  c.topup = topup;
  return c;
}

const std::vector<std::string> kFive = {"a", "b", "c", "d", "e"};

ScoreTable FiveSpec() {
  return Table({{"a", .1}, {"b", .2}, {"c", .3}, {"d", .8}, {"e", .9}});
}

TEST(StaffSelect, HandSimulationIdentityTarget) {
  const auto spec = FiveSpec();
  FileOracle target(spec);
  auto c = StaffSelect(kFive, spec, target, Cfg(SelectionMode::kStaff, 0.6, 2, 2, 5));
  EXPECT_EQ(c.budget, 2u);
  ASSERT_EQ(c.audit.size(), 2u);
  EXPECT_EQ(c.audit[0].region_index, 1u);
  EXPECT_EQ(c.audit[0].budget, 1u);
  EXPECT_EQ(c.audit[0].taken, 1u);
  EXPECT_EQ(c.audit[1].region_index, 0u);
  EXPECT_EQ(c.audit[1].budget, 1u);
  ASSERT_EQ(c.selected_ids.size(), 2u);
  EXPECT_TRUE(c.selected_ids[0] == "d" || c.selected_ids[0] == "e");
  EXPECT_TRUE(c.selected_ids[1] == "a" || c.selected_ids[1] == "b" || c.selected_ids[1] == "c");
}

TEST(StaffSelect, HandSimulationImportantRegion) {
  const auto spec = FiveSpec();
  FileOracle target(Table({{"a", .1}, {"b", .2}, {"c", .3}, {"d", 1.6}, {"e", 1.8}}));
  auto c = StaffSelect(kFive, spec, target, Cfg(SelectionMode::kStaff, 0.6, 2, 2, 5));
  ASSERT_EQ(c.audit.size(), 2u);
  EXPECT_DOUBLE_EQ(c.audit[0].ratio, 2.0);
  EXPECT_EQ(c.audit[0].budget, 2u);
  EXPECT_EQ(c.audit[1].budget, 0u);
  EXPECT_EQ(AsSet(c.selected_ids), (std::set<std::string>{"d", "e"}));
}

TEST(StaffSelect, ZeroPruningWithTopupKeepsEverything) {
  const auto spec = FiveSpec();
  FileOracle target(Table({{"a", 9}, {"b", 0}, {"c", 0}, {"d", 0}, {"e", 0}}));
  auto c = StaffSelect(kFive, spec, target, Cfg(SelectionMode::kStaff, 0.0, 3, 1, 2, true));
  EXPECT_EQ(AsSet(c.selected_ids), AsSet(kFive));
}

TEST(StaffSelect, Errors) {
  const auto spec = FiveSpec();
  FileOracle target(spec);
  try {
    StaffSelect(kFive, spec, target, Cfg(SelectionMode::kStaff, 1.0, 2, 2, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()), "empty budget");
  }
  EXPECT_THROW(StaffSelect(kFive, spec, FailingOracle{}, Cfg(SelectionMode::kStaff, 0.5, 2, 2, 0)),
               Error);
  EXPECT_THROW(StaffSelect(kFive, spec, target, Cfg(SelectionMode::kCcsEqual, 0.5, 2, 2, 0)), Error);
  EXPECT_THROW(StaffSelect({"a", "zz"}, spec, target, Cfg(SelectionMode::kStaff, 0.5, 2, 2, 0)),
               Error);
}

TEST(BaselineSelect, TopKOrderStatistics) {
  auto t = Table({{"a", 3}, {"b", 1}, {"c", 2}});
  auto c = BaselineSelect({"a", "b", "c"}, t, Cfg(SelectionMode::kTopK, 1.0 / 3.0, 2, 2, 0));
  EXPECT_EQ(c.selected_ids, (std::vector<std::string>{"a", "c"}));
  // Ties break by ascending id.
  auto tied = Table({{"z", 1}, {"y", 1}, {"x", 0}});
  auto c2 = BaselineSelect({"z", "y", "x"}, tied, Cfg(SelectionMode::kTopK, 0.5, 2, 2, 0));
  EXPECT_EQ(c2.selected_ids, (std::vector<std::string>{"y"}));
}

TEST(BaselineSelect, RandomFullBudgetIsWholeDataset) {
  auto c = BaselineSelect(kFive, FiveSpec(), Cfg(SelectionMode::kRandom, 0.0, 2, 2, 4));
  EXPECT_EQ(AsSet(c.selected_ids), AsSet(kFive));
  auto half = BaselineSelect(kFive, FiveSpec(), Cfg(SelectionMode::kRandom, 0.5, 2, 2, 4));
  EXPECT_EQ(half.selected_ids.size(), 2u);
}

TEST(BaselineSelect, CcsMatchesStaffForUniformRegionsAndIdentityTarget) {
  ScoreTable spec;
  std::vector<std::string> ids;
  for (int i = 0; i < 40; ++i) {
    ids.push_back("u" + std::to_string(i));
    spec.Add(ids.back(), (i % 4) + 0.5 * (i % 3 == 0 ? 0.1 : 0.2));
  }
  FileOracle target(spec);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto a = StaffSelect(ids, spec, target, Cfg(SelectionMode::kStaff, 0.7, 4, 3, seed));
    auto b = BaselineSelect(ids, spec, Cfg(SelectionMode::kCcsEqual, 0.7, 4, 3, seed));
    EXPECT_EQ(a.selected_ids, b.selected_ids);
  }
}

TEST(AblationSelect, NoVerifyEqualsCcs) {
  const auto spec = FiveSpec();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto a = AblationSelect(kFive, spec, Cfg(SelectionMode::kStaffNoVerify, 0.4, 3, 2, seed, true));
    auto b = BaselineSelect(kFive, spec, Cfg(SelectionMode::kCcsEqual, 0.4, 3, 2, seed, true));
    EXPECT_EQ(a.selected_ids, b.selected_ids);
    EXPECT_EQ(a.target_queries, 0u);
  }
}

TEST(AblationSelect, NoSmallModelPartitionsByTargetScores) {
  const auto target = Table({{"a", .9}, {"b", .8}, {"c", .1}, {"d", .2}, {"e", .15}});
  auto c = AblationSelect(kFive, target, Cfg(SelectionMode::kStaffNoSmallModel, 0.6, 2, 2, 1));
  ASSERT_EQ(c.audit.size(), 2u);
  // Region 1 by target scores holds {a, b}; it is the smaller one.
  EXPECT_EQ(c.audit[0].region_index, 1u);
  EXPECT_EQ(c.audit[0].region_size, 2u);
  for (const auto& r : c.audit) EXPECT_EQ(r.ratio, 1.0);
}

TEST(AblationSelect, StaffAndNoVerifyDifferOnlyInVerificationRecords) {
  const auto spec = FiveSpec();
  FileOracle target(spec);
  auto a = StaffSelect(kFive, spec, target, Cfg(SelectionMode::kStaff, 0.4, 2, 2, 8));
  auto cfg = Cfg(SelectionMode::kStaffNoVerify, 0.4, 2, 2, 8);
  auto b = AblationSelect(kFive, spec, cfg);
  EXPECT_EQ(a.selected_ids, b.selected_ids);
  ASSERT_EQ(a.audit.size(), b.audit.size());
  for (std::size_t i = 0; i < a.audit.size(); ++i) {
    EXPECT_EQ(a.audit[i].region_index, b.audit[i].region_index);
    EXPECT_EQ(a.audit[i].budget, b.audit[i].budget);
    EXPECT_EQ(a.audit[i].ratio, b.audit[i].ratio);
    EXPECT_FALSE(a.audit[i].verified_ids.empty());
    EXPECT_TRUE(b.audit[i].verified_ids.empty());
  }
}

// Random instances shared by the property tests below.
struct Instance {
  std::vector<std::string> ids;
  ScoreTable spec;
  ScoreTable target;
  SelectionConfig cfg;
};

Instance RandomInstance(Rng& rng, std::size_t max_n, std::size_t max_k) {
  Instance in;
  const std::size_t n = 1 + rng.UniformBelow(max_n);
  for (std::size_t i = 0; i < n; ++i) {
    in.ids.push_back("id" + std::to_string(i));
    // Coarse grid so ties and empty regions are common.
    const double s = static_cast<double>(rng.UniformBelow(6)) * 0.25;
    in.spec.Add(in.ids.back(), s);
    in.target.Add(in.ids.back(), static_cast<double>(rng.UniformBelow(8)) * 0.3);
  }
  in.cfg = Cfg(SelectionMode::kStaff, 0.95 * rng.UniformUnit(), 1 + rng.UniformBelow(max_k),
               1 + rng.UniformBelow(4), rng.Next(), rng.UniformBelow(2) == 1);
  return in;
}

TEST(StaffSelect, MatchesReferenceSimulation) {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    Instance in = RandomInstance(rng, 12, 4);
    std::vector<testing::RefScore> ref;
    std::map<std::string, double> tmap;
    for (const auto& e : in.spec.entries()) ref.push_back({e.id, e.score});
    for (const auto& e : in.target.entries()) tmap[e.id] = e.score;
    FileOracle target(in.target);
    auto got = StaffSelect(in.ids, in.spec, target, in.cfg);
    auto want = testing::ReferenceSelect(ref, &tmap, in.cfg.prune_rate, in.cfg.regions,
                                         in.cfg.verify_budget, in.cfg.seed, in.cfg.topup);
    ASSERT_EQ(got.selected_ids, want.selected);
    ASSERT_EQ(got.target_queries, want.queries);
    ASSERT_EQ(got.audit.size(), want.log.size());
    for (std::size_t i = 0; i < want.log.size(); ++i) {
      EXPECT_EQ(got.audit[i].region_index, want.log[i].index);
      EXPECT_EQ(got.audit[i].ratio, want.log[i].ratio);
      EXPECT_EQ(got.audit[i].budget, want.log[i].budget);
      EXPECT_EQ(got.audit[i].verified_ids, want.log[i].verified);
    }
  }
}

TEST(StaffSelect, InvariantsOnRandomInstances) {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    Instance in = RandomInstance(rng, 60, 8);
    FileOracle target(in.target);
    CountingOracle counted(target);
    auto c = StaffSelect(in.ids, in.spec, counted, in.cfg);
    const std::size_t m = CoresetBudget(in.ids.size(), in.cfg.prune_rate);

    // Budget law.
    EXPECT_LE(c.selected_ids.size(), m);
    if (in.cfg.topup) {
      EXPECT_EQ(c.selected_ids.size(), m);
    }
    EXPECT_EQ(AsSet(c.selected_ids).size(), c.selected_ids.size());

    // Order law.
    for (std::size_t i = 1; i < c.audit.size(); ++i) {
      const auto& a = c.audit[i - 1];
      const auto& b = c.audit[i];
      EXPECT_TRUE(a.region_size < b.region_size ||
                  (a.region_size == b.region_size && a.region_index < b.region_index));
    }

    // Verification locality.
    auto p = PartitionRegions(in.spec, in.cfg.regions);
    std::size_t expected = 0;
    for (const auto& r : p.regions) {
      expected += std::min(in.cfg.verify_budget, r.size());
    }
    EXPECT_EQ(counted.count(), expected);
    EXPECT_EQ(c.target_queries, expected);

    // Plan agreement.
    auto plan = PlanVerification(in.spec, in.cfg);
    ASSERT_EQ(plan.size(), counted.queried().size());
    for (std::size_t i = 0; i < plan.size(); ++i) EXPECT_EQ(plan[i].id, counted.queried()[i]);

    // Determinism.
    auto again = StaffSelect(in.ids, in.spec, target, in.cfg);
    EXPECT_EQ(again.selected_ids, c.selected_ids);
    EXPECT_EQ(again.audit, c.audit);
  }
}

TEST(SelectionMode, NamesRoundTrip) {
  for (auto m : {SelectionMode::kStaff, SelectionMode::kStaffNoVerify,
                 SelectionMode::kStaffNoSmallModel, SelectionMode::kRandom,
                 SelectionMode::kTopK, SelectionMode::kCcsEqual}) {
    EXPECT_EQ(ParseMode(ModeName(m)), m);
  }
  EXPECT_THROW(ParseMode("greedy"), Error);
}

}  // namespace
}  // namespace staff
