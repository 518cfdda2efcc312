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

// Speculative coreset selection.
//
// The dataset is split into K equal-width bins over the speculative (small
// model) scores. Bins are visited smallest first; each visited bin has a few
// members re-scored by the target model, the target/speculative score ratio
// scales that bin's share of the remaining budget, and the share is drawn
// uniformly from the bin. Baselines and ablations reuse the same loop.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "staff/random.h"
#include "staff/score_table.h"

namespace staff {

/// Answers score lookups by sample id. Implementations throw staff::Error
/// when an id cannot be scored.
class ScoreOracle {
 public:
  virtual ~ScoreOracle() = default;
  virtual double Score(std::string_view id) const = 0;
};

/// Wraps an oracle and records every query in order.
class CountingOracle : public ScoreOracle {
 public:
  explicit CountingOracle(const ScoreOracle& inner) : inner_(inner) {}

  double Score(std::string_view id) const override {
    queried_.emplace_back(id);
    return inner_.Score(id);
  }

  std::size_t count() const { return queried_.size(); }
  const std::vector<std::string>& queried() const { return queried_; }

 private:
  const ScoreOracle& inner_;
  mutable std::vector<std::string> queried_;
};

struct Region {
  std::size_t index = 0;
  double lo = 0.0;
  double hi = 0.0;  // exclusive, except for the last region
  std::vector<std::string> member_ids;

  std::size_t size() const { return member_ids.size(); }
  bool empty() const { return member_ids.empty(); }
};

struct RegionPartition {
  std::vector<Region> regions;
  double score_min = 0.0;
  double score_max = 0.0;
  double width = 0.0;
};

enum class SelectionMode {
  kStaff,
  kStaffNoVerify,
  kStaffNoSmallModel,
  kRandom,
  kTopK,
  kCcsEqual,
};

// CLI spellings: staff, staff-no-verify, staff-no-small, random, topk, ccs.
std::string_view ModeName(SelectionMode mode);
SelectionMode ParseMode(std::string_view name);

struct SelectionConfig {
  double prune_rate = 0.0;
  std::size_t regions = 50;
  std::size_t verify_budget = 10;
  int finetune_epochs = 3;
  std::uint64_t seed = 0;
  SelectionMode mode = SelectionMode::kStaff;
  bool topup = true;

  // Throws staff::Error(kValidation); p >= 1 reports "empty budget".
  void Validate() const;
};

struct VerificationOutcome {
  std::size_t region_index = 0;
  std::vector<std::string> sampled_ids;
  double ratio = 1.0;
};

struct RegionAudit {
  std::size_t region_index = 0;
  std::size_t region_size = 0;
  double ratio = 1.0;
  std::size_t budget = 0;  // m_B after clamping
  std::size_t taken = 0;
  std::vector<std::string> verified_ids;

  friend bool operator==(const RegionAudit&, const RegionAudit&) = default;
};

struct Coreset {
  std::vector<std::string> selected_ids;
  std::size_t budget = 0;
  std::size_t topup_added = 0;
  std::size_t target_queries = 0;
  // One record per visited region, in visiting order. Empty for the
  // non-stratified baselines.
  std::vector<RegionAudit> audit;
};

struct PlanEntry {
  std::size_t region = 0;
  std::string id;

  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

/// m = floor(N (1 - p)), computed with a 1e-9 guard so that rates such as
/// 0.9 yield the intended integer despite binary rounding.
std::size_t CoresetBudget(std::size_t n, double prune_rate);

/// Equal-width binning over [min, max]. A score maps to
/// min(floor((s - min) / width), K - 1), nudged by one bin when rounding
/// would violate lo <= s < hi. When every score is equal all ids land in
/// region 0. Empty regions are kept.
RegionPartition PartitionRegions(const ScoreTable& scores, std::size_t regions);

/// Non-empty region indices in visiting order: ascending size, ties by
/// ascending index.
std::vector<std::size_t> VisitOrder(const RegionPartition& partition);

/// Samples min(b_v, |B_i|) members and returns sum(target) / sum(spec) over
/// them, or 1 when the speculative sum is zero.
VerificationOutcome VerifyRegion(const Region& region, const ScoreTable& spec,
                                 const ScoreOracle& target,
                                 std::size_t verify_budget, Rng& rng);

/// min(floor((m - selected) * ratio / remaining), m - selected).
std::size_t AllocateBudget(std::size_t budget, std::size_t selected,
                           double ratio, std::size_t remaining_regions);

/// The ids StaffSelect will send to the target oracle, in query order.
std::vector<PlanEntry> PlanVerification(const ScoreTable& spec,
                                        const SelectionConfig& cfg);

/// Full speculative selection. `spec` must cover every dataset id.
Coreset StaffSelect(const std::vector<std::string>& dataset_ids,
                    const ScoreTable& spec, const ScoreOracle& target,
                    const SelectionConfig& cfg);

/// random, topk, or ccs (equal per-region budget).
Coreset BaselineSelect(const std::vector<std::string>& dataset_ids,
                       const ScoreTable& scores, const SelectionConfig& cfg);

/// staff-no-verify partitions `scores` as the speculative table;
/// staff-no-small expects the target table in `scores`. Both fix V_i = 1 and
/// never query a target.
Coreset AblationSelect(const std::vector<std::string>& dataset_ids,
                       const ScoreTable& scores, const SelectionConfig& cfg);

}  // namespace staff
