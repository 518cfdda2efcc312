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

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "staff/error.h"

namespace staff {
namespace {

struct ModeSpelling {
  SelectionMode mode;
  std::string_view name;
};

constexpr ModeSpelling kModes[] = {
    {SelectionMode::kStaff, "staff"},
    {SelectionMode::kStaffNoVerify, "staff-no-verify"},
    {SelectionMode::kStaffNoSmallModel, "staff-no-small"},
    {SelectionMode::kRandom, "random"},
    {SelectionMode::kTopK, "topk"},
    {SelectionMode::kCcsEqual, "ccs"},
};

// Restricts `scores` to `ids`, in id order. Throws if an id is unscored.
ScoreTable Restrict(const std::vector<std::string>& ids,
                    const ScoreTable& scores) {
  ScoreTable out;
  for (const auto& id : ids) out.Add(id, scores.At(id));
  return out;
}

void TopUp(const std::vector<std::string>& dataset_ids,
           const SelectionConfig& cfg, Coreset& coreset) {
  if (!cfg.topup || coreset.selected_ids.size() >= coreset.budget) return;
  std::unordered_set<std::string> taken(coreset.selected_ids.begin(),
                                        coreset.selected_ids.end());
  std::vector<std::string> rest;
  for (const auto& id : dataset_ids) {
    if (!taken.contains(id)) rest.push_back(id);
  }
  const std::size_t shortfall = coreset.budget - coreset.selected_ids.size();
  Rng rng = Rng::ForStream(cfg.seed, StreamPurpose::kTopup);
  auto extra = rng.Sample(rest, shortfall);
  coreset.topup_added = extra.size();
  for (auto& id : extra) coreset.selected_ids.push_back(std::move(id));
}

// The shared stratified loop. A null `target` fixes every ratio at 1.
Coreset Stratified(const std::vector<std::string>& dataset_ids,
                   const ScoreTable& scores, const ScoreOracle* target,
                   const SelectionConfig& cfg) {
  cfg.Validate();
  if (dataset_ids.empty()) throw Error(ErrorKind::kValidation, "empty dataset");
  const ScoreTable table = Restrict(dataset_ids, scores);
  const RegionPartition partition = PartitionRegions(table, cfg.regions);
  const std::vector<std::size_t> order = VisitOrder(partition);

  Coreset coreset;
  coreset.budget = CoresetBudget(dataset_ids.size(), cfg.prune_rate);

  std::size_t remaining = order.size();
  for (std::size_t index : order) {
    const Region& region = partition.regions[index];
    RegionAudit record;
    record.region_index = index;
    record.region_size = region.size();

    if (target != nullptr) {
      Rng verify_rng = Rng::ForStream(cfg.seed, StreamPurpose::kVerify, index);
      VerificationOutcome outcome =
          VerifyRegion(region, table, *target, cfg.verify_budget, verify_rng);
      record.ratio = outcome.ratio;
      coreset.target_queries += outcome.sampled_ids.size();
      record.verified_ids = std::move(outcome.sampled_ids);
    }

    record.budget = AllocateBudget(coreset.budget, coreset.selected_ids.size(),
                                   record.ratio, remaining);
    Rng pick_rng =
        Rng::ForStream(cfg.seed, StreamPurpose::kRegionSample, index);
    auto picked = pick_rng.Sample(region.member_ids, record.budget);
    record.taken = picked.size();
    for (auto& id : picked) coreset.selected_ids.push_back(std::move(id));

    coreset.audit.push_back(std::move(record));
    --remaining;
  }

  TopUp(dataset_ids, cfg, coreset);
  return coreset;
}

}  // namespace

std::string_view ModeName(SelectionMode mode) {
  for (const auto& m : kModes) {
    if (m.mode == mode) return m.name;
  }
  return "unknown";
}

SelectionMode ParseMode(std::string_view name) {
  for (const auto& m : kModes) {
    if (m.name == name) return m.mode;
  }
  throw Error(ErrorKind::kValidation,
              "unknown selection mode '" + std::string(name) + "'");
}

void SelectionConfig::Validate() const {
  if (!std::isfinite(prune_rate) || prune_rate < 0.0) {
    throw Error(ErrorKind::kValidation, "prune rate must lie in [0, 1)");
  }
  if (prune_rate >= 1.0) throw Error(ErrorKind::kValidation, "empty budget");
  if (regions == 0) {
    throw Error(ErrorKind::kValidation, "region count must be positive");
  }
  if (verify_budget == 0) {
    throw Error(ErrorKind::kValidation, "verification budget must be positive");
  }
  if (finetune_epochs <= 0) {
    throw Error(ErrorKind::kValidation, "fine-tuning epochs must be positive");
  }
}

std::size_t CoresetBudget(std::size_t n, double prune_rate) {
  const double raw = static_cast<double>(n) * (1.0 - prune_rate);
  const double m = std::floor(raw + 1e-9);
  if (m <= 0.0) return 0;
  return std::min(n, static_cast<std::size_t>(m));
}

RegionPartition PartitionRegions(const ScoreTable& scores,
                                 std::size_t regions) {
  if (scores.empty()) throw Error(ErrorKind::kValidation, "empty dataset");
  if (regions == 0) {
    throw Error(ErrorKind::kValidation, "region count must be positive");
  }

  RegionPartition out;
  out.score_min = std::numeric_limits<double>::infinity();
  out.score_max = -std::numeric_limits<double>::infinity();
  for (const auto& e : scores.entries()) {
    if (!std::isfinite(e.score) || e.score < 0.0) {
      throw Error(ErrorKind::kValidation, "invalid score");
    }
    out.score_min = std::min(out.score_min, e.score);
    out.score_max = std::max(out.score_max, e.score);
  }
  const double span = out.score_max - out.score_min;
  out.width = span > 0.0 ? span / static_cast<double>(regions) : 0.0;

  out.regions.resize(regions);
  for (std::size_t i = 0; i < regions; ++i) {
    Region& r = out.regions[i];
    r.index = i;
    if (out.width > 0.0) {
      r.lo = out.score_min + static_cast<double>(i) * out.width;
      r.hi = i + 1 == regions
                 ? out.score_max
                 : out.score_min + static_cast<double>(i + 1) * out.width;
    } else {
      r.lo = r.hi = out.score_min;
    }
  }

  const std::size_t last = regions - 1;
  for (const auto& e : scores.entries()) {
    std::size_t idx = 0;
    if (out.width > 0.0) {
      const double pos = std::floor((e.score - out.score_min) / out.width);
      idx = pos >= static_cast<double>(last) ? last
                                             : static_cast<std::size_t>(pos);
      // Keep membership consistent with the stored edges under rounding.
      while (idx > 0 && e.score < out.regions[idx].lo) --idx;
      while (idx < last && e.score >= out.regions[idx].hi) ++idx;
    }
    out.regions[idx].member_ids.push_back(e.id);
  }
  return out;
}

std::vector<std::size_t> VisitOrder(const RegionPartition& partition) {
  std::vector<std::size_t> order;
  for (const auto& r : partition.regions) {
    if (!r.empty()) order.push_back(r.index);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return partition.regions[a].size() <
                            partition.regions[b].size();
                   });
  return order;
}

VerificationOutcome VerifyRegion(const Region& region, const ScoreTable& spec,
                                 const ScoreOracle& target,
                                 std::size_t verify_budget, Rng& rng) {
  if (region.empty()) {
    throw Error(ErrorKind::kValidation, "cannot verify an empty region");
  }
  VerificationOutcome out;
  out.region_index = region.index;
  out.sampled_ids = rng.Sample(region.member_ids, verify_budget);

  double spec_sum = 0.0;
  double target_sum = 0.0;
  for (const auto& id : out.sampled_ids) {
    spec_sum += spec.At(id);
    double t = 0.0;
    try {
      t = target.Score(id);
    } catch (const Error& e) {
      throw Error(e.kind(),
                  std::string("verification scoring failed: ") + e.what());
    }
    if (!std::isfinite(t) || t < 0.0) {
      throw Error(ErrorKind::kNumerical,
                  "verification scoring failed: invalid target score for '" +
                      id + "'");
    }
    target_sum += t;
  }
  out.ratio = spec_sum > 0.0 ? target_sum / spec_sum : 1.0;
  return out;
}

std::size_t AllocateBudget(std::size_t budget, std::size_t selected,
                           double ratio, std::size_t remaining_regions) {
  if (selected >= budget || remaining_regions == 0) return 0;
  const std::size_t left = budget - selected;
  const double share = std::floor(static_cast<double>(left) * ratio /
                                  static_cast<double>(remaining_regions));
  if (!(share > 0.0)) return 0;
  if (share >= static_cast<double>(left)) return left;
  return static_cast<std::size_t>(share);
}

std::vector<PlanEntry> PlanVerification(const ScoreTable& spec,
                                        const SelectionConfig& cfg) {
  cfg.Validate();
  const RegionPartition partition = PartitionRegions(spec, cfg.regions);
  std::vector<PlanEntry> plan;
  for (std::size_t index : VisitOrder(partition)) {
    Rng rng = Rng::ForStream(cfg.seed, StreamPurpose::kVerify, index);
    for (auto& id : rng.Sample(partition.regions[index].member_ids,
                               cfg.verify_budget)) {
      plan.push_back({index, std::move(id)});
    }
  }
  return plan;
}

Coreset StaffSelect(const std::vector<std::string>& dataset_ids,
                    const ScoreTable& spec, const ScoreOracle& target,
                    const SelectionConfig& cfg) {
  if (cfg.mode != SelectionMode::kStaff) {
    throw Error(ErrorKind::kValidation, "StaffSelect requires mode staff");
  }
  return Stratified(dataset_ids, spec, &target, cfg);
}

Coreset BaselineSelect(const std::vector<std::string>& dataset_ids,
                       const ScoreTable& scores, const SelectionConfig& cfg) {
  switch (cfg.mode) {
    case SelectionMode::kCcsEqual:
      return Stratified(dataset_ids, scores, nullptr, cfg);
    case SelectionMode::kRandom: {
      cfg.Validate();
      Coreset coreset;
      coreset.budget = CoresetBudget(dataset_ids.size(), cfg.prune_rate);
      Rng rng = Rng::ForStream(cfg.seed, StreamPurpose::kRandomBaseline);
      coreset.selected_ids = rng.Sample(dataset_ids, coreset.budget);
      return coreset;
    }
    case SelectionMode::kTopK: {
      cfg.Validate();
      Coreset coreset;
      coreset.budget = CoresetBudget(dataset_ids.size(), cfg.prune_rate);
      const ScoreTable table = Restrict(dataset_ids, scores);
      std::vector<const ScoreEntry*> ranked;
      for (const auto& e : table.entries()) ranked.push_back(&e);
      std::sort(ranked.begin(), ranked.end(),
                [](const ScoreEntry* a, const ScoreEntry* b) {
                  if (a->score != b->score) return a->score > b->score;
                  return a->id < b->id;
                });
      for (std::size_t i = 0; i < coreset.budget; ++i) {
        coreset.selected_ids.push_back(ranked[i]->id);
      }
      return coreset;
    }
    default:
      throw Error(ErrorKind::kValidation,
                  "BaselineSelect does not handle mode " +
                      std::string(ModeName(cfg.mode)));
  }
}

Coreset AblationSelect(const std::vector<std::string>& dataset_ids,
                       const ScoreTable& scores, const SelectionConfig& cfg) {
  if (cfg.mode != SelectionMode::kStaffNoVerify &&
      cfg.mode != SelectionMode::kStaffNoSmallModel) {
    throw Error(ErrorKind::kValidation,
                "AblationSelect does not handle mode " +
                    std::string(ModeName(cfg.mode)));
  }
  return Stratified(dataset_ids, scores, nullptr, cfg);
}

}  // namespace staff
