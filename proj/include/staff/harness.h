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

// Pruning-rate sweeps over the toy model family.
//
// Each seed builds a task, pre-trains a small and a target model on the shared
// corpus (plus a small model on a foreign corpus), fine-tunes the scorers for
// T epochs, then for every (method, rate) selects a coreset, fine-tunes a fresh
// copy of the pre-trained target on it and records test metrics.

#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "staff/io.h"
#include "staff/score_table.h"
#include "staff/synthetic_task.h"
#include "staff/toy_model.h"

namespace staff::harness {

// Method names understood by the sweep:
//   full             reference row, whole training set at rate 0
//   random           uniform sample
//   grand            top-m target effort scores
//   el2n             top-m target EL2N scores
//   ccs              equal budget per region over target effort scores
//   staff            small-model regions, target verification
//   staff-no-verify  small-model regions, V_i = 1
//   staff-no-small   target-score regions, V_i = 1
//   staff-foreign    staff with a foreign-family small model
struct SweepSpec {
  std::vector<double> prune_rates = {0.2, 0.5, 0.7, 0.8, 0.9};
  std::vector<std::string> methods = {"random", "grand", "el2n", "ccs", "staff"};
  std::vector<std::uint64_t> seeds;  // defaults to 0..19
  toy::TaskShape task;
  int eval_epochs = 10;
  int finetune_epochs = 3;
  std::size_t regions = 50;
  std::size_t verify_budget = 10;
  int pretrain_epochs = 10;
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  int small_hidden = 16;
  std::vector<int> target_hidden = {64, 32};

  SweepSpec();
  void Validate() const;
};

/// Parses `key = value` lines; `#` starts a comment, lists are comma
/// separated, and `seeds` also accepts an inclusive range `a-b`.
SweepSpec ParseSweepConfig(std::istream& in);
SweepSpec ReadSweepConfig(const std::filesystem::path& path);

/// Everything derived from one seed before any coreset is drawn.
struct SeedWorld {
  std::uint64_t seed = 0;
  toy::TaskData data;
  toy::ToyModel small;           // pre-trained
  toy::ToyModel target;          // pre-trained
  toy::ToyModel foreign;         // pre-trained on the foreign corpus
  toy::ToyModel small_tuned;     // small after T epochs on the train split
  toy::ToyModel foreign_tuned;
  toy::ToyModel target_tuned;    // only used by the target-scored baselines
  ScoreTable speculative;        // effort on small_tuned
  ScoreTable foreign_speculative;
  ScoreTable target_base;        // effort on the pre-trained target
  ScoreTable target_effort;      // effort on target_tuned
  ScoreTable target_el2n;        // el2n on target_tuned
};

SeedWorld BuildWorld(const SweepSpec& spec, std::uint64_t seed);

struct CellResult {
  std::vector<std::string> coreset;
  std::size_t target_queries = 0;
  toy::EvalResult eval;
};

/// Selects with `method` at `rate` and evaluates the fine-tuned target.
CellResult RunCell(const SweepSpec& spec, const SeedWorld& world,
                   const std::string& method, double rate);

/// Rows in canonical (method, prune_rate, seed, metric) order, including one
/// "full" reference row set per seed. Metrics: test_accuracy, test_loss,
/// coreset_size, target_queries.
std::vector<io::MetricRow> RunSweep(const SweepSpec& spec);

/// RunSweep with methods replaced by the four staff variants.
std::vector<io::MetricRow> RunAblations(SweepSpec spec);

struct OverheadRow {
  std::string stage;  // small_full, target_full, target_verify
  std::size_t queries = 0;
  double est_flops = 0.0;
  double seconds = 0.0;
  double flop_ratio = 0.0;  // relative to target_full
  double time_ratio = 0.0;
};

struct OverheadOptions {
  std::size_t n = 10000;
  std::size_t regions = 50;
  std::size_t verify_budget = 10;
  std::uint64_t seed = 0;
};

/// Per-sample scoring cost is estimated as 3x the forward multiply-adds
/// times 2 flops. The verify row counts the actual target queries of one
/// staff selection at rate 0.5.
std::vector<OverheadRow> OverheadProbe(const SweepSpec& spec,
                                       const OverheadOptions& options);
std::string FormatOverheadCsv(const std::vector<OverheadRow>& rows);

/// Spearman rank correlation with average ranks for ties.
double SpearmanCorrelation(std::span<const double> a, std::span<const double> b);

struct FamilySimilarity {
  double same_family = 0.0;  // small vs target effort scores
  double foreign = 0.0;      // foreign small vs target effort scores
};

/// Rank agreement of fine-tuned scorer effort scores with the pre-trained
/// target's effort scores on the downstream training split.
FamilySimilarity MeasureFamilySimilarity(const SweepSpec& spec, const SeedWorld& world);

}  // namespace staff::harness
