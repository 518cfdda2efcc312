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

// Per-sample data scores.
//
//   effort  ||grad_phi L(d)||_2 over the model's learnable layers phi
//   el2n    ||softmax(f(d)) - onehot(y)||_2
//
// plus table-backed oracles for scores produced elsewhere.

#pragma once

#include <span>
#include <string_view>
#include <unordered_map>

#include "staff/score_table.h"
#include "staff/selection.h"
#include "staff/toy_model.h"

namespace staff::scoring {

enum class ScoreKind {
  kEffort,
  kEl2n,
  kFileBacked,
  // Reserved; constructing a scorer of these kinds fails with "not implemented".
  kInfluence,
  kImportance,
};

ScoreKind ParseScoreKind(std::string_view name);
std::string_view ScoreKindName(ScoreKind kind);

/// Throws staff::Error(kValidation) on a feature-size mismatch and
/// staff::Error(kNumerical, "numerical instability") on a non-finite gradient.
double EffortScore(const toy::ToyModel& model, const toy::SampleRecord& sample);

double El2nScore(const toy::ToyModel& model, const toy::SampleRecord& sample);

/// A score function bound to a model. Effort uses the model's learnable
/// mask, so callers pick phi by setting that mask before binding.
class ModelScorer {
 public:
  ModelScorer(ScoreKind kind, const toy::ToyModel& model);

  ScoreKind kind() const { return kind_; }
  double operator()(const toy::SampleRecord& sample) const;

  /// Scores every sample, in input order.
  ScoreTable ScoreAll(std::span<const toy::SampleRecord> data) const;

 private:
  ScoreKind kind_;
  const toy::ToyModel& model_;
};

/// Lookup oracle over a loaded table. Unknown ids raise
/// staff::Error(kMissingScore, "score missing for id ...").
class FileOracle : public ScoreOracle {
 public:
  explicit FileOracle(ScoreTable table) : table_(std::move(table)) {}

  double Score(std::string_view id) const override { return table_.At(id); }
  const ScoreTable& table() const { return table_; }

 private:
  ScoreTable table_;
};

/// Scores samples lazily on a model, on demand by id. Used as the target
/// oracle when the target model is available in-process.
class ModelOracle : public ScoreOracle {
 public:
  ModelOracle(ModelScorer scorer, std::span<const toy::SampleRecord> data);

  double Score(std::string_view id) const override;

 private:
  ModelScorer scorer_;
  std::unordered_map<std::string, const toy::SampleRecord*> by_id_;
};

}  // namespace staff::scoring
