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

#include "staff/scoring.h"

#include <cmath>
#include <string>

#include "staff/error.h"

namespace staff::scoring {

ScoreKind ParseScoreKind(std::string_view name) {
  if (name == "effort") return ScoreKind::kEffort;
  if (name == "el2n") return ScoreKind::kEl2n;
  if (name == "file") return ScoreKind::kFileBacked;
  if (name == "influence") return ScoreKind::kInfluence;
  if (name == "importance") return ScoreKind::kImportance;
  throw Error(ErrorKind::kValidation, "unknown scorer '" + std::string(name) + "'");
}

std::string_view ScoreKindName(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kEffort: return "effort";
    case ScoreKind::kEl2n: return "el2n";
    case ScoreKind::kFileBacked: return "file";
    case ScoreKind::kInfluence: return "influence";
    case ScoreKind::kImportance: return "importance";
  }
  return "unknown";
}

double EffortScore(const toy::ToyModel& model, const toy::SampleRecord& sample) {
  const double norm = model.LossAndGradient(sample).gradient.norm();
  if (!std::isfinite(norm)) {
    throw Error(ErrorKind::kNumerical, "numerical instability scoring " + sample.id);
  }
  return norm;
}

double El2nScore(const toy::ToyModel& model, const toy::SampleRecord& sample) {
  if (model.head() != toy::OutputHead::kSoftmaxCrossEntropy) {
    throw Error(ErrorKind::kValidation, "el2n needs a softmax classifier");
  }
  if (sample.label < 0 || sample.label >= model.output_dim()) {
    throw Error(ErrorKind::kValidation, "label out of range for " + sample.id);
  }
  toy::Vector diff = model.Forward(sample.features);
  diff[sample.label] -= 1.0;
  const double norm = diff.norm();
  if (!std::isfinite(norm)) {
    throw Error(ErrorKind::kNumerical, "numerical instability scoring " + sample.id);
  }
  return norm;
}

ModelScorer::ModelScorer(ScoreKind kind, const toy::ToyModel& model)
    : kind_(kind), model_(model) {
  switch (kind) {
    case ScoreKind::kEffort:
    case ScoreKind::kEl2n:
      return;
    case ScoreKind::kFileBacked:
      throw Error(ErrorKind::kValidation,
                  "file-backed scores need a loaded table, not a model");
    case ScoreKind::kInfluence:
    case ScoreKind::kImportance:
      throw Error(ErrorKind::kUnsupported,
                  std::string(ScoreKindName(kind)) + " score: not implemented");
  }
}

double ModelScorer::operator()(const toy::SampleRecord& sample) const {
  return kind_ == ScoreKind::kEl2n ? El2nScore(model_, sample)
                                   : EffortScore(model_, sample);
}

ScoreTable ModelScorer::ScoreAll(std::span<const toy::SampleRecord> data) const {
  ScoreTable table;
  for (const auto& s : data) table.Add(s.id, (*this)(s));
  return table;
}

ModelOracle::ModelOracle(ModelScorer scorer,
                         std::span<const toy::SampleRecord> data)
    : scorer_(scorer) {
  for (const auto& s : data) by_id_.emplace(s.id, &s);
}

double ModelOracle::Score(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) {
    throw Error(ErrorKind::kMissingScore,
                "score missing for id '" + std::string(id) + "'");
  }
  return scorer_(*it->second);
}

}  // namespace staff::scoring
