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

#include "staff/score_table.h"

#include <cmath>

#include "staff/error.h"

namespace staff {

ScoreTable::ScoreTable(std::vector<ScoreEntry> entries) {
  entries_.reserve(entries.size());
  for (auto& e : entries) Add(std::move(e.id), e.score);
}

void ScoreTable::Add(std::string id, double score) {
  if (!std::isfinite(score) || score < 0.0) {
    throw Error(ErrorKind::kValidation, "invalid score for id '" + id + "'");
  }
  if (index_.contains(id)) {
    throw Error(ErrorKind::kValidation, "duplicate id '" + id + "'");
  }
  index_.emplace(id, entries_.size());
  entries_.push_back({std::move(id), score});
}

bool ScoreTable::Contains(std::string_view id) const {
  return index_.contains(std::string(id));
}

std::optional<double> ScoreTable::Find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].score;
}

double ScoreTable::At(std::string_view id) const {
  auto found = Find(id);
  if (!found) {
    throw Error(ErrorKind::kMissingScore,
                "score missing for id '" + std::string(id) + "'");
  }
  return *found;
}

std::vector<std::string> ScoreTable::Ids() const {
  std::vector<std::string> ids;
  ids.reserve(entries_.size());
  for (const auto& e : entries_) ids.push_back(e.id);
  return ids;
}

}  // namespace staff
