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

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace staff {

struct ScoreEntry {
  std::string id;
  double score = 0.0;

  friend bool operator==(const ScoreEntry&, const ScoreEntry&) = default;
};

/// Per-sample scores in insertion order.
///
/// Ids are unique and every score is finite and non-negative; Add() enforces
/// both and throws staff::Error(kValidation) otherwise. Iteration order is the
/// order of insertion, which is what makes selection reproducible.
class ScoreTable {
 public:
  ScoreTable() = default;
  explicit ScoreTable(std::vector<ScoreEntry> entries);

  void Add(std::string id, double score);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<ScoreEntry>& entries() const { return entries_; }
  const ScoreEntry& operator[](std::size_t i) const { return entries_[i]; }

  bool Contains(std::string_view id) const;
  std::optional<double> Find(std::string_view id) const;
  // Throws staff::Error(kMissingScore) for unknown ids.
  double At(std::string_view id) const;

  std::vector<std::string> Ids() const;

 private:
  std::vector<ScoreEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace staff
