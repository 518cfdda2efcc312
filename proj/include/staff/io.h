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

// File formats shared by the CLI, the harness and external scorers.
//
//   score file    JSON Lines  {"id": "<string>", "score": <number>}
//   dataset       JSON Lines  {"id": "<string>", "features": [<number>...], "label": <int>}
//   plan          JSON Lines  {"region": <int>, "id": "<string>"}
//   coreset       one id per line
//   audit         single JSON object (see AuditToJson)
//   metrics/report CSV with header method,prune_rate,seed,metric,value
//
// Every writer ends its output with a newline and replaces the destination
// atomically (write to a sibling temp file, then rename).

#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "json.hpp"

#include "staff/score_table.h"
#include "staff/selection.h"
#include "staff/toy_model.h"

namespace staff::io {

/// Shortest decimal text that round-trips to the same double.
std::string FormatDouble(double value);

void WriteFileAtomic(const std::filesystem::path& path, const std::string& contents);
std::string ReadFile(const std::filesystem::path& path);

ScoreTable ParseScoreLines(std::istream& in);
ScoreTable ReadScoreFile(const std::filesystem::path& path);
std::string FormatScoreLines(const ScoreTable& table);
void WriteScoreFile(const std::filesystem::path& path, const ScoreTable& table);

toy::Dataset ParseDatasetLines(std::istream& in);
toy::Dataset ReadDataset(const std::filesystem::path& path);
void WriteDataset(const std::filesystem::path& path, const toy::Dataset& data);

std::vector<PlanEntry> ParsePlanLines(std::istream& in);
std::vector<PlanEntry> ReadPlan(const std::filesystem::path& path);
std::string FormatPlanLines(const std::vector<PlanEntry>& plan);

std::string FormatCoreset(const Coreset& coreset);

/// Identifies the run an audit belongs to.
struct RunKey {
  std::string method;
  double prune_rate = 0.0;
  std::uint64_t seed = 0;
};

nlohmann::ordered_json AuditToJson(const RunKey& key, const SelectionConfig& cfg,
                                   std::size_t dataset_size, const Coreset& coreset);
std::string FormatAudit(const nlohmann::ordered_json& audit);
RunKey ReadAuditKey(const std::filesystem::path& path);

struct MetricRow {
  std::string method;
  double prune_rate = 0.0;
  std::string seed;  // decimal seed, or "mean" / "std" for aggregates
  std::string metric;
  double value = 0.0;
};

inline constexpr const char* kMetricsHeader = "method,prune_rate,seed,metric,value";

std::vector<MetricRow> ParseMetricsCsv(std::istream& in);
std::vector<MetricRow> ReadMetricsCsv(const std::filesystem::path& path);
std::string FormatMetricsCsv(const std::vector<MetricRow>& rows);

/// Sorts by (method, prune_rate, seed, metric); numeric seeds order
/// numerically and before "mean", then "std".
void SortMetricRows(std::vector<MetricRow>& rows);

/// Keeps the metric rows whose (method, prune_rate, seed) matches one of the
/// audits; with no audits every row is kept. With `aggregate`, appends mean
/// and sample standard deviation over seeds per (method, prune_rate, metric).
/// Output is sorted by SortMetricRows.
std::vector<MetricRow> JoinReport(const std::vector<RunKey>& audits,
                                  std::vector<MetricRow> metrics, bool aggregate);

}  // namespace staff::io
