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

#include "staff/io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "staff/error.h"

namespace staff::io {
namespace {

using nlohmann::json;

[[noreturn]] void Invalid(const std::string& what, std::size_t line_no) {
  throw Error(ErrorKind::kValidation,
              "line " + std::to_string(line_no) + ": " + what);
}

json ParseLine(const std::string& line, std::size_t line_no) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) Invalid("malformed JSON", line_no);
  if (!j.is_object()) Invalid("expected a JSON object", line_no);
  return j;
}

std::string RequireString(const json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    Invalid(std::string("missing string field '") + key + "'", line_no);
  }
  return it->get<std::string>();
}

double RequireNumber(const json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    Invalid(std::string("missing numeric field '") + key + "'", line_no);
  }
  return it->get<double>();
}

std::int64_t RequireInteger(const json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer()) {
    Invalid(std::string("missing integer field '") + key + "'", line_no);
  }
  return it->get<std::int64_t>();
}

std::ifstream OpenInput(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return in;
}

// Runs `parse` and prefixes validation errors with the file name.
template <typename F>
auto WithPath(const std::filesystem::path& path, F&& parse) {
  std::ifstream in = OpenInput(path);
  try {
    return parse(in);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double ParseDoubleField(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    Invalid("bad number '" + s + "'", line_no);
  }
  return v;
}

bool IsDecimal(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(),
                                   [](char c) { return c >= '0' && c <= '9'; });
}

// Numeric seeds first (by value), then "mean", then "std", then the rest.
std::tuple<int, std::uint64_t, std::string> SeedKey(const std::string& seed) {
  if (IsDecimal(seed)) {
    std::uint64_t v = 0;
    std::from_chars(seed.data(), seed.data() + seed.size(), v);
    return {0, v, ""};
  }
  if (seed == "mean") return {1, 0, ""};
  if (seed == "std") return {2, 0, ""};
  return {3, 0, seed};
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void WriteFileAtomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::kIo, "cannot replace " + path.string());
  }
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in = OpenInput(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScoreTable ParseScoreLines(std::istream& in) {
  ScoreTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = ParseLine(line, line_no);
    std::string id = RequireString(j, "id", line_no);
    double score = RequireNumber(j, "score", line_no);
    if (!std::isfinite(score) || score < 0.0) {
      Invalid("score must be finite and non-negative", line_no);
    }
    if (table.Contains(id)) Invalid("duplicate id '" + id + "'", line_no);
    table.Add(std::move(id), score);
  }
  return table;
}

ScoreTable ReadScoreFile(const std::filesystem::path& path) {
  return WithPath(path, [](std::istream& in) { return ParseScoreLines(in); });
}

std::string FormatScoreLines(const ScoreTable& table) {
  std::string out;
  for (const auto& e : table.entries()) {
    // Keys in a fixed order, so build the line by hand around json escaping.
    out += "{\"id\":" + json(e.id).dump() + ",\"score\":" + FormatDouble(e.score) + "}\n";
  }
  return out;
}

void WriteScoreFile(const std::filesystem::path& path, const ScoreTable& table) {
  WriteFileAtomic(path, FormatScoreLines(table));
}

toy::Dataset ParseDatasetLines(std::istream& in) {
  toy::Dataset data;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = ParseLine(line, line_no);
    toy::SampleRecord s;
    s.id = RequireString(j, "id", line_no);
    if (!seen.insert(s.id).second) Invalid("duplicate id '" + s.id + "'", line_no);
    auto feats = j.find("features");
    if (feats == j.end() || !feats->is_array()) {
      Invalid("missing array field 'features'", line_no);
    }
    s.features.resize(static_cast<Eigen::Index>(feats->size()));
    for (std::size_t i = 0; i < feats->size(); ++i) {
      const json& v = (*feats)[i];
      if (!v.is_number()) Invalid("non-numeric feature", line_no);
      s.features[static_cast<Eigen::Index>(i)] = v.get<double>();
      if (!std::isfinite(s.features[static_cast<Eigen::Index>(i)])) {
        Invalid("non-finite feature", line_no);
      }
    }
    const std::int64_t label = RequireInteger(j, "label", line_no);
    if (label < 0) Invalid("label must be non-negative", line_no);
    s.label = static_cast<int>(label);
    data.push_back(std::move(s));
  }
  return data;
}

toy::Dataset ReadDataset(const std::filesystem::path& path) {
  return WithPath(path, [](std::istream& in) { return ParseDatasetLines(in); });
}

void WriteDataset(const std::filesystem::path& path, const toy::Dataset& data) {
  std::string out;
  for (const auto& s : data) {
    out += "{\"id\":" + json(s.id).dump() + ",\"features\":[";
    for (Eigen::Index i = 0; i < s.features.size(); ++i) {
      if (i > 0) out += ',';
      out += FormatDouble(s.features[i]);
    }
    out += "],\"label\":" + std::to_string(s.label) + "}\n";
  }
  WriteFileAtomic(path, out);
}

std::vector<PlanEntry> ParsePlanLines(std::istream& in) {
  std::vector<PlanEntry> plan;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = ParseLine(line, line_no);
    const std::int64_t region = RequireInteger(j, "region", line_no);
    if (region < 0) Invalid("region must be non-negative", line_no);
    plan.push_back({static_cast<std::size_t>(region), RequireString(j, "id", line_no)});
  }
  return plan;
}

std::vector<PlanEntry> ReadPlan(const std::filesystem::path& path) {
  return WithPath(path, [](std::istream& in) { return ParsePlanLines(in); });
}

std::string FormatPlanLines(const std::vector<PlanEntry>& plan) {
  std::string out;
  for (const auto& e : plan) {
    out += "{\"region\":" + std::to_string(e.region) + ",\"id\":" + json(e.id).dump() + "}\n";
  }
  return out;
}

std::string FormatCoreset(const Coreset& coreset) {
  std::string out;
  for (const auto& id : coreset.selected_ids) out += id + "\n";
  return out;
}

nlohmann::ordered_json AuditToJson(const RunKey& key, const SelectionConfig& cfg,
                                   std::size_t dataset_size, const Coreset& coreset) {
  nlohmann::ordered_json j;
  j["method"] = key.method;
  j["prune_rate"] = key.prune_rate;
  j["seed"] = key.seed;
  j["regions"] = cfg.regions;
  j["verify_budget"] = cfg.verify_budget;
  j["topup"] = cfg.topup;
  j["dataset_size"] = dataset_size;
  j["budget"] = coreset.budget;
  j["selected"] = coreset.selected_ids.size();
  j["topup_added"] = coreset.topup_added;
  j["target_queries"] = coreset.target_queries;
  auto order = nlohmann::ordered_json::array();
  auto records = nlohmann::ordered_json::array();
  for (const auto& r : coreset.audit) {
    order.push_back(r.region_index);
    nlohmann::ordered_json rec;
    rec["region"] = r.region_index;
    rec["size"] = r.region_size;
    rec["ratio"] = r.ratio;
    rec["budget"] = r.budget;
    rec["taken"] = r.taken;
    rec["verified"] = r.verified_ids;
    records.push_back(std::move(rec));
  }
  j["order"] = std::move(order);
  j["records"] = std::move(records);
  return j;
}

std::string FormatAudit(const nlohmann::ordered_json& audit) {
  return audit.dump(2) + "\n";
}

RunKey ReadAuditKey(const std::filesystem::path& path) {
  return WithPath(path, [](std::istream& in) {
    json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorKind::kValidation, "malformed audit JSON");
    }
    RunKey key;
    if (!j.contains("method") || !j["method"].is_string() ||
        !j.contains("prune_rate") || !j["prune_rate"].is_number() ||
        !j.contains("seed") || !j["seed"].is_number_unsigned()) {
      throw Error(ErrorKind::kValidation, "audit lacks method/prune_rate/seed");
    }
    key.method = j["method"].get<std::string>();
    key.prune_rate = j["prune_rate"].get<double>();
    key.seed = j["seed"].get<std::uint64_t>();
    return key;
  });
}

std::vector<MetricRow> ParseMetricsCsv(std::istream& in) {
  std::vector<MetricRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kMetricsHeader) Invalid("expected header " + std::string(kMetricsHeader), line_no);
      header_seen = true;
      continue;
    }
    auto f = SplitCsv(line);
    if (f.size() != 5) Invalid("expected 5 columns", line_no);
    MetricRow row;
    row.method = f[0];
    row.prune_rate = ParseDoubleField(f[1], line_no);
    row.seed = f[2];
    row.metric = f[3];
    row.value = ParseDoubleField(f[4], line_no);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<MetricRow> ReadMetricsCsv(const std::filesystem::path& path) {
  return WithPath(path, [](std::istream& in) { return ParseMetricsCsv(in); });
}

std::string FormatMetricsCsv(const std::vector<MetricRow>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows) {
    out += r.method + "," + FormatDouble(r.prune_rate) + "," + r.seed + "," +
           r.metric + "," + FormatDouble(r.value) + "\n";
  }
  return out;
}

void SortMetricRows(std::vector<MetricRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const MetricRow& a, const MetricRow& b) {
    return std::forward_as_tuple(a.method, a.prune_rate) <
               std::forward_as_tuple(b.method, b.prune_rate) ||
           (std::forward_as_tuple(a.method, a.prune_rate) ==
                std::forward_as_tuple(b.method, b.prune_rate) &&
            std::make_tuple(SeedKey(a.seed), a.metric) <
                std::make_tuple(SeedKey(b.seed), b.metric));
  });
}

std::vector<MetricRow> JoinReport(const std::vector<RunKey>& audits,
                                  std::vector<MetricRow> metrics, bool aggregate) {
  std::vector<MetricRow> rows;
  if (audits.empty()) {
    rows = std::move(metrics);
  } else {
    std::set<std::tuple<std::string, double, std::string>> keys;
    for (const auto& a : audits) {
      keys.emplace(a.method, a.prune_rate, std::to_string(a.seed));
    }
    for (auto& m : metrics) {
      if (keys.contains({m.method, m.prune_rate, m.seed})) rows.push_back(std::move(m));
    }
  }

  if (aggregate) {
    std::map<std::tuple<std::string, double, std::string>, std::vector<double>> groups;
    for (const auto& r : rows) {
      if (IsDecimal(r.seed)) groups[{r.method, r.prune_rate, r.metric}].push_back(r.value);
    }
    for (const auto& [key, values] : groups) {
      const double n = static_cast<double>(values.size());
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= n;
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      const auto& [method, rate, metric] = key;
      rows.push_back({method, rate, "mean", metric, mean});
      rows.push_back({method, rate, "std", metric, sd});
    }
  }
  SortMetricRows(rows);
  return rows;
}

}  // namespace staff::io
