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

// staff: command-line front end.
//
// Exit codes: 0 ok, 2 I/O error, 3 validation/config error, 4 score missing.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "staff/error.h"
#include "staff/harness.h"
#include "staff/io.h"
#include "staff/scoring.h"
#include "staff/selection.h"
#include "staff/synthetic_task.h"
#include "staff/toy_model.h"

namespace {

namespace fs = std::filesystem;
using staff::Error;
using staff::ErrorKind;

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitValidation = 3;
constexpr int kExitMissingScore = 4;

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return kExitIo;
    case ErrorKind::kMissingScore: return kExitMissingScore;
    default: return kExitValidation;
  }
}

struct ScoreArgs {
  std::string model;
  std::string data;
  std::string scorer = "effort";
  std::string phi = "last";
  std::string out;
};

struct SelectionArgs {
  std::string spec_scores;
  std::string target_scores;
  std::string mode = "staff";
  double prune_rate = 0.0;
  std::size_t regions = 50;
  std::size_t verify_budget = 10;
  std::uint64_t seed = 0;
  bool no_topup = false;
  std::string out;
  std::string audit;
};

struct ReportArgs {
  std::vector<std::string> audits;
  std::string metrics;
  std::string out;
  bool aggregate = false;
};

struct ToyArgs {
  std::string out_dir;
  std::string config;
  std::uint64_t seed = 0;
};

struct SweepArgs {
  std::string config;
  std::string out;
  std::size_t n = 10000;
};

staff::SelectionConfig MakeConfig(const SelectionArgs& a) {
  staff::SelectionConfig cfg;
  cfg.mode = staff::ParseMode(a.mode);
  cfg.prune_rate = a.prune_rate;
  cfg.regions = a.regions;
  cfg.verify_budget = a.verify_budget;
  cfg.seed = a.seed;
  cfg.topup = !a.no_topup;
  cfg.Validate();
  return cfg;
}

staff::harness::SweepSpec LoadSpec(const std::string& config) {
  if (config.empty()) return staff::harness::SweepSpec{};
  return staff::harness::ReadSweepConfig(config);
}

void RunScore(const ScoreArgs& a) {
  const auto kind = staff::scoring::ParseScoreKind(a.scorer);
  if (kind != staff::scoring::ScoreKind::kEffort && kind != staff::scoring::ScoreKind::kEl2n) {
    throw Error(ErrorKind::kValidation, "score supports --scorer effort|el2n");
  }
  staff::toy::ToyModel model = staff::toy::ToyModel::Load(a.model);
  if (a.phi == "all") {
    model.SetAllLearnable();
  } else if (a.phi == "last") {
    model.SetLastLayerLearnable();
  } else {
    throw Error(ErrorKind::kValidation, "--phi must be last or all");
  }
  const staff::toy::Dataset data = staff::io::ReadDataset(a.data);
  const staff::ScoreTable table = staff::scoring::ModelScorer(kind, model).ScoreAll(data);
  staff::io::WriteScoreFile(a.out, table);
}

void RunPlan(const SelectionArgs& a) {
  staff::SelectionConfig cfg = MakeConfig(a);
  const staff::ScoreTable spec = staff::io::ReadScoreFile(a.spec_scores);
  staff::io::WriteFileAtomic(a.out, staff::io::FormatPlanLines(staff::PlanVerification(spec, cfg)));
}

void RunSelect(const SelectionArgs& a) {
  const staff::SelectionConfig cfg = MakeConfig(a);
  const staff::ScoreTable spec = staff::io::ReadScoreFile(a.spec_scores);
  const std::vector<std::string> ids = spec.Ids();

  std::optional<staff::scoring::FileOracle> target;
  if (!a.target_scores.empty()) target.emplace(staff::io::ReadScoreFile(a.target_scores));

  staff::Coreset coreset;
  switch (cfg.mode) {
    case staff::SelectionMode::kStaff:
      if (!target) throw Error(ErrorKind::kValidation, "mode staff needs --target-scores");
      coreset = staff::StaffSelect(ids, spec, *target, cfg);
      break;
    case staff::SelectionMode::kStaffNoSmallModel:
      if (!target) throw Error(ErrorKind::kValidation, "mode staff-no-small needs --target-scores");
      coreset = staff::AblationSelect(ids, target->table(), cfg);
      break;
    case staff::SelectionMode::kStaffNoVerify:
      coreset = staff::AblationSelect(ids, spec, cfg);
      break;
    default:
      coreset = staff::BaselineSelect(ids, spec, cfg);
      break;
  }

  const staff::io::RunKey key{a.mode, cfg.prune_rate, cfg.seed};
  const std::string audit =
      staff::io::FormatAudit(staff::io::AuditToJson(key, cfg, ids.size(), coreset));
  staff::io::WriteFileAtomic(a.out, staff::io::FormatCoreset(coreset));
  if (!a.audit.empty()) staff::io::WriteFileAtomic(a.audit, audit);
}

void RunReport(const ReportArgs& a) {
  std::vector<staff::io::RunKey> keys;
  for (const auto& path : a.audits) keys.push_back(staff::io::ReadAuditKey(path));
  std::vector<staff::io::MetricRow> metrics;
  if (!a.metrics.empty()) metrics = staff::io::ReadMetricsCsv(a.metrics);
  const auto rows = staff::io::JoinReport(keys, std::move(metrics), a.aggregate);
  staff::io::WriteFileAtomic(a.out, staff::io::FormatMetricsCsv(rows));
}

void RunToy(const ToyArgs& a) {
  const staff::harness::SweepSpec spec = LoadSpec(a.config);
  const staff::harness::SeedWorld world = staff::harness::BuildWorld(spec, a.seed);
  const fs::path dir = a.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string());
  staff::io::WriteDataset(dir / "pretrain.jsonl", world.data.pretrain);
  staff::io::WriteDataset(dir / "train.jsonl", world.data.train);
  staff::io::WriteDataset(dir / "test.jsonl", world.data.test);
  world.small_tuned.Save(dir / "small.ckpt");
  world.target.Save(dir / "target.ckpt");
  world.foreign_tuned.Save(dir / "foreign.ckpt");
}

void RunSweep(const SweepArgs& a, bool ablations) {
  const staff::harness::SweepSpec spec = LoadSpec(a.config);
  const auto rows = ablations ? staff::harness::RunAblations(spec) : staff::harness::RunSweep(spec);
  staff::io::WriteFileAtomic(a.out, staff::io::FormatMetricsCsv(rows));
}

void RunOverhead(const SweepArgs& a) {
  const staff::harness::SweepSpec spec = LoadSpec(a.config);
  staff::harness::OverheadOptions opts;
  opts.n = a.n;
  opts.regions = spec.regions;
  opts.verify_budget = spec.verify_budget;
  opts.seed = spec.seeds.front();
  const std::string csv =
      staff::harness::FormatOverheadCsv(staff::harness::OverheadProbe(spec, opts));
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    staff::io::WriteFileAtomic(a.out, csv);
  }
}

void AddSelectionOptions(CLI::App* cmd, SelectionArgs& a) {
  cmd->add_option("--spec-scores", a.spec_scores, "speculative score file (JSON Lines)")->required();
  cmd->add_option("--prune-rate", a.prune_rate, "fraction of the dataset to drop, in [0, 1)");
  cmd->add_option("--regions", a.regions, "number of equal-width score regions")->capture_default_str();
  cmd->add_option("--verify-budget", a.verify_budget, "target queries per region")->capture_default_str();
  cmd->add_option("--seed", a.seed, "root seed")->envname("STAFF_SEED");
  cmd->add_option("--out", a.out, "output path")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speculative coreset selection"};
  app.require_subcommand(1);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "score every sample of a dataset with a checkpoint");
  score_cmd->add_option("--model", score.model, "model checkpoint")->required();
  score_cmd->add_option("--data", score.data, "dataset (JSON Lines)")->required();
  score_cmd->add_option("--scorer", score.scorer, "effort or el2n")->capture_default_str();
  score_cmd->add_option("--phi", score.phi, "learnable subset: last or all")->capture_default_str();
  score_cmd->add_option("--out", score.out, "output score file")->required();

  SelectionArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "list the ids staff selection will verify");
  AddSelectionOptions(plan_cmd, plan);

  SelectionArgs select;
  auto* select_cmd = app.add_subcommand("select", "select a coreset");
  AddSelectionOptions(select_cmd, select);
  select_cmd->add_option("--target-scores", select.target_scores, "target score file (JSON Lines)");
  select_cmd->add_option("--mode", select.mode,
                         "staff|random|topk|ccs|staff-no-verify|staff-no-small")
      ->capture_default_str();
  select_cmd->add_flag("--no-topup", select.no_topup, "leave any budget shortfall unfilled");
  select_cmd->add_option("--audit", select.audit, "audit JSON output path");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "join audits with sweep metrics");
  report_cmd->add_option("--audit", report.audits, "audit JSON files")->expected(0, -1);
  report_cmd->add_option("--metrics", report.metrics, "metrics CSV");
  report_cmd->add_option("--out", report.out, "output CSV")->required();
  report_cmd->add_flag("--aggregate", report.aggregate, "append mean/std over seeds");

  ToyArgs toy;
  auto* toy_cmd = app.add_subcommand("toy", "write a toy task and model family to a directory");
  toy_cmd->add_option("--out-dir", toy.out_dir, "output directory")->required();
  toy_cmd->add_option("--config", toy.config, "sweep config file");
  toy_cmd->add_option("--seed", toy.seed, "seed")->envname("STAFF_SEED");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a pruning-rate sweep on the toy family");
  sweep_cmd->add_option("--config", sweep.config, "sweep config file");
  sweep_cmd->add_option("--out", sweep.out, "metrics CSV")->required();

  SweepArgs ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "run the staff ablations on the toy family");
  ablate_cmd->add_option("--config", ablate.config, "sweep config file");
  ablate_cmd->add_option("--out", ablate.out, "metrics CSV")->required();

  SweepArgs overhead;
  auto* overhead_cmd = app.add_subcommand("overhead", "compare scoring costs");
  overhead_cmd->add_option("--config", overhead.config, "sweep config file");
  overhead_cmd->add_option("--n", overhead.n, "dataset size")->capture_default_str();
  overhead_cmd->add_option("--out", overhead.out, "CSV output (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*score_cmd) RunScore(score);
    if (*plan_cmd) RunPlan(plan);
    if (*select_cmd) RunSelect(select);
    if (*report_cmd) RunReport(report);
    if (*toy_cmd) RunToy(toy);
    if (*sweep_cmd) RunSweep(sweep, false);
    if (*ablate_cmd) RunSweep(ablate, true);
    if (*overhead_cmd) RunOverhead(overhead);
  } catch (const Error& e) {
    std::cerr << "staff: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "staff: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
