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

#include "staff/harness.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "staff/error.h"
#include "staff/random.h"
#include "staff/scoring.h"
#include "staff/selection.h"

namespace staff::harness {
namespace {

// Indices into the kTraining stream family; fixed so that schedules are
// shared across models and methods within a seed.
enum TrainingStream : std::uint64_t {
  kPretrainSchedule = 1,
  kScorerFinetune = 2,
  kEvalFinetune = 3,
};

enum InitStream : std::uint64_t {
  kSmallInit = 1,
  kTargetInit = 2,
};

const char* kKnownMethods[] = {"full",           "random",          "grand",
                               "el2n",           "ccs",             "staff",
                               "staff-no-verify", "staff-no-small", "staff-foreign"};

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void BadValue(const std::string& key, const std::string& value) {
  throw Error(ErrorKind::kValidation, "bad value for '" + key + "': '" + value + "'");
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) BadValue(key, text);
  return v;
}

std::vector<std::uint64_t> ParseSeeds(const std::string& value) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : SplitList(value)) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(ParseNumber<std::uint64_t>("seeds", item));
      continue;
    }
    const auto lo = ParseNumber<std::uint64_t>("seeds", Trim(item.substr(0, dash)));
    const auto hi = ParseNumber<std::uint64_t>("seeds", Trim(item.substr(dash + 1)));
    if (hi < lo) BadValue("seeds", item);
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  return seeds;
}

toy::TrainOptions Schedule(const SweepSpec& spec, std::uint64_t seed,
                           TrainingStream stream) {
  toy::TrainOptions o;
  o.batch_size = spec.batch_size;
  o.learning_rate = spec.learning_rate;
  o.seed = StreamSeed(seed, StreamPurpose::kTraining, stream);
  return o;
}

std::vector<int> SmallDims(const SweepSpec& spec) {
  return {spec.task.input_dim, spec.small_hidden, spec.task.classes};
}

std::vector<int> TargetDims(const SweepSpec& spec) {
  std::vector<int> dims = {spec.task.input_dim};
  dims.insert(dims.end(), spec.target_hidden.begin(), spec.target_hidden.end());
  dims.push_back(spec.task.classes);
  return dims;
}

ScoreTable EffortTable(const toy::ToyModel& model, const toy::Dataset& data) {
  return scoring::ModelScorer(scoring::ScoreKind::kEffort, model).ScoreAll(data);
}

std::vector<double> Values(const ScoreTable& t) {
  std::vector<double> v;
  v.reserve(t.size());
  for (const auto& e : t.entries()) v.push_back(e.score);
  return v;
}

std::vector<double> Ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

void AppendCell(std::vector<io::MetricRow>& rows, const std::string& method,
                double rate, std::uint64_t seed, const CellResult& cell) {
  const std::string s = std::to_string(seed);
  rows.push_back({method, rate, s, "coreset_size", static_cast<double>(cell.coreset.size())});
  rows.push_back({method, rate, s, "target_queries", static_cast<double>(cell.target_queries)});
  rows.push_back({method, rate, s, "test_accuracy", cell.eval.accuracy});
  rows.push_back({method, rate, s, "test_loss", cell.eval.mean_loss});
}

}  // namespace

SweepSpec::SweepSpec() {
  for (std::uint64_t s = 0; s < 20; ++s) seeds.push_back(s);
}

void SweepSpec::Validate() const {
  if (seeds.empty()) throw Error(ErrorKind::kValidation, "sweep needs at least one seed");
  for (double r : prune_rates) {
    if (!(r >= 0.0 && r < 1.0)) {
      throw Error(ErrorKind::kValidation, "prune rates must lie in [0, 1)");
    }
  }
  for (const auto& m : methods) {
    if (std::find(std::begin(kKnownMethods), std::end(kKnownMethods), m) ==
        std::end(kKnownMethods)) {
      throw Error(ErrorKind::kValidation, "unknown sweep method '" + m + "'");
    }
  }
  if (eval_epochs < 0 || finetune_epochs <= 0 || pretrain_epochs < 0) {
    throw Error(ErrorKind::kValidation, "epoch counts must be non-negative (T positive)");
  }
  if (regions == 0 || verify_budget == 0 || batch_size == 0) {
    throw Error(ErrorKind::kValidation, "regions, verify_budget and batch_size must be positive");
  }
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::kValidation, "learning rate must be positive");
  if (small_hidden <= 0 || target_hidden.empty()) {
    throw Error(ErrorKind::kValidation, "model widths must be positive");
  }
  std::size_t small_params = 0;
  std::size_t target_params = 0;
  auto count = [](const std::vector<int>& dims) {
    std::size_t n = 0;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
      n += static_cast<std::size_t>(dims[i] + 1) * static_cast<std::size_t>(dims[i + 1]);
    }
    return n;
  };
  small_params = count(SmallDims(*this));
  target_params = count(TargetDims(*this));
  if (small_params >= target_params) {
    throw Error(ErrorKind::kValidation, "small model must have fewer parameters than target");
  }
}

SweepSpec ParseSweepConfig(std::istream& in) {
  SweepSpec spec;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kValidation, "expected key = value, got '" + line + "'");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));

    if (key == "prune_rates") {
      spec.prune_rates.clear();
      for (const auto& v : SplitList(value)) spec.prune_rates.push_back(ParseNumber<double>(key, v));
    } else if (key == "methods") {
      spec.methods = SplitList(value);
    } else if (key == "seeds") {
      spec.seeds = ParseSeeds(value);
    } else if (key == "eval_epochs") {
      spec.eval_epochs = ParseNumber<int>(key, value);
    } else if (key == "finetune_epochs") {
      spec.finetune_epochs = ParseNumber<int>(key, value);
    } else if (key == "regions") {
      spec.regions = ParseNumber<std::size_t>(key, value);
    } else if (key == "verify_budget") {
      spec.verify_budget = ParseNumber<std::size_t>(key, value);
    } else if (key == "pretrain_epochs") {
      spec.pretrain_epochs = ParseNumber<int>(key, value);
    } else if (key == "learning_rate") {
      spec.learning_rate = ParseNumber<double>(key, value);
    } else if (key == "batch_size") {
      spec.batch_size = ParseNumber<std::size_t>(key, value);
    } else if (key == "small_hidden") {
      spec.small_hidden = ParseNumber<int>(key, value);
    } else if (key == "target_hidden") {
      spec.target_hidden.clear();
      for (const auto& v : SplitList(value)) spec.target_hidden.push_back(ParseNumber<int>(key, v));
    } else if (key == "input_dim") {
      spec.task.input_dim = ParseNumber<int>(key, value);
    } else if (key == "classes") {
      spec.task.classes = ParseNumber<int>(key, value);
    } else if (key == "mean_scale") {
      spec.task.mean_scale = ParseNumber<double>(key, value);
    } else if (key == "noise_scale") {
      spec.task.noise_scale = ParseNumber<double>(key, value);
    } else if (key == "shift_angle") {
      spec.task.shift_angle = ParseNumber<double>(key, value);
    } else if (key == "prior_skew") {
      spec.task.prior_skew = ParseNumber<double>(key, value);
    } else if (key == "label_noise") {
      spec.task.label_noise = ParseNumber<double>(key, value);
    } else if (key == "pretrain_n") {
      spec.task.pretrain_n = ParseNumber<std::size_t>(key, value);
    } else if (key == "train_n") {
      spec.task.train_n = ParseNumber<std::size_t>(key, value);
    } else if (key == "test_n") {
      spec.task.test_n = ParseNumber<std::size_t>(key, value);
    } else {
      throw Error(ErrorKind::kValidation, "unknown config key '" + key + "'");
    }
  }
  spec.Validate();
  return spec;
}

SweepSpec ReadSweepConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return ParseSweepConfig(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

SeedWorld BuildWorld(const SweepSpec& spec, std::uint64_t seed) {
  SeedWorld w;
  w.seed = seed;
  const toy::SyntheticTask task = toy::MakeTask(spec.task, seed);
  w.data = toy::GenerateTask(task);
  const toy::TaskData foreign_data = toy::GenerateTask(toy::ForeignCorpus(task, seed));

  const auto small_init = StreamSeed(seed, StreamPurpose::kModelInit, kSmallInit);
  const auto target_init = StreamSeed(seed, StreamPurpose::kModelInit, kTargetInit);
  w.small = toy::ToyModel::Create(SmallDims(spec), "family", small_init);
  w.target = toy::ToyModel::Create(TargetDims(spec), "family", target_init);
  // Same architecture and initialization as the small member; only the
  // pre-training corpus differs.
  w.foreign = toy::ToyModel::Create(SmallDims(spec), "foreign", small_init);

  toy::TrainOptions pre = Schedule(spec, seed, kPretrainSchedule);
  pre.epochs = spec.pretrain_epochs;
  toy::PretrainFamily(w.small, w.target, w.data.pretrain, pre);
  pre.all_layers = true;
  toy::Train(w.foreign, foreign_data.pretrain, pre);

  const toy::TrainOptions ft = Schedule(spec, seed, kScorerFinetune);
  w.small_tuned = toy::Finetune(w.small, w.data.train, spec.finetune_epochs, ft);
  w.foreign_tuned = toy::Finetune(w.foreign, w.data.train, spec.finetune_epochs, ft);
  w.target_tuned = toy::Finetune(w.target, w.data.train, spec.finetune_epochs, ft);

  w.speculative = EffortTable(w.small_tuned, w.data.train);
  w.foreign_speculative = EffortTable(w.foreign_tuned, w.data.train);
  w.target_base = EffortTable(w.target, w.data.train);
  w.target_effort = EffortTable(w.target_tuned, w.data.train);
  w.target_el2n = scoring::ModelScorer(scoring::ScoreKind::kEl2n, w.target_tuned)
                      .ScoreAll(w.data.train);
  return w;
}

CellResult RunCell(const SweepSpec& spec, const SeedWorld& world,
                   const std::string& method, double rate) {
  std::vector<std::string> ids;
  ids.reserve(world.data.train.size());
  for (const auto& s : world.data.train) ids.push_back(s.id);

  SelectionConfig cfg;
  cfg.prune_rate = rate;
  cfg.regions = spec.regions;
  cfg.verify_budget = spec.verify_budget;
  cfg.finetune_epochs = spec.finetune_epochs;
  cfg.seed = world.seed;
  cfg.topup = true;

  CellResult cell;
  if (method == "full") {
    cell.coreset = ids;
  } else if (method == "random") {
    cfg.mode = SelectionMode::kRandom;
    cell.coreset = BaselineSelect(ids, world.target_effort, cfg).selected_ids;
  } else if (method == "grand" || method == "el2n") {
    cfg.mode = SelectionMode::kTopK;
    const ScoreTable& t = method == "grand" ? world.target_effort : world.target_el2n;
    cell.coreset = BaselineSelect(ids, t, cfg).selected_ids;
  } else if (method == "ccs") {
    cfg.mode = SelectionMode::kCcsEqual;
    cell.coreset = BaselineSelect(ids, world.target_effort, cfg).selected_ids;
  } else if (method == "staff" || method == "staff-foreign") {
    cfg.mode = SelectionMode::kStaff;
    const scoring::ModelOracle oracle(
        scoring::ModelScorer(scoring::ScoreKind::kEffort, world.target), world.data.train);
    const CountingOracle counted(oracle);
    const ScoreTable& spec_scores =
        method == "staff" ? world.speculative : world.foreign_speculative;
    Coreset c = StaffSelect(ids, spec_scores, counted, cfg);
    cell.target_queries = counted.count();
    cell.coreset = std::move(c.selected_ids);
  } else if (method == "staff-no-verify") {
    cfg.mode = SelectionMode::kStaffNoVerify;
    cell.coreset = AblationSelect(ids, world.speculative, cfg).selected_ids;
  } else if (method == "staff-no-small") {
    cfg.mode = SelectionMode::kStaffNoSmallModel;
    cell.coreset = AblationSelect(ids, world.target_base, cfg).selected_ids;
  } else {
    throw Error(ErrorKind::kValidation, "unknown sweep method '" + method + "'");
  }

  // Coreset members are trained in dataset order.
  const std::set<std::string> chosen(cell.coreset.begin(), cell.coreset.end());
  toy::Dataset subset;
  subset.reserve(cell.coreset.size());
  for (const auto& s : world.data.train) {
    if (chosen.contains(s.id)) subset.push_back(s);
  }

  const toy::ToyModel tuned = toy::Finetune(world.target, subset, spec.eval_epochs,
                                            Schedule(spec, world.seed, kEvalFinetune));
  cell.eval = toy::Evaluate(tuned, world.data.test);
  return cell;
}

std::vector<io::MetricRow> RunSweep(const SweepSpec& spec) {
  spec.Validate();
  std::vector<io::MetricRow> rows;
  for (std::uint64_t seed : spec.seeds) {
    SeedWorld world;
    try {
      world = BuildWorld(spec, seed);
    } catch (const Error& e) {
      throw Error(e.kind(), "seed " + std::to_string(seed) + ": " + e.what());
    }
    AppendCell(rows, "full", 0.0, seed, RunCell(spec, world, "full", 0.0));
    for (const auto& method : spec.methods) {
      if (method == "full") continue;
      for (double rate : spec.prune_rates) {
        try {
          AppendCell(rows, method, rate, seed, RunCell(spec, world, method, rate));
        } catch (const Error& e) {
          throw Error(e.kind(), "cell (" + method + ", " + io::FormatDouble(rate) +
                                    ", " + std::to_string(seed) + "): " + e.what());
        }
      }
    }
  }
  io::SortMetricRows(rows);
  return rows;
}

std::vector<io::MetricRow> RunAblations(SweepSpec spec) {
  spec.methods = {"staff", "staff-no-verify", "staff-no-small", "staff-foreign"};
  return RunSweep(spec);
}

std::vector<OverheadRow> OverheadProbe(const SweepSpec& spec,
                                       const OverheadOptions& options) {
  using Clock = std::chrono::steady_clock;
  SweepSpec probe = spec;
  probe.task.train_n = options.n;
  probe.task.test_n = 0;
  probe.task.pretrain_n = std::min<std::size_t>(spec.task.pretrain_n, 2000);
  probe.pretrain_epochs = std::min(spec.pretrain_epochs, 2);

  const toy::SyntheticTask task = toy::MakeTask(probe.task, options.seed);
  const toy::TaskData data = toy::GenerateTask(task);
  toy::ToyModel small = toy::ToyModel::Create(
      SmallDims(probe), "family", StreamSeed(options.seed, StreamPurpose::kModelInit, kSmallInit));
  toy::ToyModel target = toy::ToyModel::Create(
      TargetDims(probe), "family", StreamSeed(options.seed, StreamPurpose::kModelInit, kTargetInit));
  toy::TrainOptions pre = Schedule(probe, options.seed, kPretrainSchedule);
  pre.epochs = probe.pretrain_epochs;
  toy::PretrainFamily(small, target, data.pretrain, pre);

  auto timed = [](auto&& fn) {
    const auto t0 = Clock::now();
    fn();
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };

  ScoreTable spec_scores;
  const double small_s = timed([&] { spec_scores = EffortTable(small, data.train); });
  ScoreTable target_scores;
  const double target_s = timed([&] { target_scores = EffortTable(target, data.train); });

  SelectionConfig cfg;
  cfg.prune_rate = 0.5;
  cfg.regions = options.regions;
  cfg.verify_budget = options.verify_budget;
  cfg.seed = options.seed;
  const scoring::ModelOracle oracle(scoring::ModelScorer(scoring::ScoreKind::kEffort, target),
                                    data.train);
  const CountingOracle counted(oracle);
  std::vector<std::string> ids = spec_scores.Ids();
  const auto t0 = Clock::now();
  (void)StaffSelect(ids, spec_scores, counted, cfg);
  const double verify_s = std::chrono::duration<double>(Clock::now() - t0).count();

  auto flops = [](const toy::ToyModel& m, std::size_t samples) {
    return 2.0 * 3.0 * static_cast<double>(m.ForwardMacs()) * static_cast<double>(samples);
  };
  std::vector<OverheadRow> rows = {
      {"small_full", data.train.size(), flops(small, data.train.size()), small_s, 0, 0},
      {"target_full", data.train.size(), flops(target, data.train.size()), target_s, 0, 0},
      {"target_verify", counted.count(), flops(target, counted.count()), verify_s, 0, 0},
  };
  for (auto& r : rows) {
    r.flop_ratio = rows[1].est_flops > 0 ? r.est_flops / rows[1].est_flops : 0.0;
    r.time_ratio = target_s > 0 ? r.seconds / target_s : 0.0;
  }
  return rows;
}

std::string FormatOverheadCsv(const std::vector<OverheadRow>& rows) {
  std::string out = "stage,queries,est_flops,seconds,flop_ratio,time_ratio\n";
  for (const auto& r : rows) {
    out += r.stage + "," + std::to_string(r.queries) + "," + io::FormatDouble(r.est_flops) +
           "," + io::FormatDouble(r.seconds) + "," + io::FormatDouble(r.flop_ratio) + "," +
           io::FormatDouble(r.time_ratio) + "\n";
  }
  return out;
}

double SpearmanCorrelation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kValidation, "correlation inputs differ in length");
  }
  if (a.size() < 2) return 0.0;
  const std::vector<double> ra = Ranks(a);
  const std::vector<double> rb = Ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

FamilySimilarity MeasureFamilySimilarity(const SweepSpec&, const SeedWorld& world) {
  const std::vector<double> target = Values(world.target_base);
  FamilySimilarity out;
  const std::vector<double> small = Values(world.speculative);
  const std::vector<double> foreign = Values(world.foreign_speculative);
  out.same_family = SpearmanCorrelation(small, target);
  out.foreign = SpearmanCorrelation(foreign, target);
  return out;
}

}  // namespace staff::harness
