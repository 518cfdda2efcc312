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

#include "staff/synthetic_task.h"

#include <cmath>
#include <numeric>

#include "staff/error.h"
#include "staff/random.h"

namespace staff::toy {
namespace {

enum StreamIndex : std::uint64_t {
  kPretrainDraws = 0,
  kTrainDraws = 1,
  kTestDraws = 2,
  kLabelNoise = 3,
  kTaskParams = 100,
  kForeignParams = 101,
};

std::string PaddedId(const char* prefix, std::size_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return prefix + digits;
}

Vector RandomVector(Rng& rng, int dim, double scale) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = scale * rng.Normal();
  return v;
}

Matrix RandomCovariance(Rng& rng, int dim, double scale) {
  Matrix cov = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) cov(i, i) = 0.5 + rng.UniformUnit();
  Vector v = RandomVector(rng, dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  cov += 0.5 * v * v.transpose();
  return scale * scale * cov;
}

GaussianMixture RandomMixture(Rng& rng, const TaskShape& shape) {
  GaussianMixture g;
  for (int c = 0; c < shape.classes; ++c) {
    g.means.push_back(RandomVector(rng, shape.input_dim, shape.mean_scale));
    g.covariances.push_back(
        RandomCovariance(rng, shape.input_dim, shape.noise_scale));
    g.priors.push_back(1.0 / shape.classes);
  }
  return g;
}

// Rotation by `angle` in every (2k, 2k+1) coordinate plane.
Matrix PairwiseRotation(int dim, double angle) {
  Matrix r = Matrix::Identity(dim, dim);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for (int k = 0; k + 1 < dim; k += 2) {
    r(k, k) = c;
    r(k, k + 1) = -s;
    r(k + 1, k) = s;
    r(k + 1, k + 1) = c;
  }
  return r;
}

struct Sampler {
  std::vector<Matrix> factors;
  std::vector<double> cumulative;
};

Sampler PrepareSampler(const GaussianMixture& g, int dim) {
  if (g.means.empty() || g.means.size() != g.covariances.size() ||
      g.means.size() != g.priors.size()) {
    throw Error(ErrorKind::kValidation, "inconsistent mixture parameters");
  }
  Sampler s;
  double total = 0.0;
  for (double p : g.priors) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorKind::kValidation, "mixture priors must be non-negative");
    }
    total += p;
    s.cumulative.push_back(total);
  }
  if (!(total > 0.0)) throw Error(ErrorKind::kValidation, "mixture priors sum to zero");
  for (double& c : s.cumulative) c /= total;

  for (std::size_t c = 0; c < g.covariances.size(); ++c) {
    const Matrix& cov = g.covariances[c];
    if (cov.rows() != dim || cov.cols() != dim || g.means[c].size() != dim) {
      throw Error(ErrorKind::kValidation, "mixture parameter has wrong dimension");
    }
    if (!cov.isApprox(cov.transpose())) {
      throw Error(ErrorKind::kValidation, "covariance is not symmetric");
    }
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::kValidation, "covariance is not positive definite");
    }
    s.factors.push_back(llt.matrixL());
  }
  return s;
}

Dataset Draw(const GaussianMixture& g, const Sampler& s, int dim, std::size_t n,
             const char* prefix, Rng& rng) {
  Dataset out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.UniformUnit();
    int label = 0;
    while (label + 1 < static_cast<int>(s.cumulative.size()) &&
           u >= s.cumulative[label]) {
      ++label;
    }
    Vector z = RandomVector(rng, dim, 1.0);
    out.push_back({PaddedId(prefix, i), g.means[label] + s.factors[label] * z,
                   label});
  }
  return out;
}

}  // namespace

SyntheticTask MakeTask(const TaskShape& shape, std::uint64_t seed) {
  if (shape.input_dim <= 0 || shape.classes < 2) {
    throw Error(ErrorKind::kValidation, "task needs input_dim > 0 and >= 2 classes");
  }
  Rng rng = Rng::ForStream(seed, StreamPurpose::kDataGeneration, kTaskParams);
  SyntheticTask task;
  task.input_dim = shape.input_dim;
  task.classes = shape.classes;
  task.label_noise = shape.label_noise;
  task.pretrain_n = shape.pretrain_n;
  task.train_n = shape.train_n;
  task.test_n = shape.test_n;
  task.seed = seed;
  task.pretrain = RandomMixture(rng, shape);

  const Matrix rot = PairwiseRotation(shape.input_dim, shape.shift_angle);
  task.downstream = task.pretrain;
  double total = 0.0;
  for (int c = 0; c < shape.classes; ++c) {
    task.downstream.means[c] = rot * task.pretrain.means[c];
    Matrix cov = rot * task.pretrain.covariances[c] * rot.transpose();
    task.downstream.covariances[c] = 0.5 * (cov + cov.transpose());
    task.downstream.priors[c] = task.pretrain.priors[c] *
                                std::exp(-shape.prior_skew * static_cast<double>(c));
    total += task.downstream.priors[c];
  }
  for (double& p : task.downstream.priors) p /= total;
  return task;
}

SyntheticTask ForeignCorpus(const SyntheticTask& task, std::uint64_t seed) {
  Rng rng = Rng::ForStream(seed, StreamPurpose::kDataGeneration, kForeignParams);
  SyntheticTask out = task;
  double mean_scale = 0.0;
  for (const auto& m : task.pretrain.means) mean_scale += m.squaredNorm();
  mean_scale = std::sqrt(mean_scale / (static_cast<double>(task.classes) *
                                       static_cast<double>(task.input_dim)));
  double noise = 0.0;
  for (const auto& c : task.pretrain.covariances) noise += c.trace();
  noise = std::sqrt(noise / (static_cast<double>(task.classes) *
                             static_cast<double>(task.input_dim)));
  for (int c = 0; c < task.classes; ++c) {
    out.pretrain.means[c] = RandomVector(rng, task.input_dim, mean_scale);
    out.pretrain.covariances[c] = RandomCovariance(rng, task.input_dim, noise);
  }
  return out;
}

TaskData GenerateTask(const SyntheticTask& task) {
  if (!(task.label_noise >= 0.0 && task.label_noise <= 1.0)) {
    throw Error(ErrorKind::kValidation, "label noise must lie in [0, 1]");
  }
  const int dim = task.input_dim;
  const Sampler pre = PrepareSampler(task.pretrain, dim);
  const Sampler down = PrepareSampler(task.downstream, dim);

  TaskData data;
  Rng pre_rng = Rng::ForStream(task.seed, StreamPurpose::kDataGeneration, kPretrainDraws);
  data.pretrain = Draw(task.pretrain, pre, dim, task.pretrain_n, "pre-", pre_rng);
  Rng train_rng = Rng::ForStream(task.seed, StreamPurpose::kDataGeneration, kTrainDraws);
  data.train = Draw(task.downstream, down, dim, task.train_n, "train-", train_rng);
  Rng test_rng = Rng::ForStream(task.seed, StreamPurpose::kDataGeneration, kTestDraws);
  data.test = Draw(task.downstream, down, dim, task.test_n, "test-", test_rng);

  if (task.label_noise > 0.0 && task.classes > 1) {
    Rng noise_rng = Rng::ForStream(task.seed, StreamPurpose::kDataGeneration, kLabelNoise);
    for (auto& s : data.train) {
      if (noise_rng.UniformUnit() < task.label_noise) {
        const auto shift = 1 + noise_rng.UniformBelow(
                                   static_cast<std::uint64_t>(task.classes - 1));
        s.label = static_cast<int>((static_cast<std::uint64_t>(s.label) + shift) %
                                   static_cast<std::uint64_t>(task.classes));
      }
    }
  }
  return data;
}

}  // namespace staff::toy
