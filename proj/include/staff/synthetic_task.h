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
#include <cstdint>
#include <string>
#include <vector>

#include "staff/toy_model.h"

namespace staff::toy {

struct GaussianMixture {
  std::vector<Vector> means;        // one per class
  std::vector<Matrix> covariances;  // one per class, symmetric positive definite
  std::vector<double> priors;       // one per class, sums to 1
};

/// Gaussian-mixture classification task with a pre-training distribution and
/// a shifted downstream distribution.
struct SyntheticTask {
  int input_dim = 32;
  int classes = 4;
  GaussianMixture pretrain;
  GaussianMixture downstream;
  // Fraction of downstream training labels replaced by a uniformly drawn
  // different class. Test labels stay clean.
  double label_noise = 0.0;
  std::size_t pretrain_n = 0;
  std::size_t train_n = 0;
  std::size_t test_n = 0;
  std::uint64_t seed = 0;
};

struct TaskShape {
  int input_dim = 32;
  int classes = 4;
  double mean_scale = 0.35;  // stddev of each class-mean coordinate
  double noise_scale = 1.0;  // isotropic base stddev of each cluster
  // Downstream shift: every consecutive coordinate pair of the class means is
  // rotated by this angle, and priors are re-weighted geometrically.
  double shift_angle = 0.5;
  double prior_skew = 0.5;
  double label_noise = 0.0;
  std::size_t pretrain_n = 4000;
  std::size_t train_n = 2000;
  std::size_t test_n = 2000;
};

/// Draws cluster parameters for a task from `seed`. Clusters get random
/// anisotropic diagonal-plus-rank-one covariances.
SyntheticTask MakeTask(const TaskShape& shape, std::uint64_t seed);

/// A task whose pre-training mixture is drawn independently of `task` (same
/// dims, different means/covariances), with the downstream side unchanged.
/// Models pre-trained on it form a foreign family.
SyntheticTask ForeignCorpus(const SyntheticTask& task, std::uint64_t seed);

struct TaskData {
  Dataset pretrain;
  Dataset train;
  Dataset test;
};

/// I.i.d. draws from the configured mixtures, deterministic under the task
/// seed. Ids are prefixed "pre-", "train-", "test-". Throws
/// staff::Error(kValidation) for a covariance that is not positive definite.
TaskData GenerateTask(const SyntheticTask& task);

}  // namespace staff::toy
