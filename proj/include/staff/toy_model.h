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

// Small feed-forward classifiers used as a stand-in model family.
//
// Hidden layers use tanh. The output head is either softmax with
// cross-entropy (the default) or an identity output with squared error
// against the one-hot label. Each layer carries a learnable flag; the set of
// learnable layers is the parameter subset that per-sample gradients and
// fine-tuning operate on.
//
// All arithmetic is IEEE double with no fast-math and single-threaded Eigen,
// so identical seeds produce bitwise-identical parameters on one build.

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace staff::toy {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct SampleRecord {
  std::string id;
  Vector features;
  int label = 0;
};

using Dataset = std::vector<SampleRecord>;

enum class OutputHead : std::uint8_t {
  kSoftmaxCrossEntropy = 0,
  kSquaredError = 1,
};

struct Layer {
  Matrix weights;  // out x in
  Vector bias;     // out; zero-length when the model has no biases
  bool learnable = true;
};

struct LossGradient {
  double loss = 0.0;
  // Learnable layers in order; per layer the weights row-major, then bias.
  Vector gradient;
};

class ToyModel {
 public:
  /// Glorot-uniform weights and zero biases drawn from `init_seed`. The last
  /// layer alone is learnable.
  static ToyModel Create(std::vector<int> layer_dims, std::string family_tag,
                         std::uint64_t init_seed,
                         OutputHead head = OutputHead::kSoftmaxCrossEntropy,
                         bool bias = true);

  const std::vector<int>& layer_dims() const { return dims_; }
  std::size_t num_layers() const { return layers_.size(); }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  const std::string& family_tag() const { return family_tag_; }
  OutputHead head() const { return head_; }
  bool has_bias() const { return bias_; }

  const Layer& layer(std::size_t i) const { return layers_[i]; }
  Layer& layer(std::size_t i) { return layers_[i]; }

  std::vector<bool> learnable_mask() const;
  void SetLearnableMask(const std::vector<bool>& mask);
  void SetLastLayerLearnable();
  void SetAllLearnable();

  std::size_t ParameterCount() const;
  std::size_t LearnableParameterCount() const;
  /// Multiply-adds of one forward pass.
  std::size_t ForwardMacs() const;

  /// Class probabilities (softmax head) or raw outputs (squared head).
  Vector Forward(const Vector& x) const;
  double Loss(const SampleRecord& sample) const;
  /// Loss and its gradient restricted to the learnable layers.
  LossGradient LossAndGradient(const SampleRecord& sample) const;
  int Predict(const Vector& x) const;

  Vector LearnableParameters() const;
  void SetLearnableParameters(const Vector& flat);

  void Save(const std::filesystem::path& path) const;
  static ToyModel Load(const std::filesystem::path& path);

  friend bool operator==(const ToyModel& a, const ToyModel& b);

 private:
  void CheckInput(const Vector& x) const;

  std::vector<int> dims_;
  std::vector<Layer> layers_;
  std::string family_tag_;
  OutputHead head_ = OutputHead::kSoftmaxCrossEntropy;
  bool bias_ = true;
};

struct TrainOptions {
  int epochs = 1;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  // Update every layer (pre-training) instead of only the learnable ones.
  bool all_layers = false;
};

/// Mini-batch SGD with a fixed step. Throws staff::Error(kNumerical) when the
/// loss stops being finite.
void Train(ToyModel& model, std::span<const SampleRecord> data,
           const TrainOptions& options);

/// Trains both members on the same corpus with the same shuffle schedule.
void PretrainFamily(ToyModel& small, ToyModel& target,
                    std::span<const SampleRecord> corpus,
                    const TrainOptions& options);

/// T epochs over the learnable layers only.
ToyModel Finetune(const ToyModel& model, std::span<const SampleRecord> data,
                  int epochs, TrainOptions options);

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

EvalResult Evaluate(const ToyModel& model, std::span<const SampleRecord> data);

}  // namespace staff::toy
