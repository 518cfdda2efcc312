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

#include "staff/toy_model.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>

#include "staff/error.h"
#include "staff/random.h"

namespace staff::toy {
namespace {

constexpr char kMagic[4] = {'S', 'T', 'F', 'M'};
constexpr std::uint32_t kVersion = 1;

struct Activations {
  std::vector<Vector> values;  // values[0] is the input, values[L] the logits
};

Activations RunForward(const std::vector<Layer>& layers, const Vector& x) {
  Activations acts;
  acts.values.reserve(layers.size() + 1);
  acts.values.push_back(x);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Vector z = layers[l].weights * acts.values.back();
    if (layers[l].bias.size() > 0) z += layers[l].bias;
    if (l + 1 < layers.size()) z = z.array().tanh().matrix();
    acts.values.push_back(std::move(z));
  }
  return acts;
}

// Loss and dL/d(output) for the configured head.
double HeadLoss(OutputHead head, const Vector& out, int label, Vector* grad) {
  if (head == OutputHead::kSquaredError) {
    Vector diff = out;
    diff[label] -= 1.0;
    if (grad != nullptr) *grad = 2.0 * diff;
    return diff.squaredNorm();
  }
  const double peak = out.maxCoeff();
  const double lse = peak + std::log((out.array() - peak).exp().sum());
  if (grad != nullptr) {
    *grad = (out.array() - lse).exp().matrix();
    (*grad)[label] -= 1.0;
  }
  return lse - out[label];
}

void PutU32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 4);
}

void PutF64(std::ostream& os, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 8);
}

void ReadExact(std::istream& is, char* dst, std::size_t n) {
  if (!is.read(dst, static_cast<std::streamsize>(n))) {
    throw Error(ErrorKind::kValidation, "truncated checkpoint");
  }
}

std::uint32_t GetU32(std::istream& is) {
  unsigned char b[4];
  ReadExact(is, reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint8_t GetU8(std::istream& is) {
  char c;
  ReadExact(is, &c, 1);
  return static_cast<std::uint8_t>(c);
}

double GetF64(std::istream& is) {
  unsigned char b[8];
  ReadExact(is, reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

void AccumulateStep(ToyModel& model, const std::vector<Vector>& grads,
                    double scale) {
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    if (grads[l].size() == 0) continue;
    Layer& layer = model.layer(l);
    const auto w = layer.weights.size();
    Eigen::Map<Vector>(layer.weights.data(), w) -= scale * grads[l].head(w);
    if (layer.bias.size() > 0) {
      layer.bias -= scale * grads[l].tail(layer.bias.size());
    }
  }
}

}  // namespace

ToyModel ToyModel::Create(std::vector<int> layer_dims, std::string family_tag,
                          std::uint64_t init_seed, OutputHead head, bool bias) {
  if (layer_dims.size() < 2) {
    throw Error(ErrorKind::kValidation, "a model needs at least two layer dims");
  }
  for (int d : layer_dims) {
    if (d <= 0) throw Error(ErrorKind::kValidation, "layer dims must be positive");
  }
  ToyModel m;
  m.dims_ = std::move(layer_dims);
  m.family_tag_ = std::move(family_tag);
  m.head_ = head;
  m.bias_ = bias;
  for (std::size_t l = 0; l + 1 < m.dims_.size(); ++l) {
    const int in = m.dims_[l];
    const int out = m.dims_[l + 1];
    Rng rng = Rng::ForStream(init_seed, StreamPurpose::kModelInit, l);
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Layer layer;
    layer.weights.resize(out, in);
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
      layer.weights.data()[i] = (2.0 * rng.UniformUnit() - 1.0) * limit;
    }
    layer.bias = bias ? Vector::Zero(out) : Vector();
    layer.learnable = false;
    m.layers_.push_back(std::move(layer));
  }
  m.layers_.back().learnable = true;
  return m;
}

std::vector<bool> ToyModel::learnable_mask() const {
  std::vector<bool> mask;
  for (const auto& l : layers_) mask.push_back(l.learnable);
  return mask;
}

void ToyModel::SetLearnableMask(const std::vector<bool>& mask) {
  if (mask.size() != layers_.size()) {
    throw Error(ErrorKind::kValidation, "learnable mask has wrong length");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) layers_[l].learnable = mask[l];
}

void ToyModel::SetLastLayerLearnable() {
  for (auto& l : layers_) l.learnable = false;
  layers_.back().learnable = true;
}

void ToyModel::SetAllLearnable() {
  for (auto& l : layers_) l.learnable = true;
}

std::size_t ToyModel::ParameterCount() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::size_t ToyModel::LearnableParameterCount() const {
  std::size_t n = 0;
  for (const auto& l : layers_) {
    if (l.learnable) n += l.weights.size() + l.bias.size();
  }
  return n;
}

std::size_t ToyModel::ForwardMacs() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size();
  return n;
}

void ToyModel::CheckInput(const Vector& x) const {
  if (x.size() != dims_.front()) {
    throw Error(ErrorKind::kValidation,
                "feature dimension " + std::to_string(x.size()) +
                    " does not match model input " +
                    std::to_string(dims_.front()));
  }
}

Vector ToyModel::Forward(const Vector& x) const {
  CheckInput(x);
  Vector out = RunForward(layers_, x).values.back();
  if (head_ == OutputHead::kSquaredError) return out;
  const double peak = out.maxCoeff();
  Vector e = (out.array() - peak).exp().matrix();
  return e / e.sum();
}

double ToyModel::Loss(const SampleRecord& sample) const {
  CheckInput(sample.features);
  if (sample.label < 0 || sample.label >= dims_.back()) {
    throw Error(ErrorKind::kValidation, "label out of range for " + sample.id);
  }
  return HeadLoss(head_, RunForward(layers_, sample.features).values.back(),
                  sample.label, nullptr);
}

LossGradient ToyModel::LossAndGradient(const SampleRecord& sample) const {
  CheckInput(sample.features);
  if (sample.label < 0 || sample.label >= dims_.back()) {
    throw Error(ErrorKind::kValidation, "label out of range for " + sample.id);
  }
  const Activations acts = RunForward(layers_, sample.features);

  LossGradient out;
  Vector delta;
  out.loss = HeadLoss(head_, acts.values.back(), sample.label, &delta);

  std::size_t lowest = layers_.size();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].learnable) {
      lowest = l;
      break;
    }
  }
  out.gradient.resize(static_cast<Eigen::Index>(LearnableParameterCount()));
  if (lowest == layers_.size()) return out;

  // Walk down from the head, writing each learnable block at its offset.
  std::vector<std::size_t> offsets(layers_.size(), 0);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    offsets[l] = offset;
    if (layers_[l].learnable) {
      offset += layers_[l].weights.size() + layers_[l].bias.size();
    }
  }
  for (std::size_t l = layers_.size(); l-- > lowest;) {
    const Layer& layer = layers_[l];
    const Vector& input = acts.values[l];
    if (layer.learnable) {
      const auto rows = layer.weights.rows();
      const auto cols = layer.weights.cols();
      Eigen::Map<Matrix> gw(out.gradient.data() + offsets[l], rows, cols);
      gw.noalias() = delta * input.transpose();
      if (layer.bias.size() > 0) {
        out.gradient.segment(static_cast<Eigen::Index>(offsets[l]) + rows * cols,
                             rows) = delta;
      }
    }
    if (l > lowest) {
      Vector back = layer.weights.transpose() * delta;
      delta = (back.array() * (1.0 - input.array().square())).matrix();
    }
  }
  return out;
}

int ToyModel::Predict(const Vector& x) const {
  Eigen::Index best;
  Forward(x).maxCoeff(&best);
  return static_cast<int>(best);
}

Vector ToyModel::LearnableParameters() const {
  Vector flat(static_cast<Eigen::Index>(LearnableParameterCount()));
  Eigen::Index at = 0;
  for (const auto& l : layers_) {
    if (!l.learnable) continue;
    flat.segment(at, l.weights.size()) =
        Eigen::Map<const Vector>(l.weights.data(), l.weights.size());
    at += l.weights.size();
    flat.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  }
  return flat;
}

void ToyModel::SetLearnableParameters(const Vector& flat) {
  if (flat.size() != static_cast<Eigen::Index>(LearnableParameterCount())) {
    throw Error(ErrorKind::kValidation, "parameter vector has wrong length");
  }
  Eigen::Index at = 0;
  for (auto& l : layers_) {
    if (!l.learnable) continue;
    Eigen::Map<Vector>(l.weights.data(), l.weights.size()) =
        flat.segment(at, l.weights.size());
    at += l.weights.size();
    l.bias = flat.segment(at, l.bias.size());
    at += l.bias.size();
  }
}

void ToyModel::Save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw Error(ErrorKind::kIo, "cannot write checkpoint " + path.string());
  }
  os.write(kMagic, 4);
  PutU32(os, kVersion);
  PutU32(os, static_cast<std::uint32_t>(dims_.size()));
  for (int d : dims_) PutU32(os, static_cast<std::uint32_t>(d));
  for (const auto& l : layers_) os.put(l.learnable ? 1 : 0);
  os.put(static_cast<char>(head_));
  os.put(bias_ ? 1 : 0);
  PutU32(os, static_cast<std::uint32_t>(family_tag_.size()));
  os.write(family_tag_.data(), static_cast<std::streamsize>(family_tag_.size()));
  for (const auto& l : layers_) {
    for (Eigen::Index i = 0; i < l.weights.size(); ++i) PutF64(os, l.weights.data()[i]);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) PutF64(os, l.bias[i]);
  }
  if (!os) {
    throw Error(ErrorKind::kIo, "failed writing checkpoint " + path.string());
  }
}

ToyModel ToyModel::Load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::kIo, "cannot open checkpoint " + path.string());
  char magic[4];
  ReadExact(is, magic, 4);
  if (!std::equal(magic, magic + 4, kMagic)) {
    throw Error(ErrorKind::kValidation, "not a model checkpoint: " + path.string());
  }
  if (GetU32(is) != kVersion) {
    throw Error(ErrorKind::kValidation, "unsupported checkpoint version");
  }
  const std::uint32_t ndims = GetU32(is);
  if (ndims < 2 || ndims > 64) {
    throw Error(ErrorKind::kValidation, "corrupt checkpoint header");
  }
  ToyModel m;
  for (std::uint32_t i = 0; i < ndims; ++i) {
    const std::uint32_t d = GetU32(is);
    if (d == 0 || d > (1u << 20)) {
      throw Error(ErrorKind::kValidation, "corrupt checkpoint header");
    }
    m.dims_.push_back(static_cast<int>(d));
  }
  std::vector<bool> mask;
  for (std::uint32_t i = 0; i + 1 < ndims; ++i) mask.push_back(GetU8(is) != 0);
  const std::uint8_t head = GetU8(is);
  if (head > 1) throw Error(ErrorKind::kValidation, "unknown output head");
  m.head_ = static_cast<OutputHead>(head);
  m.bias_ = GetU8(is) != 0;
  const std::uint32_t tag_len = GetU32(is);
  if (tag_len > 4096) throw Error(ErrorKind::kValidation, "corrupt checkpoint header");
  m.family_tag_.resize(tag_len);
  ReadExact(is, m.family_tag_.data(), tag_len);
  for (std::size_t l = 0; l + 1 < m.dims_.size(); ++l) {
    Layer layer;
    layer.learnable = mask[l];
    layer.weights.resize(m.dims_[l + 1], m.dims_[l]);
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
      layer.weights.data()[i] = GetF64(is);
    }
    layer.bias = m.bias_ ? Vector(m.dims_[l + 1]) : Vector();
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = GetF64(is);
    m.layers_.push_back(std::move(layer));
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::kValidation, "trailing bytes in checkpoint");
  }
  return m;
}

bool operator==(const ToyModel& a, const ToyModel& b) {
  if (a.dims_ != b.dims_ || a.family_tag_ != b.family_tag_ ||
      a.head_ != b.head_ || a.bias_ != b.bias_) {
    return false;
  }
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    const Layer& x = a.layers_[l];
    const Layer& y = b.layers_[l];
    if (x.learnable != y.learnable || x.weights != y.weights || x.bias != y.bias) {
      return false;
    }
  }
  return true;
}

void Train(ToyModel& model, std::span<const SampleRecord> data,
           const TrainOptions& options) {
  if (options.epochs <= 0 || data.empty()) return;
  if (options.batch_size == 0) {
    throw Error(ErrorKind::kValidation, "batch size must be positive");
  }
  // Restores the caller's learnable mask on every exit path.
  struct MaskGuard {
    ToyModel& model;
    std::vector<bool> mask;
    ~MaskGuard() { model.SetLearnableMask(mask); }
  } guard{model, model.learnable_mask()};
  if (options.all_layers) model.SetAllLearnable();

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Vector> grads(model.num_layers());

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    Rng rng = Rng::ForStream(options.seed, StreamPurpose::kTraining,
                             static_cast<std::uint64_t>(epoch));
    rng.Shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t stop = std::min(order.size(), start + options.batch_size);
      Vector total = Vector::Zero(
          static_cast<Eigen::Index>(model.LearnableParameterCount()));
      for (std::size_t i = start; i < stop; ++i) {
        LossGradient lg = model.LossAndGradient(data[order[i]]);
        if (!std::isfinite(lg.loss)) throw Error(ErrorKind::kNumerical, "training diverged");
        total += lg.gradient;
      }
      // Split the flat gradient back into per-layer blocks.
      Eigen::Index at = 0;
      for (std::size_t l = 0; l < model.num_layers(); ++l) {
        const Layer& layer = model.layer(l);
        if (!layer.learnable) {
          grads[l].resize(0);
          continue;
        }
        const auto n = layer.weights.size() + layer.bias.size();
        grads[l] = total.segment(at, n);
        at += n;
      }
      AccumulateStep(model, grads,
                     options.learning_rate / static_cast<double>(stop - start));
    }
  }
  if (!model.LearnableParameters().allFinite()) {
    throw Error(ErrorKind::kNumerical, "training diverged");
  }
}

void PretrainFamily(ToyModel& small, ToyModel& target,
                    std::span<const SampleRecord> corpus,
                    const TrainOptions& options) {
  TrainOptions opts = options;
  opts.all_layers = true;
  Train(small, corpus, opts);
  Train(target, corpus, opts);
}

ToyModel Finetune(const ToyModel& model, std::span<const SampleRecord> data,
                  int epochs, TrainOptions options) {
  ToyModel out = model;
  options.epochs = epochs;
  options.all_layers = false;
  Train(out, data, options);
  return out;
}

EvalResult Evaluate(const ToyModel& model, std::span<const SampleRecord> data) {
  EvalResult r;
  if (data.empty()) return r;
  std::size_t correct = 0;
  double loss = 0.0;
  for (const auto& s : data) {
    if (model.Predict(s.features) == s.label) ++correct;
    loss += model.Loss(s);
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  r.mean_loss = loss / static_cast<double>(data.size());
  return r;
}

}  // namespace staff::toy
