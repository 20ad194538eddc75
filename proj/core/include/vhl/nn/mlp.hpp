/*
 * Copyright 2026 The vhlsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vhl/common.hpp"
#include "vhl/errors.hpp"

namespace vhl::nn {

enum class Activation { kRelu, kTanh };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

// Dense network: `layer_widths` = {input, hidden..., feature}. Every
// hidden layer applies `activation`; a linear classifier head maps the
// feature layer to natural_classes + virtual_classes logits. Virtual class j
// is logit natural_classes + j.
struct MlpSpec {
  std::vector<int> layer_widths;
  int natural_classes = 10;
  int virtual_classes = 0;
  Activation activation = Activation::kRelu;

  int input_dim() const { return layer_widths.front(); }
  int feature_dim() const { return layer_widths.back(); }
  int output_dim() const { return natural_classes + virtual_classes; }
  // Number of hidden (activated) layers; feature layer index is this value.
  int hidden_layers() const { return static_cast<int>(layer_widths.size()) - 1; }
  // Hidden layers plus the head.
  int linear_layers() const { return hidden_layers() + 1; }

  void validate() const;
  bool operator==(const MlpSpec&) const = default;
};

// Offsets of every weight matrix (out x in, row-major) and bias vector in a
// flat parameter vector.
class ParamLayout {
 public:
  struct Block {
    int rows = 0;  // fan-out
    int cols = 0;  // fan-in
    std::size_t weight_offset = 0;
    std::size_t bias_offset = 0;
  };

  explicit ParamLayout(const MlpSpec& spec);

  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t size() const { return size_; }
  bool operator==(const ParamLayout& o) const { return size_ == o.size_ && same_blocks(o); }

 private:
  bool same_blocks(const ParamLayout& o) const;

  std::vector<Block> blocks_;
  std::size_t size_ = 0;
};

// Flat parameter-shaped storage. `Tag` separates model parameters from
// gradients at compile time while sharing the arithmetic.
template <typename Tag>
class ParamTensor {
 public:
  using WeightMap = Eigen::Map<Matrix>;
  using ConstWeightMap = Eigen::Map<const Matrix>;

  ParamTensor() = default;
  explicit ParamTensor(std::shared_ptr<const ParamLayout> layout)
      : layout_(std::move(layout)), values_(Vector::Zero(static_cast<Eigen::Index>(layout_->size()))) {}
  ParamTensor(std::shared_ptr<const ParamLayout> layout, Vector values);

  static ParamTensor zeros(const MlpSpec& spec) { return ParamTensor(std::make_shared<const ParamLayout>(spec)); }
  static ParamTensor unflatten(const MlpSpec& spec, std::span<const double> flat);

  std::vector<double> flatten() const { return {values_.data(), values_.data() + values_.size()}; }

  const std::shared_ptr<const ParamLayout>& layout() const { return layout_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  int layers() const { return static_cast<int>(layout_->blocks().size()); }

  WeightMap weight(int layer) {
    const auto& b = layout_->blocks()[static_cast<std::size_t>(layer)];
    return {values_.data() + b.weight_offset, b.rows, b.cols};
  }
  ConstWeightMap weight(int layer) const {
    const auto& b = layout_->blocks()[static_cast<std::size_t>(layer)];
    return {values_.data() + b.weight_offset, b.rows, b.cols};
  }
  Eigen::Map<Vector> bias(int layer) {
    const auto& b = layout_->blocks()[static_cast<std::size_t>(layer)];
    return {values_.data() + b.bias_offset, b.rows};
  }
  Eigen::Map<const Vector> bias(int layer) const {
    const auto& b = layout_->blocks()[static_cast<std::size_t>(layer)];
    return {values_.data() + b.bias_offset, b.rows};
  }

  Vector& values() { return values_; }
  const Vector& values() const { return values_; }

  bool conforms_to(const ParamLayout& other) const { return layout_ && *layout_ == other; }
  bool all_finite() const { return values_.allFinite(); }

  ParamTensor& operator+=(const ParamTensor& o) {
    check_same(o);
    values_ += o.values_;
    return *this;
  }
  ParamTensor& operator-=(const ParamTensor& o) {
    check_same(o);
    values_ -= o.values_;
    return *this;
  }
  ParamTensor& operator*=(double s) {
    values_ *= s;
    return *this;
  }
  friend ParamTensor operator+(ParamTensor a, const ParamTensor& b) { return a += b; }
  friend ParamTensor operator-(ParamTensor a, const ParamTensor& b) { return a -= b; }
  friend ParamTensor operator*(double s, ParamTensor a) { return a *= s; }

  // Same storage, different tag.
  template <typename OtherTag>
  ParamTensor<OtherTag> as() const {
    return ParamTensor<OtherTag>(layout_, values_);
  }

 private:
  void check_same(const ParamTensor& o) const;

  std::shared_ptr<const ParamLayout> layout_;
  Vector values_;
};

struct ModelTag {};
struct GradientTag {};
using ModelParams = ParamTensor<ModelTag>;
using Gradient = ParamTensor<GradientTag>;

// Seeded initialisation: weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
ModelParams init_params(const MlpSpec& spec, std::uint64_t seed);

// activations[0] is the input batch; activations[l] for l = 1..hidden_layers()
// is the post-activation output of hidden layer l. activations.back() is the
// feature layer fed to the classifier head.
struct ForwardTrace {
  std::vector<Matrix> activations;
  Matrix logits;

  Eigen::Index batch_size() const { return logits.rows(); }
  const Matrix& features(int layer) const { return activations.at(static_cast<std::size_t>(layer)); }
};

ForwardTrace forward(const MlpSpec& spec, const ModelParams& params, const Matrix& batch);

// Gradient injected directly at one hidden layer's post-activation output.
struct FeatureGradient {
  int layer = 0;
  Matrix grad;
};

// Reverse-mode pass. `logits_grad` may be empty (0x0) when only a feature
// gradient is supplied. A feature gradient at layer l adds to dL/dH_l and so
// reaches layers 1..l only.
Gradient backward(const MlpSpec& spec, const ModelParams& params, const ForwardTrace& trace,
                  const Matrix& logits_grad, const std::vector<FeatureGradient>& feature_grads = {});

// Row-wise argmax over the first `classes` columns.
std::vector<int> predict(const Matrix& logits, int classes);

template <typename Tag>
ParamTensor<Tag>::ParamTensor(std::shared_ptr<const ParamLayout> layout, Vector values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != layout_->size()) {
    throw ShapeError("parameter vector has " + std::to_string(values_.size()) + " entries, layout needs " +
                     std::to_string(layout_->size()));
  }
}

template <typename Tag>
ParamTensor<Tag> ParamTensor<Tag>::unflatten(const MlpSpec& spec, std::span<const double> flat) {
  auto layout = std::make_shared<const ParamLayout>(spec);
  Vector v = Eigen::Map<const Vector>(flat.data(), static_cast<Eigen::Index>(flat.size()));
  return ParamTensor(std::move(layout), std::move(v));
}

template <typename Tag>
void ParamTensor<Tag>::check_same(const ParamTensor& o) const {
  if (values_.size() != o.values_.size() || !(layout_ == o.layout_ || *layout_ == *o.layout_)) {
    throw ShapeError("parameter tensors have different layouts");
  }
}

}  // namespace vhl::nn
