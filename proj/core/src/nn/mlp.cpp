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


#include "vhl/nn/mlp.hpp"

#include <cmath>
#include <random>

namespace vhl::nn {

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw InputError("unknown activation '" + name + "' (expected relu or tanh)");
}

std::string to_string(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }

void MlpSpec::validate() const {
  if (layer_widths.size() < 2) throw InputError("layer_widths needs at least input and feature widths");
  for (std::size_t i = 0; i < layer_widths.size(); ++i) {
    if (layer_widths[i] <= 0) throw InputError("layer width " + std::to_string(i) + " must be positive");
  }
  if (natural_classes <= 0) throw InputError("natural_classes must be positive");
  if (virtual_classes < 0) throw InputError("virtual_classes must be non-negative");
}

ParamLayout::ParamLayout(const MlpSpec& spec) {
  spec.validate();
  std::size_t offset = 0;
  auto add = [&](int rows, int cols) {
    Block b;
    b.rows = rows;
    b.cols = cols;
    b.weight_offset = offset;
    offset += static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    b.bias_offset = offset;
    offset += static_cast<std::size_t>(rows);
    blocks_.push_back(b);
  };
  for (int l = 0; l < spec.hidden_layers(); ++l) add(spec.layer_widths[l + 1], spec.layer_widths[l]);
  add(spec.output_dim(), spec.feature_dim());
  size_ = offset;
}

bool ParamLayout::same_blocks(const ParamLayout& o) const {
  if (blocks_.size() != o.blocks_.size()) return false;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].rows != o.blocks_[i].rows || blocks_[i].cols != o.blocks_[i].cols) return false;
  }
  return true;
}

ModelParams init_params(const MlpSpec& spec, std::uint64_t seed) {
  ModelParams p = ModelParams::zeros(spec);
  Rng rng(seed);
  for (int l = 0; l < p.layers(); ++l) {
    auto w = p.weight(l);
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = u(rng);
    auto b = p.bias(l);
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = u(rng);
  }
  return p;
}

namespace {

void check_params(const MlpSpec& spec, const ModelParams& params) {
  const ParamLayout expected(spec);
  if (!params.layout()) throw ShapeError("parameters are uninitialised");
  const auto& have = params.layout()->blocks();
  const auto& want = expected.blocks();
  for (std::size_t l = 0; l < want.size(); ++l) {
    if (l >= have.size()) throw ShapeError("layer " + std::to_string(l) + ": missing from parameters");
    if (have[l].rows != want[l].rows || have[l].cols != want[l].cols) {
      throw ShapeError("layer " + std::to_string(l) + ": parameters are " + std::to_string(have[l].rows) + "x" +
                       std::to_string(have[l].cols) + ", spec needs " + std::to_string(want[l].rows) + "x" +
                       std::to_string(want[l].cols));
    }
  }
  if (have.size() != want.size()) throw ShapeError("layer " + std::to_string(want.size()) + ": unexpected extra layer");
}

void apply_activation(Activation a, Matrix& z) {
  if (a == Activation::kRelu) {
    z = z.cwiseMax(0.0);
  } else {
    z = z.array().tanh().matrix();
  }
}

// d act / d z expressed through the activation output h.
void scale_by_derivative(Activation a, const Matrix& h, Matrix& grad) {
  if (a == Activation::kRelu) {
    grad = (h.array() > 0.0).select(grad, 0.0);
  } else {
    grad.array() *= (1.0 - h.array().square());
  }
}

}  // namespace

ForwardTrace forward(const MlpSpec& spec, const ModelParams& params, const Matrix& batch) {
  check_params(spec, params);
  if (batch.cols() != spec.input_dim()) {
    throw ShapeError("layer 0: batch has " + std::to_string(batch.cols()) + " columns, input dim is " +
                     std::to_string(spec.input_dim()));
  }
  ForwardTrace trace;
  trace.activations.reserve(static_cast<std::size_t>(spec.hidden_layers()) + 1);
  trace.activations.push_back(batch);
  for (int l = 0; l < spec.hidden_layers(); ++l) {
    Matrix z = trace.activations.back() * params.weight(l).transpose();
    z.rowwise() += params.bias(l).transpose();
    apply_activation(spec.activation, z);
    trace.activations.push_back(std::move(z));
  }
  const int head = spec.hidden_layers();
  trace.logits = trace.activations.back() * params.weight(head).transpose();
  trace.logits.rowwise() += params.bias(head).transpose();
  return trace;
}

Gradient backward(const MlpSpec& spec, const ModelParams& params, const ForwardTrace& trace,
                  const Matrix& logits_grad, const std::vector<FeatureGradient>& feature_grads) {
  check_params(spec, params);
  const int hidden = spec.hidden_layers();
  if (static_cast<int>(trace.activations.size()) != hidden + 1) throw ShapeError("trace does not match the layer widths");
  const Eigen::Index n = trace.activations.front().rows();
  const bool has_logits = logits_grad.size() > 0;
  if (has_logits && (logits_grad.rows() != n || logits_grad.cols() != spec.output_dim())) {
    throw ShapeError("logits gradient is " + std::to_string(logits_grad.rows()) + "x" +
                     std::to_string(logits_grad.cols()) + ", expected " + std::to_string(n) + "x" +
                     std::to_string(spec.output_dim()));
  }
  for (const auto& fg : feature_grads) {
    if (fg.layer < 1 || fg.layer > hidden) throw ShapeError("feature gradient targets invalid layer " + std::to_string(fg.layer));
    const auto& h = trace.activations[static_cast<std::size_t>(fg.layer)];
    if (fg.grad.rows() != h.rows() || fg.grad.cols() != h.cols()) {
      throw ShapeError("layer " + std::to_string(fg.layer) + ": feature gradient shape does not match activations");
    }
  }

  Gradient g(params.layout());
  Matrix dh = Matrix::Zero(n, spec.feature_dim());
  if (has_logits) {
    g.weight(hidden).noalias() = logits_grad.transpose() * trace.activations[static_cast<std::size_t>(hidden)];
    g.bias(hidden) = logits_grad.colwise().sum().transpose();
    dh.noalias() = logits_grad * params.weight(hidden);
  }
  auto inject = [&](int layer) {
    for (const auto& fg : feature_grads)
      if (fg.layer == layer) dh += fg.grad;
  };
  inject(hidden);
  for (int l = hidden; l >= 1; --l) {
    const auto& h = trace.activations[static_cast<std::size_t>(l)];
    scale_by_derivative(spec.activation, h, dh);
    const auto& input = trace.activations[static_cast<std::size_t>(l - 1)];
    g.weight(l - 1).noalias() = dh.transpose() * input;
    g.bias(l - 1) = dh.colwise().sum().transpose();
    if (l > 1) {
      Matrix next = dh * params.weight(l - 1);
      dh = std::move(next);
      inject(l - 1);
    }
  }
  return g;
}

std::vector<int> predict(const Matrix& logits, int classes) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index best = 0;
    logits.row(r).head(classes).maxCoeff(&best);
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

}  // namespace vhl::nn
