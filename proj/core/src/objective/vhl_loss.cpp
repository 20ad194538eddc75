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


#include "vhl/objective/vhl_loss.hpp"

#include <algorithm>
#include <set>

#include "vhl/errors.hpp"

namespace vhl::objective {

VhlMode parse_mode(const std::string& name) {
  if (name == "full") return VhlMode::kFull;
  if (name == "naive") return VhlMode::kNaive;
  if (name == "vfa") return VhlMode::kVfa;
  if (name == "off") return VhlMode::kOff;
  throw InputError("unknown vhl mode '" + name + "' (expected full, naive, vfa or off)");
}

std::string to_string(VhlMode m) {
  switch (m) {
    case VhlMode::kFull:
      return "full";
    case VhlMode::kNaive:
      return "naive";
    case VhlMode::kVfa:
      return "vfa";
    case VhlMode::kOff:
      return "off";
  }
  return "?";
}

CeWeighting parse_ce_weighting(const std::string& name) {
  if (name == "joint_mean") return CeWeighting::kJointMean;
  if (name == "separate_mean") return CeWeighting::kSeparateMean;
  throw InputError("unknown ce_weighting '" + name + "' (expected joint_mean or separate_mean)");
}

std::string to_string(CeWeighting w) { return w == CeWeighting::kJointMean ? "joint_mean" : "separate_mean"; }

int VhlConfig::resolved_layer(const nn::MlpSpec& spec) const {
  const int layer = calibration_layer < 0 ? spec.hidden_layers() : calibration_layer;
  if (layer < 1 || layer > spec.hidden_layers()) {
    throw ConfigError("vhl.calibration_layer", "layer " + std::to_string(calibration_layer) + " is not a hidden layer (1.." +
                                                   std::to_string(spec.hidden_layers()) + ")");
  }
  return layer;
}

CalibrationResult calibration_penalty(const Matrix& natural_features, const Labels& natural_labels,
                                      const Matrix& virtual_features, const Labels& virtual_labels,
                                      double temperature, bool detach_virtual) {
  if (natural_features.cols() != virtual_features.cols() && virtual_features.rows() > 0) {
    throw ShapeError("natural and virtual features differ in width");
  }
  CalibrationResult out;
  out.natural_grad = Matrix::Zero(natural_features.rows(), natural_features.cols());
  out.virtual_grad = Matrix::Zero(virtual_features.rows(), natural_features.cols());

  const std::set<int> virtual_classes(virtual_labels.begin(), virtual_labels.end());
  out.active = std::any_of(natural_labels.begin(), natural_labels.end(),
                           [&](int y) { return virtual_classes.count(y) > 0; });
  if (!out.active) return out;

  const Eigen::Index n = natural_features.rows();
  const Eigen::Index v = virtual_features.rows();
  Matrix joint(n + v, natural_features.cols());
  joint.topRows(n) = natural_features;
  joint.bottomRows(v) = virtual_features;
  Labels labels = natural_labels;
  labels.insert(labels.end(), virtual_labels.begin(), virtual_labels.end());
  std::vector<bool> frozen(static_cast<std::size_t>(n + v), false);
  if (detach_virtual) std::fill(frozen.begin() + n, frozen.end(), true);

  const auto sc = nn::supcon_loss(joint, labels, temperature, frozen);
  out.value = sc.loss;
  out.natural_grad = sc.grad.topRows(n);
  out.virtual_grad = sc.grad.bottomRows(v);
  return out;
}

double alignment_distance(const Matrix& natural_features, const Labels& natural_labels,
                          const Matrix& virtual_features, const Labels& virtual_labels) {
  double total = 0.0;
  long pairs = 0;
  for (Eigen::Index i = 0; i < natural_features.rows(); ++i) {
    const RowVector zi = natural_features.row(i).normalized();
    for (Eigen::Index j = 0; j < virtual_features.rows(); ++j) {
      if (virtual_labels[static_cast<std::size_t>(j)] != natural_labels[static_cast<std::size_t>(i)]) continue;
      total += (zi - virtual_features.row(j).normalized()).norm();
      ++pairs;
    }
  }
  return pairs == 0 ? 0.0 : total / static_cast<double>(pairs);
}

namespace {

void check_virtual_labels(const Labels& virtual_y, int classes) {
  for (int y : virtual_y) {
    if (y < 0 || y >= classes) {
      throw ConfigError("vhl", "virtual label " + std::to_string(y) + " outside the " + std::to_string(classes) +
                                   " virtual classes of the model");
    }
  }
}

}  // namespace

StepResult vhl_step_loss(const nn::MlpSpec& spec, const nn::ModelParams& params, const Matrix& natural_x,
                         const Labels& natural_y, const Matrix& virtual_x, const Labels& virtual_y,
                         const VhlConfig& config) {
  if (!(config.lambda >= 0.0)) throw ConfigError("vhl.lambda", "must be non-negative");
  if (static_cast<Eigen::Index>(natural_y.size()) != natural_x.rows()) throw ShapeError("natural labels/rows mismatch");
  StepResult out;

  if (config.mode == VhlMode::kOff) {
    const auto trace = nn::forward(spec, params, natural_x);
    const auto ce = nn::cross_entropy(trace.logits, natural_y);
    out.loss = ce.loss;
    out.diagnostics.natural_ce = ce.loss;
    out.grad = nn::backward(spec, params, trace, ce.grad);
    return out;
  }

  if (virtual_x.rows() == 0) {
    throw ConfigError("vhl.mode", to_string(config.mode) + " mode needs a non-empty virtual batch");
  }
  if (static_cast<Eigen::Index>(virtual_y.size()) != virtual_x.rows()) throw ShapeError("virtual labels/rows mismatch");
  const int layer = config.resolved_layer(spec);

  if (config.mode == VhlMode::kVfa) {
    check_virtual_labels(virtual_y, spec.natural_classes);
    const auto trace = nn::forward(spec, params, natural_x);
    const auto ce = nn::cross_entropy(trace.logits, natural_y);
    const Matrix& feats = trace.features(layer);
    if (virtual_x.cols() != feats.cols()) {
      throw ConfigError("vhl.mode", "vfa features have width " + std::to_string(virtual_x.cols()) + ", layer " +
                                        std::to_string(layer) + " has width " + std::to_string(feats.cols()));
    }
    out.diagnostics.natural_ce = ce.loss;
    out.loss = ce.loss;
    std::vector<nn::FeatureGradient> inject;
    if (config.lambda > 0.0) {
      // Sampled features are constants whatever detach_virtual says.
      auto cal = calibration_penalty(feats, natural_y, virtual_x, virtual_y, config.temperature, true);
      out.diagnostics.penalty = cal.value;
      out.diagnostics.penalty_active = cal.active;
      out.loss += config.lambda * cal.value;
      if (cal.active) inject.push_back({layer, config.lambda * cal.natural_grad});
    }
    out.grad = nn::backward(spec, params, trace, ce.grad, inject);
    return out;
  }

  check_virtual_labels(virtual_y, spec.virtual_classes);
  // full / naive: one forward pass over natural rows followed by virtual rows.
  const Eigen::Index n = natural_x.rows();
  const Eigen::Index v = virtual_x.rows();
  Matrix x(n + v, natural_x.cols());
  x.topRows(n) = natural_x;
  x.bottomRows(v) = virtual_x;
  const auto trace = nn::forward(spec, params, x);

  Labels shifted(virtual_y.size());
  std::transform(virtual_y.begin(), virtual_y.end(), shifted.begin(), [&](int y) { return spec.natural_classes + y; });
  Matrix logits_grad(n + v, spec.output_dim());
  double ce_total = 0.0;
  {
    const auto nat = nn::cross_entropy(trace.logits.topRows(n), natural_y);
    const auto vir = nn::cross_entropy(trace.logits.bottomRows(v), shifted);
    out.diagnostics.natural_ce = nat.loss;
    out.diagnostics.virtual_ce = vir.loss;
    if (config.ce_weighting == CeWeighting::kSeparateMean) {
      ce_total = nat.loss + vir.loss;
      logits_grad.topRows(n) = nat.grad;
      logits_grad.bottomRows(v) = vir.grad;
    } else {
      Labels joint = natural_y;
      joint.insert(joint.end(), shifted.begin(), shifted.end());
      const auto all = nn::cross_entropy(trace.logits, joint);
      ce_total = all.loss;
      logits_grad = all.grad;
    }
  }
  out.loss = ce_total;

  std::vector<nn::FeatureGradient> inject;
  if (config.mode == VhlMode::kFull && config.lambda > 0.0) {
    const Matrix& feats = trace.features(layer);
    auto cal = calibration_penalty(feats.topRows(n), natural_y, feats.bottomRows(v), virtual_y, config.temperature,
                                   config.detach_virtual);
    out.diagnostics.penalty = cal.value;
    out.diagnostics.penalty_active = cal.active;
    out.loss += config.lambda * cal.value;
    if (cal.active) {
      Matrix g(n + v, feats.cols());
      g.topRows(n) = config.lambda * cal.natural_grad;
      g.bottomRows(v) = config.lambda * cal.virtual_grad;
      inject.push_back({layer, std::move(g)});
    }
  }
  out.grad = nn::backward(spec, params, trace, logits_grad, inject);
  return out;
}

}  // namespace vhl::objective
