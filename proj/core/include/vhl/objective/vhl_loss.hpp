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

#include <string>
#include <vector>

#include "vhl/common.hpp"
#include "vhl/nn/losses.hpp"
#include "vhl/nn/mlp.hpp"

namespace vhl::objective {

// full:  CE(natural) + CE(virtual) + lambda * calibration
// naive: CE(natural) + CE(virtual)
// vfa:   CE(natural) + lambda * calibration against features sampled directly
//        in the calibration layer's space
// off:   CE(natural)
enum class VhlMode { kFull, kNaive, kVfa, kOff };

// joint_mean: one mean over the concatenated natural + virtual rows.
// separate_mean: mean over natural rows plus mean over virtual rows.
enum class CeWeighting { kJointMean, kSeparateMean };

VhlMode parse_mode(const std::string& name);
std::string to_string(VhlMode m);
CeWeighting parse_ce_weighting(const std::string& name);
std::string to_string(CeWeighting w);

struct VhlConfig {
  double lambda = 1.0;
  int calibration_layer = -1;  // -1: the feature layer (last hidden layer)
  int virtual_batch = 128;
  VhlMode mode = VhlMode::kFull;
  bool detach_virtual = true;
  CeWeighting ce_weighting = CeWeighting::kJointMean;
  double temperature = nn::kDefaultTemperature;

  bool uses_virtual_data() const { return mode != VhlMode::kOff; }
  int resolved_layer(const nn::MlpSpec& spec) const;
  bool operator==(const VhlConfig&) const = default;
};

struct CalibrationResult {
  double value = 0.0;
  Matrix natural_grad;  // d value / d natural features
  Matrix virtual_grad;  // zero when virtual rows are detached
  bool active = false;  // false: no natural row shares a class with a virtual row
};

// Supervised-contrastive alignment of natural features to virtual features
// of the same class (virtual class j is aligned with natural class j). Rows
// of both sides form one contrastive batch; with `detach_virtual` the virtual
// rows are constants and only natural rows are anchors.
CalibrationResult calibration_penalty(const Matrix& natural_features, const Labels& natural_labels,
                                      const Matrix& virtual_features, const Labels& virtual_labels,
                                      double temperature, bool detach_virtual = true);

// Mean over natural rows of the distance between the row's normalised
// feature and each normalised virtual feature of the same class. Rows whose
// class has no virtual counterpart are ignored; returns 0 if none remain.
double alignment_distance(const Matrix& natural_features, const Labels& natural_labels,
                          const Matrix& virtual_features, const Labels& virtual_labels);

struct StepDiagnostics {
  double natural_ce = 0.0;
  double virtual_ce = 0.0;
  double penalty = 0.0;
  bool penalty_active = false;
};

struct StepResult {
  double loss = 0.0;
  nn::Gradient grad;
  StepDiagnostics diagnostics;
};

// Loss and parameter gradient of one local step. `virtual_x` holds network
// inputs in full/naive mode and calibration-layer features in vfa mode; it is
// ignored in off mode. Virtual labels are virtual class indices.
StepResult vhl_step_loss(const nn::MlpSpec& spec, const nn::ModelParams& params, const Matrix& natural_x,
                         const Labels& natural_y, const Matrix& virtual_x, const Labels& virtual_y,
                         const VhlConfig& config);

}  // namespace vhl::objective
