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

#include "vhl/nn/mlp.hpp"

namespace vhl::nn {

struct SgdConfig {
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-4;
};

// Momentum buffer, one per trainable model. Starts at zero.
struct MomentumState {
  Vector buffer;
};

// buffer <- momentum * buffer + (grad + weight_decay * params)
// params <- params - lr * buffer
//
// lr = 0 is accepted and leaves params unchanged (the buffer still moves).
void sgd_momentum_step(ModelParams& params, const Gradient& grad, const SgdConfig& config, MomentumState& state);

}  // namespace vhl::nn
