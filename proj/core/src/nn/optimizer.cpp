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


#include "vhl/nn/optimizer.hpp"

#include <cmath>
#include <string>

namespace vhl::nn {

void sgd_momentum_step(ModelParams& params, const Gradient& grad, const SgdConfig& config, MomentumState& state) {
  if (!(config.lr >= 0.0)) throw InputError("learning rate must be non-negative");
  if (!(config.momentum >= 0.0 && config.momentum < 1.0)) throw InputError("momentum must lie in [0, 1)");
  if (!(config.weight_decay >= 0.0)) throw InputError("weight decay must be non-negative");
  if (grad.size() != params.size()) throw ShapeError("gradient does not match parameters");
  const Vector& g = grad.values();
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g(i))) throw NumericError("non-finite gradient at parameter " + std::to_string(i));
  }
  if (state.buffer.size() == 0) state.buffer = Vector::Zero(g.size());
  if (state.buffer.size() != g.size()) throw ShapeError("momentum buffer does not match parameters");

  Vector& p = params.values();
  state.buffer = config.momentum * state.buffer + g + config.weight_decay * p;
  p -= config.lr * state.buffer;
}

}  // namespace vhl::nn
