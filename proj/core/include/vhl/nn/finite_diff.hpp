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

#include <functional>

#include "vhl/nn/mlp.hpp"

namespace vhl::nn {

using ScalarLoss = std::function<double(const ModelParams&)>;

// Central-difference gradient of `loss` at `params`, one parameter at a time.
// Meant for checking backward() in tests; it costs 2 * size() evaluations.
Gradient finite_diff_grad(const ModelParams& params, const ScalarLoss& loss, double eps = 1e-5);

}  // namespace vhl::nn
