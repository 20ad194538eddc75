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

#include <span>
#include <string>
#include <vector>

#include "vhl/nn/mlp.hpp"

namespace vhl::fl {

inline constexpr double kDefaultLrDecay = 0.992;

// base_lr * decay^round
double lr_at_round(double base_lr, int round, double decay = kDefaultLrDecay);

// Sum of weights[k] * models[k] with the weights renormalised to sum to 1.
// Accumulates in the given order.
nn::ModelParams aggregate_fedavg(std::span<const nn::ModelParams> models, std::span<const double> weights);

// Normalised averaging: d_k = (global - w_k) / tau_k and
// global - tau_eff * sum_k p_k d_k with tau_eff = sum_k p_k tau_k.
nn::ModelParams aggregate_fednova(const nn::ModelParams& global, std::span<const nn::ModelParams> models,
                                  std::span<const double> weights, std::span<const long> local_steps);

// Mean Euclidean distance between the aggregate and each client model.
double client_drift(const nn::ModelParams& aggregate, std::span<const nn::ModelParams> models);

// Normalises n_k into p_k = n_k / sum n_k.
std::vector<double> sample_weights(std::span<const std::size_t> sample_counts);

}  // namespace vhl::fl
