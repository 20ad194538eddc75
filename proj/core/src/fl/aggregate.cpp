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


#include "vhl/fl/aggregate.hpp"

#include <cmath>

#include "vhl/errors.hpp"

namespace vhl::fl {

double lr_at_round(double base_lr, int round, double decay) {
  if (round < 0) throw InputError("round must be non-negative");
  return base_lr * std::pow(decay, round);
}

namespace {

std::vector<double> normalised(std::span<const double> weights, std::size_t expected) {
  if (expected == 0) throw AggregationError("no client updates to aggregate");
  if (weights.size() != expected) throw AggregationError("weight count differs from update count");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw AggregationError("aggregation weights must be positive and finite");
    sum += w;
  }
  std::vector<double> p(weights.begin(), weights.end());
  for (double& w : p) w /= sum;
  return p;
}

}  // namespace

nn::ModelParams aggregate_fedavg(std::span<const nn::ModelParams> models, std::span<const double> weights) {
  const auto p = normalised(weights, models.size());
  nn::ModelParams out(models.front().layout());
  for (std::size_t k = 0; k < models.size(); ++k) {
    if (models[k].size() != out.size()) throw AggregationError("client models differ in shape");
    out.values() += p[k] * models[k].values();
  }
  return out;
}

nn::ModelParams aggregate_fednova(const nn::ModelParams& global, std::span<const nn::ModelParams> models,
                                  std::span<const double> weights, std::span<const long> local_steps) {
  const auto p = normalised(weights, models.size());
  if (local_steps.size() != models.size()) throw AggregationError("step count differs from update count");
  double tau_eff = 0.0;
  Vector direction = Vector::Zero(static_cast<Eigen::Index>(global.size()));
  for (std::size_t k = 0; k < models.size(); ++k) {
    if (local_steps[k] < 1) throw AggregationError("client " + std::to_string(k) + " reported zero local steps");
    if (models[k].size() != global.size()) throw AggregationError("client models differ in shape");
    const double tau = static_cast<double>(local_steps[k]);
    tau_eff += p[k] * tau;
    direction += (p[k] / tau) * (global.values() - models[k].values());
  }
  nn::ModelParams out = global;
  out.values() -= tau_eff * direction;
  return out;
}

double client_drift(const nn::ModelParams& aggregate, std::span<const nn::ModelParams> models) {
  if (models.empty()) throw InputError("client_drift needs at least one client model");
  double total = 0.0;
  for (const auto& m : models) total += (aggregate.values() - m.values()).norm();
  return total / static_cast<double>(models.size());
}

std::vector<double> sample_weights(std::span<const std::size_t> sample_counts) {
  double sum = 0.0;
  for (auto n : sample_counts) sum += static_cast<double>(n);
  std::vector<double> p;
  p.reserve(sample_counts.size());
  for (auto n : sample_counts) p.push_back(static_cast<double>(n) / sum);
  return p;
}

}  // namespace vhl::fl
