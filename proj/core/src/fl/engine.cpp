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


#include "vhl/fl/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "vhl/data/batching.hpp"
#include "vhl/errors.hpp"
#include "vhl/fl/aggregate.hpp"
#include "vhl/nn/optimizer.hpp"

namespace vhl::fl {

Strategy parse_strategy(const std::string& name) {
  if (name == "fedavg") return Strategy::kFedAvg;
  if (name == "fedprox") return Strategy::kFedProx;
  if (name == "scaffold") return Strategy::kScaffold;
  if (name == "fednova") return Strategy::kFedNova;
  throw InputError("unknown strategy '" + name + "' (expected fedavg, fedprox, scaffold or fednova)");
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kFedAvg:
      return "fedavg";
    case Strategy::kFedProx:
      return "fedprox";
    case Strategy::kScaffold:
      return "scaffold";
    case Strategy::kFedNova:
      return "fednova";
  }
  return "?";
}

ServerState ServerState::initial(const nn::ModelParams& w0, Strategy strategy, std::uint64_t master_seed,
                                 int clients) {
  ServerState s;
  s.global = w0;
  s.strategy = strategy;
  s.master_seed = master_seed;
  if (strategy == Strategy::kScaffold) {
    s.server_control = nn::Gradient(w0.layout());
    s.client_controls.assign(static_cast<std::size_t>(clients), nn::Gradient(w0.layout()));
  }
  return s;
}

std::uint64_t client_stream_seed(std::uint64_t master_seed, int round, int client) {
  return derive_seed({master_seed, static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(client)});
}

std::vector<int> select_clients(std::uint64_t master_seed, int round, int total_clients, int per_round) {
  if (total_clients < 1) throw InputError("no clients to select from");
  if (per_round < 1) throw InputError("clients_per_round must be at least 1");
  const int m = std::min(per_round, total_clients);
  std::vector<int> ids(static_cast<std::size_t>(total_clients));
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng(derive_seed({master_seed, static_cast<std::uint64_t>(round), 0x5E1EC7ULL}));
  for (int i = 0; i < m; ++i) {
    std::uniform_int_distribution<int> pick(i, total_clients - 1);
    std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(pick(rng))]);
  }
  ids.resize(static_cast<std::size_t>(m));
  std::sort(ids.begin(), ids.end());
  return ids;
}

ClientUpdate local_train(const FederatedSetup& setup, int client, const nn::ModelParams& start, const LocalConfig& cfg,
                         double lr, const LocalHooks& hooks, std::uint64_t client_seed) {
  if (cfg.epochs < 1) throw ConfigError("fl.local_epochs", "must be at least 1");
  const auto& shard = setup.shards.at(static_cast<std::size_t>(client));
  const bool use_virtual = cfg.vhl.uses_virtual_data();
  if (use_virtual && setup.virtual_set == nullptr) {
    throw ConfigError("vhl.mode", to_string(cfg.vhl.mode) + " mode needs a virtual dataset");
  }
  const std::size_t virtual_count = use_virtual ? setup.virtual_set->size() : 0;
  const int virtual_batch = use_virtual ? cfg.vhl.virtual_batch : 0;

  ClientUpdate up;
  up.client = client;
  up.sample_count = shard.sample_count();
  up.params = start;
  nn::MomentumState momentum;
  const nn::SgdConfig sgd{lr, cfg.momentum, cfg.weight_decay};

  double loss_sum = 0.0;
  double penalty_sum = 0.0;
  data::MixedBatch batch;
  Matrix vx;
  Labels ny;
  Labels vy;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    data::MixedBatchIter it(shard, virtual_count, cfg.natural_batch, virtual_batch,
                            derive_seed({client_seed, static_cast<std::uint64_t>(epoch)}));
    while (it.next(batch)) {
      const Matrix nx = gather_rows(setup.train->features, batch.natural);
      ny.clear();
      for (auto i : batch.natural) ny.push_back(setup.train->labels[i]);
      vy.clear();
      if (virtual_batch > 0) {
        vx = gather_rows(setup.virtual_set->features, batch.virtuals);
        for (auto i : batch.virtuals) vy.push_back(setup.virtual_set->labels[i]);
      } else {
        vx.resize(0, 0);
      }

      auto step = objective::vhl_step_loss(setup.spec, up.params, nx, ny, vx, vy, cfg.vhl);
      if (!std::isfinite(step.loss)) throw DivergenceError(client, up.local_steps, "non-finite local loss");
      if (hooks.prox_anchor != nullptr && hooks.prox_mu > 0.0) {
        step.grad.values() += hooks.prox_mu * (up.params.values() - hooks.prox_anchor->values());
      }
      if (hooks.control_correction != nullptr) step.grad += *hooks.control_correction;
      try {
        nn::sgd_momentum_step(up.params, step.grad, sgd, momentum);
      } catch (const NumericError& e) {
        throw DivergenceError(client, up.local_steps, e.what());
      }
      loss_sum += step.loss;
      penalty_sum += step.diagnostics.penalty;
      ++up.local_steps;
    }
  }
  up.mean_loss = loss_sum / static_cast<double>(up.local_steps);
  up.mean_penalty = penalty_sum / static_cast<double>(up.local_steps);
  return up;
}

void scaffold_server_update(ServerState& state, const std::vector<ClientUpdate>& updates, double lr, int total_clients) {
  if (state.strategy != Strategy::kScaffold) throw StateError("scaffold update on a non-scaffold server");
  if (updates.empty()) throw AggregationError("no client updates to aggregate");
  if (state.client_controls.size() != static_cast<std::size_t>(total_clients)) {
    throw StateError("expected " + std::to_string(total_clients) + " client control variates, have " +
                     std::to_string(state.client_controls.size()));
  }
  if (state.server_control.size() != state.global.size()) throw StateError("server control variate has the wrong shape");

  std::vector<nn::ModelParams> models;
  std::vector<std::size_t> counts;
  Vector delta_sum = Vector::Zero(static_cast<Eigen::Index>(state.global.size()));
  for (const auto& u : updates) {
    auto& ci = state.client_controls.at(static_cast<std::size_t>(u.client));
    if (ci.size() != state.global.size()) throw StateError("client " + std::to_string(u.client) + " control variate has the wrong shape");
    if (lr > 0.0) {
      const double scale = 1.0 / (static_cast<double>(u.local_steps) * lr);
      Vector updated = ci.values() - state.server_control.values() + scale * (state.global.values() - u.params.values());
      delta_sum += updated - ci.values();
      ci.values() = std::move(updated);
    }
    models.push_back(u.params);
    counts.push_back(u.sample_count);
  }
  state.server_control.values() += delta_sum / static_cast<double>(total_clients);
  state.global = aggregate_fedavg(models, sample_weights(counts));
}

double evaluate_accuracy(const nn::MlpSpec& spec, const nn::ModelParams& params, const data::LabeledDataset& test) {
  const auto trace = nn::forward(spec, params, test.features);
  const auto pred = nn::predict(trace.logits, spec.natural_classes);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == test.labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

RoundOutcome run_round(ServerState state, const FederatedSetup& setup, const RoundOptions& options,
                       const LocalConfig& cfg) {
  const int k_total = setup.client_count();
  const auto selected = select_clients(state.master_seed, state.round, k_total, options.clients_per_round);
  const double lr = lr_at_round(cfg.base_lr, state.round, cfg.lr_decay);

  std::vector<nn::Gradient> corrections;
  if (state.strategy == Strategy::kScaffold) {
    if (state.client_controls.size() != static_cast<std::size_t>(k_total)) {
      throw StateError("scaffold state has " + std::to_string(state.client_controls.size()) + " client variates for " +
                       std::to_string(k_total) + " clients");
    }
    for (int k : selected) corrections.push_back(state.server_control - state.client_controls[static_cast<std::size_t>(k)]);
  }

  std::vector<ClientUpdate> updates(selected.size());
  std::vector<std::exception_ptr> errors(selected.size());
  auto work = [&](std::size_t i) {
    try {
      LocalHooks hooks;
      if (state.strategy == Strategy::kFedProx) {
        hooks.prox_anchor = &state.global;
        hooks.prox_mu = cfg.fedprox_mu;
      }
      if (state.strategy == Strategy::kScaffold) hooks.control_correction = &corrections[i];
      updates[i] = local_train(setup, selected[i], state.global, cfg, lr, hooks,
                               client_stream_seed(state.master_seed, state.round, selected[i]));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.workers, 1)), 1, selected.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < selected.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < selected.size(); i = next++) work(i);
      });
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const DivergenceError&) {
      throw;
    } catch (const std::exception& e) {
      throw DivergenceError(selected[i], -1, e.what());
    }
  }

  std::vector<nn::ModelParams> models;
  std::vector<std::size_t> counts;
  std::vector<long> steps;
  for (const auto& u : updates) {
    models.push_back(u.params);
    counts.push_back(u.sample_count);
    steps.push_back(u.local_steps);
  }
  const auto weights = sample_weights(counts);
  switch (state.strategy) {
    case Strategy::kFedAvg:
    case Strategy::kFedProx:
      state.global = aggregate_fedavg(models, weights);
      break;
    case Strategy::kFedNova:
      state.global = aggregate_fednova(state.global, models, weights, steps);
      break;
    case Strategy::kScaffold:
      scaffold_server_update(state, updates, lr, k_total);
      break;
  }

  RoundOutcome out;
  out.metrics.round = state.round;
  out.metrics.lr = lr;
  out.metrics.selected = selected;
  out.metrics.client_drift = client_drift(state.global, models);
  for (const auto& u : updates) {
    out.metrics.train_loss += u.mean_loss;
    out.metrics.calibration_penalty += u.mean_penalty;
  }
  out.metrics.train_loss /= static_cast<double>(updates.size());
  out.metrics.calibration_penalty /= static_cast<double>(updates.size());
  if (setup.test != nullptr) out.metrics.accuracy = evaluate_accuracy(setup.spec, state.global, *setup.test);
  ++state.round;
  out.state = std::move(state);
  out.updates = std::move(updates);
  return out;
}

}  // namespace vhl::fl
