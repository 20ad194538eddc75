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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vhl/data/dataset.hpp"
#include "vhl/nn/mlp.hpp"
#include "vhl/objective/vhl_loss.hpp"

namespace vhl::fl {

enum class Strategy { kFedAvg, kFedProx, kScaffold, kFedNova };

Strategy parse_strategy(const std::string& name);
std::string to_string(Strategy s);

struct LocalConfig {
  int epochs = 1;
  double base_lr = 0.01;
  double lr_decay = 0.992;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  int natural_batch = 128;
  double fedprox_mu = 0.1;
  objective::VhlConfig vhl;

  bool operator==(const LocalConfig&) const = default;
};

// Everything the clients read during training. Immutable while a round runs.
struct FederatedSetup {
  nn::MlpSpec spec;
  const data::LabeledDataset* train = nullptr;
  std::vector<data::ClientShard> shards;
  // Noise samples (full/naive) or calibration-layer features (vfa).
  const data::LabeledDataset* virtual_set = nullptr;
  const data::LabeledDataset* test = nullptr;

  int client_count() const { return static_cast<int>(shards.size()); }
};

struct ServerState {
  int round = 0;
  nn::ModelParams global;
  Strategy strategy = Strategy::kFedAvg;
  std::uint64_t master_seed = 0;
  // SCAFFOLD control variates; empty for other strategies until first use.
  nn::Gradient server_control;
  std::vector<nn::Gradient> client_controls;

  static ServerState initial(const nn::ModelParams& w0, Strategy strategy, std::uint64_t master_seed, int clients);
};

struct ClientUpdate {
  int client = 0;
  nn::ModelParams params;
  std::size_t sample_count = 0;
  long local_steps = 0;
  double mean_loss = 0.0;
  double mean_penalty = 0.0;
};

struct RoundMetrics {
  int round = 0;
  double accuracy = 0.0;
  double train_loss = 0.0;
  double client_drift = 0.0;
  double calibration_penalty = 0.0;
  double lr = 0.0;
  std::vector<int> selected;
};

// Extra terms a strategy adds to every local gradient.
struct LocalHooks {
  const nn::ModelParams* prox_anchor = nullptr;  // FedProx: mu * (w - anchor)
  double prox_mu = 0.0;
  const nn::Gradient* control_correction = nullptr;  // SCAFFOLD: c - c_i
};

// E passes of mixed natural/virtual mini-batch momentum SGD from `start`.
// The optimizer state starts fresh. `client_seed` drives batching.
ClientUpdate local_train(const FederatedSetup& setup, int client, const nn::ModelParams& start, const LocalConfig& cfg,
                         double lr, const LocalHooks& hooks, std::uint64_t client_seed);

// c_i+ = c_i - c + (global - w_k) / (tau_k * lr) for the selected clients and
// c <- c + (1/K) * sum of (c_i+ - c_i); then the weighted mean of the client
// models becomes the new global model. lr == 0 leaves the variates as they are.
void scaffold_server_update(ServerState& state, const std::vector<ClientUpdate>& updates, double lr, int total_clients);

// Sorted sample of min(per_round, K) distinct clients for `round`.
std::vector<int> select_clients(std::uint64_t master_seed, int round, int total_clients, int per_round);

std::uint64_t client_stream_seed(std::uint64_t master_seed, int round, int client);

// Top-1 accuracy over the natural-class logits.
double evaluate_accuracy(const nn::MlpSpec& spec, const nn::ModelParams& params, const data::LabeledDataset& test);

struct RoundOptions {
  int clients_per_round = 5;
  int workers = 1;
};

struct RoundOutcome {
  ServerState state;
  RoundMetrics metrics;
  std::vector<ClientUpdate> updates;
};

// One communication round: select, broadcast, train locally (possibly on
// several threads), aggregate per strategy, advance the round counter and
// evaluate the new global model.
RoundOutcome run_round(ServerState state, const FederatedSetup& setup, const RoundOptions& options,
                       const LocalConfig& cfg);

}  // namespace vhl::fl
