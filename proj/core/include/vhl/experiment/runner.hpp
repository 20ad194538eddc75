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
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vhl/analysis/margin.hpp"
#include "vhl/experiment/config.hpp"
#include "vhl/fl/engine.hpp"

namespace vhl::experiment {

inline constexpr const char* kMetricsHeader =
    "seed,round,strategy,mode,accuracy,train_loss,client_drift,calibration_penalty,lr";

struct MetricsRow {
  std::uint64_t seed = 0;
  int round = 0;  // 1-based count of completed rounds
  fl::Strategy strategy = fl::Strategy::kFedAvg;
  objective::VhlMode mode = objective::VhlMode::kOff;
  double accuracy = 0.0;
  double train_loss = 0.0;
  double client_drift = 0.0;
  double calibration_penalty = 0.0;
  double lr = 0.0;
};

std::string format_row(const MetricsRow& row);

// Everything one seed needs, built from the config.
struct SeedContext {
  std::uint64_t seed = 0;
  data::LabeledDataset train;
  data::LabeledDataset test;
  data::LabeledDataset virtual_set;  // empty when the mode uses none
  nn::MlpSpec spec;
  fl::FederatedSetup setup;
  fl::ServerState initial_state;

  SeedContext() = default;
  SeedContext(const SeedContext&) = delete;
  SeedContext& operator=(const SeedContext&) = delete;
};

// Builds data, shards, virtual data and the initial model for `seed`. The
// returned object owns the datasets `setup` points into.
std::unique_ptr<SeedContext> prepare_seed(const ExperimentConfig& config, std::uint64_t seed);

struct SeedSummary {
  std::uint64_t seed = 0;
  double best_accuracy = 0.0;
  int best_round = 0;
  std::optional<double> target;
  std::optional<int> rounds_to_target;  // first round with accuracy >= target
  std::vector<MetricsRow> rows;
};

struct ExperimentResult {
  std::vector<SeedSummary> seeds;
  std::string metrics_csv;  // header plus rows, seeds in config order

  double mean_best_accuracy() const;
};

struct RunOptions {
  std::optional<int> workers;         // overrides fl.workers
  std::optional<double> target;       // overrides the report target
  bool write_files = true;            // metrics file and feature dumps
};

// Trains every seed and returns the collected metrics. The target accuracy is
// the explicit override, else report.target_accuracy, else (baseline_target)
// the best accuracy of FedAvg without VHL on the same seed. With write_files the
// metrics land at output.metrics; if a seed fails, rows produced so far are
// written before the error is rethrown with seed/round context.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// Trains the first seed for `round` rounds and writes the test set and the
// virtual set (when present) as a feature table at `layer` (-1: feature layer).
void export_features_at(const ExperimentConfig& config, int round, int layer, std::ostream& out);

struct TheoryReport {
  int instances = 0;
  int violations = 0;
  double min_slack = 0.0;
  double mean_slack = 0.0;
  std::optional<std::string> failing_instance_json;
};

// Draws `instances` random margin-gap instances (instance i from seed
// derive_seed({seed, i})) and checks the inequality on each.
TheoryReport run_theory_checks(int instances, std::uint64_t seed);

std::string instance_to_json(const analysis::MarginGapInstance& inst, const analysis::MarginGapReport& report);

}  // namespace vhl::experiment
