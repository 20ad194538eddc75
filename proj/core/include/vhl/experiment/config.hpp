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
#include "vhl/data/partition.hpp"
#include "vhl/fl/engine.hpp"
#include "vhl/nn/mlp.hpp"
#include "vhl/objective/vhl_loss.hpp"
#include "vhl/virtual/generator.hpp"

namespace vhl::experiment {

struct DatasetSection {
  std::string kind = "synthetic";  // synthetic | idx
  int class_count = 10;
  int dim = 32;
  int per_class = 500;
  int test_per_class = 100;
  double center_spread = 1.0;
  double noise_sigma = 1.0;
  std::optional<std::uint64_t> seed;  // defaults to the run seed
  std::string train_images, train_labels, test_images, test_labels;

  bool operator==(const DatasetSection&) const = default;
};

struct PartitionSection {
  data::PartitionScheme scheme = data::PartitionScheme::kLda;
  double alpha = 0.1;
  int samples_per_client = 500;
  int dominant_count = 4950;
  int tail_count_low = 5;
  int tail_count_high = 6;

  bool operator==(const PartitionSection&) const = default;
};

struct ModelSection {
  std::vector<int> hidden = {64, 64};
  nn::Activation activation = nn::Activation::kRelu;

  bool operator==(const ModelSection&) const = default;
};

struct FlSection {
  fl::Strategy strategy = fl::Strategy::kFedAvg;
  int clients = 10;
  int rounds = 0;
  std::optional<int> clients_per_round;  // 5 for K <= 10 style setups, 10 beyond
  fl::LocalConfig local;
  int workers = 1;

  int resolved_clients_per_round() const;
  bool operator==(const FlSection&) const = default;
};

struct VirtualSection {
  std::optional<int> classes;  // defaults to the dataset's class count
  int per_class = 100;
  std::optional<int> base_side;
  std::optional<int> up_factor;
  std::optional<int> channels;
  double mean_separation = 10.0;
  double sigma = 1.0;
  std::optional<std::uint64_t> seed;

  bool operator==(const VirtualSection&) const = default;
};

struct OutputSection {
  std::string metrics = "metrics.csv";
  std::string features_dir;
  std::vector<int> feature_rounds;
  int feature_layer = -1;

  bool operator==(const OutputSection&) const = default;
};

struct ReportSection {
  std::optional<double> target_accuracy;
  bool baseline_target = false;

  bool operator==(const ReportSection&) const = default;
};

struct ExperimentConfig {
  DatasetSection dataset;
  PartitionSection partition;
  ModelSection model;
  FlSection fl;
  VirtualSection virtual_data;
  OutputSection output;
  ReportSection report;
  std::vector<std::uint64_t> seeds = {0};

  bool operator==(const ExperimentConfig&) const = default;
};

// YAML text with sections dataset, partition, model, fl, vhl (with a nested
// virtual map), output, report and a top-level seeds list. Required: the
// dataset section and fl.rounds. Unknown keys and type mismatches raise
// ConfigError naming the dotted key path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Every field written out explicitly; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

// Noise-image geometry for a given input width: (8, 4, 3) for 3072,
// (7, 4, 1) for 784, otherwise one "pixel" per input feature.
struct VirtualGeometry {
  int base_side;
  int up_factor;
  int channels;
};
VirtualGeometry default_virtual_geometry(int input_dim);

}  // namespace vhl::experiment
