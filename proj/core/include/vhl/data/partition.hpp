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
#include <string>
#include <vector>

#include "vhl/data/dataset.hpp"

namespace vhl::data {

enum class PartitionScheme { kLda, kTwoClass, kSubset };

PartitionScheme parse_partition_scheme(const std::string& name);
std::string to_string(PartitionScheme s);

struct PartitionSpec {
  PartitionScheme scheme = PartitionScheme::kLda;
  int clients = 10;
  double alpha = 0.1;                // lda
  int samples_per_client = 500;      // two_class
  int dominant_count = 4950;         // subset
  int tail_count_low = 5;            // subset
  int tail_count_high = 6;           // subset
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const PartitionSpec&) const = default;
};

// Per-class Dirichlet(alpha * 1_K) proportions over clients; every class's
// indices are split by largest-remainder rounding after a seeded shuffle.
// The whole draw is repeated (at most 100 times) until no client is empty.
std::vector<ClientShard> partition_lda(const LabeledDataset& ds, int clients, double alpha, std::uint64_t seed);

// Every client gets samples_per_client items from exactly two classes
// (ceil/floor halves). Shards are disjoint.
std::vector<ClientShard> partition_two_class(const LabeledDataset& ds, int clients, int samples_per_client,
                                             std::uint64_t seed);

// Client k holds dominant_count samples of class k (mod class_count) and
// tail_count_low or tail_count_high samples of every other class.
std::vector<ClientShard> partition_subset(const LabeledDataset& ds, int clients, int dominant_count,
                                          int tail_count_low, int tail_count_high, std::uint64_t seed);

std::vector<ClientShard> partition(const LabeledDataset& ds, const PartitionSpec& spec);

}  // namespace vhl::data
