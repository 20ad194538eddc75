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


#include "vhl/data/batching.hpp"

#include <algorithm>

#include "vhl/errors.hpp"

namespace vhl::data {

MixedBatchIter::MixedBatchIter(const ClientShard& shard, std::size_t virtual_count, int natural_batch,
                               int virtual_batch, std::uint64_t epoch_seed)
    : order_(shard.indices),
      natural_batch_(static_cast<std::size_t>(natural_batch)),
      virtual_batch_(static_cast<std::size_t>(virtual_batch)),
      virtual_count_(virtual_count),
      virtual_rng_(derive_seed({epoch_seed, 1})) {
  if (natural_batch < 1) throw ConfigError("B_d", "natural batch size must be at least 1");
  if (virtual_batch < 0) throw ConfigError("B_v", "virtual batch size must be non-negative");
  if (shard.indices.empty()) throw InputError("client " + std::to_string(shard.owner) + " has an empty shard");
  if (virtual_batch > 0 && virtual_count == 0) {
    throw ConfigError("B_v", "virtual batch size is positive but the virtual dataset is empty");
  }
  Rng shuffle_rng(derive_seed({epoch_seed, 0}));
  std::shuffle(order_.begin(), order_.end(), shuffle_rng);
}

bool MixedBatchIter::next(MixedBatch& out) {
  if (pos_ >= order_.size()) return false;
  const std::size_t end = std::min(order_.size(), pos_ + natural_batch_);
  out.natural.assign(order_.begin() + static_cast<std::ptrdiff_t>(pos_), order_.begin() + static_cast<std::ptrdiff_t>(end));
  pos_ = end;
  out.virtuals.clear();
  if (virtual_batch_ > 0) {
    std::uniform_int_distribution<std::size_t> pick(0, virtual_count_ - 1);
    out.virtuals.reserve(virtual_batch_);
    for (std::size_t i = 0; i < virtual_batch_; ++i) out.virtuals.push_back(pick(virtual_rng_));
  }
  return true;
}

std::size_t MixedBatchIter::steps() const { return (order_.size() + natural_batch_ - 1) / natural_batch_; }

}  // namespace vhl::data
