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
#include <vector>

#include "vhl/data/dataset.hpp"

namespace vhl::data {

struct MixedBatch {
  std::vector<std::size_t> natural;   // indices into the shard's parent dataset
  std::vector<std::size_t> virtuals;  // row indices into the virtual dataset
};

// One epoch over a shard: natural samples are shuffled once and consumed
// without replacement in batches of `natural_batch` (the last one may be
// short); each step also draws `virtual_batch` rows uniformly with replacement
// from a virtual dataset of `virtual_count` rows. Both streams derive from
// `epoch_seed`, so equal seeds give equal sequences.
class MixedBatchIter {
 public:
  MixedBatchIter(const ClientShard& shard, std::size_t virtual_count, int natural_batch, int virtual_batch,
                 std::uint64_t epoch_seed);

  // Fills `out` with the next step; false once the epoch is exhausted.
  bool next(MixedBatch& out);

  std::size_t steps() const;

 private:
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  std::size_t natural_batch_;
  std::size_t virtual_batch_;
  std::size_t virtual_count_;
  Rng virtual_rng_;
};

}  // namespace vhl::data
