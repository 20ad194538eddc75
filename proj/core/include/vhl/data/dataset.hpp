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

#include "vhl/common.hpp"

namespace vhl::data {

struct LabeledDataset {
  Matrix features;  // n x d
  Labels labels;    // n entries in [0, class_count)
  int class_count = 0;

  std::size_t size() const { return labels.size(); }
  int dim() const { return static_cast<int>(features.cols()); }

  // Throws InputError on any broken invariant.
  void validate() const;
  std::vector<std::size_t> class_histogram() const;
};

// One client's private partition: indices into a parent dataset.
struct ClientShard {
  int owner = 0;
  std::vector<std::size_t> indices;

  std::size_t sample_count() const { return indices.size(); }
};

// Rows of `parent` selected by `indices`, as a standalone dataset.
LabeledDataset subset(const LabeledDataset& parent, const std::vector<std::size_t>& indices);

struct MixtureParams {
  int class_count = 10;
  int dim = 32;
  int per_class = 500;
  double center_spread = 1.0;  // centres ~ N(0, center_spread^2 I)
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;
};

// Isotropic Gaussian blobs around seed-determined class centres. Rows are
// grouped by class (class 0 first).
LabeledDataset make_synthetic_mixture(const MixtureParams& params);

struct TrainTest {
  LabeledDataset train;
  LabeledDataset test;
};

// Draws per_class + test_per_class samples per class from one mixture and
// keeps the last test_per_class of every class as the test split.
TrainTest make_synthetic_split(const MixtureParams& params, int test_per_class);

// Accuracy of the nearest-class-mean classifier fitted and evaluated on `ds`.
double nearest_centroid_accuracy(const LabeledDataset& ds);

}  // namespace vhl::data
