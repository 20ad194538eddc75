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
#include <vector>

#include "vhl/data/dataset.hpp"

namespace vhl::virtual_data {

struct VirtualSpec {
  int classes = 10;
  int per_class = 100;
  int base_side = 8;
  int up_factor = 4;
  int channels = 3;
  double mean_separation = 10.0;
  double sigma = 1.0;
  std::uint64_t seed = 0;

  int base_dim() const { return base_side * base_side * channels; }
  int sample_dim() const { return base_side * up_factor * base_side * up_factor * channels; }

  void validate() const;
  bool operator==(const VirtualSpec&) const = default;
};

// Shared label-balanced dataset. Rows are grouped by class; labels are virtual
// class indices 0..classes-1. `class_means` live in the sample space.
struct VirtualDataset {
  data::LabeledDataset data;
  Matrix class_means;
  VirtualSpec spec;
};

// Nearest-neighbour upsampling of one square single-channel image stored
// row-major as side*side values: every pixel becomes a factor x factor block.
std::vector<double> upsample_nearest(const std::vector<double>& image, int side, int factor);

// Channel-major image (channels planes of side*side) upsampled plane by plane.
RowVector upsample_image(const RowVector& image, int side, int channels, int factor);

// Class c: N(mu_c, sigma^2) noise on the base grid, then upsampled. The mu_c
// are seeded with pairwise distance >= mean_separation.
VirtualDataset generate_noise_dataset(const VirtualSpec& spec);

// Draws class-conditional Gaussian features directly in a feature space of
// width feature_dim; nothing passes through a network.
VirtualDataset generate_vfa_features(int classes, int feature_dim, int per_class, double mean_separation,
                                     double sigma, std::uint64_t seed);

// `count` points ~ N(0, scale^2 I) in `dim` dimensions with every pair at
// least `separation` apart.
Matrix place_separated_means(int count, int dim, double separation, Rng& rng);

// Container: little-endian u32 classes, per_class, dim; then row-major f32
// rows grouped by class.
void write_container(std::ostream& out, const data::LabeledDataset& ds);
data::LabeledDataset read_container(std::istream& in);

}  // namespace vhl::virtual_data
