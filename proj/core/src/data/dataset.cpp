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


#include "vhl/data/dataset.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "vhl/errors.hpp"

namespace vhl::data {

void LabeledDataset::validate() const {
  if (class_count <= 0) throw InputError("class_count must be positive");
  if (labels.empty()) throw InputError("dataset is empty");
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
    throw ShapeError("dataset has " + std::to_string(features.rows()) + " rows but " + std::to_string(labels.size()) +
                     " labels");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) {
      throw InputError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) + " out of range");
    }
  }
  if (!features.allFinite()) throw NumericError("dataset contains non-finite features");
}

std::vector<std::size_t> LabeledDataset::class_histogram() const {
  std::vector<std::size_t> h(static_cast<std::size_t>(class_count), 0);
  for (int y : labels) ++h[static_cast<std::size_t>(y)];
  return h;
}

LabeledDataset subset(const LabeledDataset& parent, const std::vector<std::size_t>& indices) {
  LabeledDataset out;
  out.class_count = parent.class_count;
  out.features = gather_rows(parent.features, indices);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.labels.push_back(parent.labels.at(i));
  return out;
}

namespace {

void check_mixture(const MixtureParams& p) {
  if (p.class_count <= 0 || p.dim <= 0 || p.per_class <= 0) throw InputError("mixture counts must be positive");
  if (!(p.noise_sigma >= 0.0)) throw InputError("noise_sigma must be non-negative");
  if (!(p.center_spread >= 0.0)) throw InputError("center_spread must be non-negative");
}

Matrix draw_centers(const MixtureParams& p) {
  Rng rng(derive_seed({p.seed, 0xC3}));
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix centers(p.class_count, p.dim);
  for (Eigen::Index c = 0; c < centers.rows(); ++c)
    for (Eigen::Index j = 0; j < centers.cols(); ++j) centers(c, j) = p.center_spread * n01(rng);
  return centers;
}

LabeledDataset draw_samples(const MixtureParams& p, const Matrix& centers, int per_class) {
  Rng rng(derive_seed({p.seed, 0x5A}));
  std::normal_distribution<double> n01(0.0, 1.0);
  LabeledDataset ds;
  ds.class_count = p.class_count;
  ds.features.resize(static_cast<Eigen::Index>(p.class_count) * per_class, p.dim);
  ds.labels.reserve(static_cast<std::size_t>(ds.features.rows()));
  Eigen::Index row = 0;
  for (int c = 0; c < p.class_count; ++c) {
    for (int i = 0; i < per_class; ++i, ++row) {
      for (int j = 0; j < p.dim; ++j) ds.features(row, j) = centers(c, j) + p.noise_sigma * n01(rng);
      ds.labels.push_back(c);
    }
  }
  return ds;
}

}  // namespace

LabeledDataset make_synthetic_mixture(const MixtureParams& params) {
  check_mixture(params);
  return draw_samples(params, draw_centers(params), params.per_class);
}

TrainTest make_synthetic_split(const MixtureParams& params, int test_per_class) {
  check_mixture(params);
  if (test_per_class <= 0) throw InputError("test_per_class must be positive");
  const int total = params.per_class + test_per_class;
  LabeledDataset all = draw_samples(params, draw_centers(params), total);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (std::size_t i = 0; i < all.size(); ++i) {
    (static_cast<int>(i % static_cast<std::size_t>(total)) < params.per_class ? train_idx : test_idx).push_back(i);
  }
  return {subset(all, train_idx), subset(all, test_idx)};
}

double nearest_centroid_accuracy(const LabeledDataset& ds) {
  ds.validate();
  Matrix means = Matrix::Zero(ds.class_count, ds.features.cols());
  std::vector<double> counts(static_cast<std::size_t>(ds.class_count), 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    means.row(ds.labels[i]) += ds.features.row(static_cast<Eigen::Index>(i));
    counts[static_cast<std::size_t>(ds.labels[i])] += 1.0;
  }
  for (int c = 0; c < ds.class_count; ++c)
    if (counts[static_cast<std::size_t>(c)] > 0) means.row(c) /= counts[static_cast<std::size_t>(c)];

  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < ds.class_count; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) continue;
      const double d = (ds.features.row(static_cast<Eigen::Index>(i)) - means.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (best == ds.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

}  // namespace vhl::data
