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
#include <functional>
#include <map>
#include <vector>

#include "vhl/common.hpp"

namespace vhl::analysis {

// Finite labelled point set with uniform weight per point.
struct EmpiricalDist {
  Matrix points;
  Labels labels;

  std::size_t size() const { return labels.size(); }
  std::map<int, std::size_t> class_sizes() const;
  void validate() const;
};

// Euclidean distance scaled by `scale` (> 0).
struct GroundMetric {
  double scale = 1.0;
  double operator()(const RowVector& a, const RowVector& b) const { return scale * (a - b).norm(); }
};

using Classifier = std::function<int(const RowVector&)>;

struct MarginReport {
  double margin = 0.0;
  std::vector<double> per_sample;
  // Candidates labelled differently from each present class.
  std::map<int, std::size_t> violating_per_label;
};

// Mean over samples of the distance to the nearest candidate the classifier
// labels differently from the sample's label. Throws MarginUndefinedError if
// some present label has no such candidate.
MarginReport statistical_margin(const Classifier& classifier, const EmpiricalDist& dist, const Matrix& candidates,
                                const GroundMetric& metric = {});

// Label-wise exact W1 between equal-size uniform supports, averaged with the
// shared label marginal. Supports are limited to 10 points per class.
double conditional_wasserstein(const EmpiricalDist& p, const EmpiricalDist& pv, const GroundMetric& metric = {});

inline constexpr int kMaxExactSupport = 10;

struct MarginGapReport {
  double margin_p = 0.0;
  double margin_v = 0.0;
  double lhs = 0.0;  // |margin_p - margin_v|
  double rhs = 0.0;  // conditional Wasserstein distance
  bool holds = false;
  double slack() const { return rhs - lhs; }
};

// |SM(f, P) - SM(f, Pv)| <= E_y W1(P|y, Pv|y), both margins taken over the
// same candidate set.
MarginGapReport margin_gap_check(const Classifier& classifier, const EmpiricalDist& p, const EmpiricalDist& pv,
                         const Matrix& candidates, const GroundMetric& metric = {});

// Linear classifier argmax(W x + b) used for randomised instances.
struct LinearClassifier {
  Matrix weights;  // classes x dim
  Vector bias;

  int operator()(const RowVector& x) const;
};

struct MarginGapInstance {
  EmpiricalDist p;
  EmpiricalDist pv;
  LinearClassifier classifier;
  Matrix candidates;
};

// 2-4 classes, 1-6 points per class, dimension 1-3, a random linear
// classifier and a candidate cloud covering both distributions in which every
// class has at least one differently-labelled candidate.
MarginGapInstance random_margin_gap_instance(Rng& rng);

}  // namespace vhl::analysis
