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


#include "vhl/analysis/margin.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <string>

#include "vhl/analysis/assignment.hpp"
#include "vhl/errors.hpp"

namespace vhl::analysis {

std::map<int, std::size_t> EmpiricalDist::class_sizes() const {
  std::map<int, std::size_t> sizes;
  for (int y : labels) ++sizes[y];
  return sizes;
}

void EmpiricalDist::validate() const {
  if (labels.empty()) throw InputError("empirical distribution is empty");
  if (static_cast<Eigen::Index>(labels.size()) != points.rows()) throw ShapeError("point/label count mismatch");
}

MarginReport statistical_margin(const Classifier& classifier, const EmpiricalDist& dist, const Matrix& candidates,
                                const GroundMetric& metric) {
  dist.validate();
  if (candidates.cols() != dist.points.cols()) throw ShapeError("candidates and points differ in dimension");
  std::vector<int> predicted(static_cast<std::size_t>(candidates.rows()));
  for (Eigen::Index c = 0; c < candidates.rows(); ++c) predicted[static_cast<std::size_t>(c)] = classifier(candidates.row(c));

  MarginReport report;
  std::string missing;
  for (const auto& [label, count] : dist.class_sizes()) {
    std::size_t violating = 0;
    for (int p : predicted) violating += p != label ? 1 : 0;
    report.violating_per_label[label] = violating;
    if (violating == 0) missing += (missing.empty() ? "" : ", ") + std::to_string(label);
  }
  if (!missing.empty()) throw MarginUndefinedError("no candidate is classified differently from label(s) " + missing);

  report.per_sample.reserve(dist.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < dist.points.rows(); ++i) {
    const int y = dist.labels[static_cast<std::size_t>(i)];
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < candidates.rows(); ++c) {
      if (predicted[static_cast<std::size_t>(c)] == y) continue;
      best = std::min(best, metric(dist.points.row(i), candidates.row(c)));
    }
    report.per_sample.push_back(best);
    total += best;
  }
  report.margin = total / static_cast<double>(dist.size());
  return report;
}

double conditional_wasserstein(const EmpiricalDist& p, const EmpiricalDist& pv, const GroundMetric& metric) {
  p.validate();
  pv.validate();
  if (p.points.cols() != pv.points.cols()) throw ShapeError("distributions live in different dimensions");
  const auto sizes = p.class_sizes();
  const auto sizes_v = pv.class_sizes();
  if (sizes != sizes_v) {
    throw UnsupportedInstanceError("exact conditional W1 needs identical labels with equal per-class support sizes");
  }
  double total = 0.0;
  for (const auto& [label, n] : sizes) {
    if (n > static_cast<std::size_t>(kMaxExactSupport)) {
      throw UnsupportedInstanceError("class " + std::to_string(label) + " has " + std::to_string(n) +
                                     " points; the exact solver accepts at most " + std::to_string(kMaxExactSupport));
    }
    std::vector<Eigen::Index> a, b;
    for (Eigen::Index i = 0; i < p.points.rows(); ++i)
      if (p.labels[static_cast<std::size_t>(i)] == label) a.push_back(i);
    for (Eigen::Index i = 0; i < pv.points.rows(); ++i)
      if (pv.labels[static_cast<std::size_t>(i)] == label) b.push_back(i);
    Matrix cost(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = metric(p.points.row(a[i]), pv.points.row(b[j]));
    const double w1 = min_cost_assignment(cost).cost / static_cast<double>(n);
    total += (static_cast<double>(n) / static_cast<double>(p.size())) * w1;
  }
  return total;
}

MarginGapReport margin_gap_check(const Classifier& classifier, const EmpiricalDist& p, const EmpiricalDist& pv,
                         const Matrix& candidates, const GroundMetric& metric) {
  MarginGapReport r;
  r.margin_p = statistical_margin(classifier, p, candidates, metric).margin;
  r.margin_v = statistical_margin(classifier, pv, candidates, metric).margin;
  r.lhs = std::abs(r.margin_p - r.margin_v);
  r.rhs = conditional_wasserstein(p, pv, metric);
  r.holds = r.lhs <= r.rhs + 1e-9;
  return r;
}

int LinearClassifier::operator()(const RowVector& x) const {
  Eigen::Index best = 0;
  (weights * x.transpose() + bias).maxCoeff(&best);
  return static_cast<int>(best);
}

MarginGapInstance random_margin_gap_instance(Rng& rng) {
  std::uniform_int_distribution<int> classes_dist(2, 4);
  std::uniform_int_distribution<int> dim_dist(1, 3);
  std::uniform_int_distribution<int> support_dist(1, 6);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> box(-6.0, 6.0);

  const int classes = classes_dist(rng);
  const int dim = dim_dist(rng);
  MarginGapInstance inst;
  std::vector<int> support(static_cast<std::size_t>(classes));
  int total = 0;
  for (auto& s : support) total += (s = support_dist(rng));

  auto fill = [&](EmpiricalDist& d, double shift_scale) {
    d.points.resize(total, dim);
    d.labels.clear();
    Eigen::Index row = 0;
    for (int c = 0; c < classes; ++c) {
      RowVector center(dim);
      for (int j = 0; j < dim; ++j) center(j) = shift_scale * n01(rng);
      for (int i = 0; i < support[static_cast<std::size_t>(c)]; ++i, ++row) {
        for (int j = 0; j < dim; ++j) d.points(row, j) = center(j) + n01(rng);
        d.labels.push_back(c);
      }
    }
  };
  fill(inst.p, 2.0);
  fill(inst.pv, 2.0);

  for (;;) {
    inst.classifier.weights.resize(classes, dim);
    inst.classifier.bias.resize(classes);
    for (Eigen::Index i = 0; i < inst.classifier.weights.size(); ++i) inst.classifier.weights.data()[i] = n01(rng);
    for (int c = 0; c < classes; ++c) inst.classifier.bias(c) = n01(rng);
    inst.candidates.resize(40, dim);
    for (Eigen::Index i = 0; i < inst.candidates.size(); ++i) inst.candidates.data()[i] = box(rng);
    std::set<int> predicted;
    for (Eigen::Index i = 0; i < inst.candidates.rows(); ++i) predicted.insert(inst.classifier(inst.candidates.row(i)));
    // Every class needs a violating candidate: two distinct predictions suffice.
    if (predicted.size() >= 2) return inst;
  }
}

}  // namespace vhl::analysis
