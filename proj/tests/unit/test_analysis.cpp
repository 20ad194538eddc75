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


#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "test_util.hpp"
#include "vhl/analysis/assignment.hpp"
#include "vhl/analysis/export.hpp"
#include "vhl/analysis/margin.hpp"
#include "vhl/errors.hpp"

namespace vhl::analysis {
namespace {

using vhl::testing::random_matrix;

double brute_force_assignment(const Matrix& cost) {
  std::vector<int> perm(static_cast<std::size_t>(cost.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) c += cost(static_cast<Eigen::Index>(i), perm[i]);
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

TEST(Assignment, MatchesPermutationEnumeration) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 7;
    const Matrix cost = random_matrix(n, n, rng).cwiseAbs() * 10.0;
    const auto a = min_cost_assignment(cost);
    EXPECT_NEAR(a.cost, brute_force_assignment(cost), 1e-9) << "trial " << trial;
    std::vector<int> cols = a.row_to_col;
    std::sort(cols.begin(), cols.end());
    for (int i = 0; i < n; ++i) EXPECT_EQ(cols[static_cast<std::size_t>(i)], i);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += cost(i, a.row_to_col[static_cast<std::size_t>(i)]);
    EXPECT_NEAR(sum, a.cost, 1e-9);
  }
}

TEST(Assignment, HandsNegativeCosts) {
  Matrix cost(2, 2);
  cost << -1.0, 5.0, 4.0, -2.0;
  EXPECT_DOUBLE_EQ(min_cost_assignment(cost).cost, -3.0);
  EXPECT_EQ(min_cost_assignment(Matrix(0, 0)).cost, 0.0);
}

TEST(Assignment, RejectsBadMatrices) {
  EXPECT_THROW(min_cost_assignment(Matrix::Zero(2, 3)), ShapeError);
  Matrix c = Matrix::Zero(2, 2);
  c(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(min_cost_assignment(c), NumericError);
}

// Classifies by the sign of the first coordinate.
int sign_classifier(const RowVector& x) { return x(0) >= 0.0 ? 1 : 0; }

TEST(Margin, HandComputedOneDimensional) {
  EmpiricalDist d;
  d.points.resize(3, 1);
  d.points << -2.0, -0.5, 3.0;
  d.labels = {0, 0, 1};
  Matrix cand(4, 1);
  cand << -3.0, 1.0, 2.0, -1.0;
  // Label 0 points look for candidates >= 0 (1 and 2); label 1 for < 0.
  const auto r = statistical_margin(sign_classifier, d, cand);
  EXPECT_DOUBLE_EQ(r.per_sample[0], 3.0);
  EXPECT_DOUBLE_EQ(r.per_sample[1], 1.5);
  EXPECT_DOUBLE_EQ(r.per_sample[2], 4.0);
  EXPECT_DOUBLE_EQ(r.margin, (3.0 + 1.5 + 4.0) / 3.0);
  EXPECT_EQ(r.violating_per_label.at(0), 2u);
  EXPECT_EQ(r.violating_per_label.at(1), 2u);
}

TEST(Margin, MatchesDoubleLoopOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_margin_gap_instance(rng);
    const auto r = statistical_margin(inst.classifier, inst.p, inst.candidates);
    double total = 0.0;
    for (Eigen::Index i = 0; i < inst.p.points.rows(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < inst.candidates.rows(); ++c) {
        if (inst.classifier(inst.candidates.row(c)) == inst.p.labels[static_cast<std::size_t>(i)]) continue;
        double sq = 0.0;
        for (Eigen::Index j = 0; j < inst.p.points.cols(); ++j) {
          const double diff = inst.p.points(i, j) - inst.candidates(c, j);
          sq += diff * diff;
        }
        best = std::min(best, std::sqrt(sq));
      }
      total += best;
    }
    EXPECT_NEAR(r.margin, total / static_cast<double>(inst.p.size()), 1e-12) << "trial " << trial;
  }
}

TEST(Margin, UndefinedWhenNoCandidateDisagrees) {
  EmpiricalDist d;
  d.points = Matrix::Ones(2, 1);
  d.labels = {1, 1};
  const Matrix cand = Matrix::Constant(3, 1, 5.0);
  EXPECT_THROW(statistical_margin(sign_classifier, d, cand), MarginUndefinedError);
}

TEST(Margin, OneLipschitzInThePoints) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = random_margin_gap_instance(rng);
    const double before = statistical_margin(inst.classifier, inst.p, inst.candidates).margin;
    const RowVector shift = random_matrix(1, inst.p.points.cols(), rng, 0.3);
    inst.p.points.rowwise() += shift;
    const double after = statistical_margin(inst.classifier, inst.p, inst.candidates).margin;
    EXPECT_LE(std::abs(after - before), shift.norm() + 1e-12);
  }
}

EmpiricalDist line_dist(std::vector<double> xs, Labels y) {
  EmpiricalDist d;
  d.points.resize(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) d.points(static_cast<Eigen::Index>(i), 0) = xs[i];
  d.labels = std::move(y);
  return d;
}

TEST(Wasserstein, HandComputedOneDimensional) {
  // Class 0: {0, 1} vs {2, 3}: sorted matching, W1 = 2.
  // Class 1: {5} vs {4}: W1 = 1. Marginal (2/3, 1/3).
  const auto p = line_dist({0, 1, 5}, {0, 0, 1});
  const auto q = line_dist({3, 2, 4}, {0, 0, 1});
  EXPECT_NEAR(conditional_wasserstein(p, q), 2.0 * 2.0 / 3.0 + 1.0 / 3.0, 1e-15);
}

TEST(Wasserstein, MatchesPermutationOracle) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = random_margin_gap_instance(rng);
    double expect = 0.0;
    for (const auto& [label, n] : inst.p.class_sizes()) {
      std::vector<Eigen::Index> a, b;
      for (Eigen::Index i = 0; i < inst.p.points.rows(); ++i) {
        if (inst.p.labels[static_cast<std::size_t>(i)] == label) a.push_back(i);
        if (inst.pv.labels[static_cast<std::size_t>(i)] == label) b.push_back(i);
      }
      Matrix cost(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              (inst.p.points.row(a[i]) - inst.pv.points.row(b[j])).norm();
      expect += brute_force_assignment(cost) / static_cast<double>(inst.p.size());
    }
    EXPECT_NEAR(conditional_wasserstein(inst.p, inst.pv), expect, 1e-9) << "trial " << trial;
  }
}

TEST(Wasserstein, MetricProperties) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_margin_gap_instance(rng);
    auto third = inst.pv;
    third.points += random_matrix(third.points.rows(), third.points.cols(), rng);
    const double pq = conditional_wasserstein(inst.p, inst.pv);
    EXPECT_NEAR(pq, conditional_wasserstein(inst.pv, inst.p), 1e-12);
    EXPECT_NEAR(conditional_wasserstein(inst.p, inst.p), 0.0, 1e-15);
    EXPECT_LE(conditional_wasserstein(inst.p, third),
              pq + conditional_wasserstein(inst.pv, third) + 1e-12);
    EXPECT_NEAR(conditional_wasserstein(inst.p, inst.pv, GroundMetric{2.5}), 2.5 * pq, 1e-9);
  }
}

TEST(Wasserstein, TranslationCostsTheShift) {
  Rng rng(6);
  const auto inst = random_margin_gap_instance(rng);
  auto moved = inst.p;
  RowVector t = RowVector::Zero(inst.p.points.cols());
  t(0) = 0.75;
  moved.points.rowwise() += t;
  EXPECT_LE(conditional_wasserstein(inst.p, moved), 0.75 + 1e-12);
}

TEST(Wasserstein, UnsupportedInstances) {
  EXPECT_THROW(conditional_wasserstein(line_dist({0, 1}, {0, 0}), line_dist({0, 1}, {0, 1})),
               UnsupportedInstanceError);
  std::vector<double> xs(11, 0.0);
  const auto big = line_dist(xs, Labels(11, 0));
  EXPECT_THROW(conditional_wasserstein(big, big), UnsupportedInstanceError);
}

TEST(MarginGap, IdenticalDistributionsGiveZeroBothSides) {
  Rng rng(7);
  const auto inst = random_margin_gap_instance(rng);
  const auto r = margin_gap_check(inst.classifier, inst.p, inst.p, inst.candidates);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_NEAR(r.rhs, 0.0, 1e-15);
  EXPECT_TRUE(r.holds);
}

TEST(MarginGap, HoldsOnRandomInstances) {
  Rng rng(8);
  double min_slack = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = random_margin_gap_instance(rng);
    const auto r = margin_gap_check(inst.classifier, inst.p, inst.pv, inst.candidates);
    EXPECT_TRUE(r.holds) << "trial " << trial << " lhs " << r.lhs << " rhs " << r.rhs;
    min_slack = std::min(min_slack, r.slack());
  }
  EXPECT_GE(min_slack, -1e-9);
}

TEST(MarginGap, HoldsUnderScaledMetric) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_margin_gap_instance(rng);
    const auto base = margin_gap_check(inst.classifier, inst.p, inst.pv, inst.candidates);
    const auto scaled = margin_gap_check(inst.classifier, inst.p, inst.pv, inst.candidates, GroundMetric{3.0});
    EXPECT_TRUE(scaled.holds);
    EXPECT_NEAR(scaled.lhs, 3.0 * base.lhs, 1e-9);
  }
}

TEST(Export, HeaderOnlyWithoutRows) {
  std::stringstream out;
  FeatureTableWriter w(out, 2);
  w.append(Matrix(0, 2), {}, false);
  EXPECT_EQ(out.str(), "client,label,is_virtual,f0,f1\n");
}

TEST(Export, RoundTripsAtFullPrecision) {
  Rng rng(10);
  const Matrix f = random_matrix(3, 2, rng);
  std::stringstream out;
  FeatureTableWriter w(out, 2);
  w.append(f, {0, 2, 1}, true, 4);
  std::string line;
  std::getline(out, line);
  for (int r = 0; r < 3; ++r) {
    ASSERT_TRUE(std::getline(out, line));
    std::stringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 5u);
    EXPECT_EQ(cells[0], "4");
    EXPECT_EQ(cells[2], "1");
    EXPECT_EQ(std::stod(cells[3]), f(r, 0));
    EXPECT_EQ(std::stod(cells[4]), f(r, 1));
  }
}

TEST(Export, LayerFeaturesAndErrors) {
  const nn::MlpSpec spec{{3, 4, 2}, 2, 0, nn::Activation::kRelu};
  const auto params = nn::init_params(spec, 1);
  Rng rng(11);
  const Matrix x = random_matrix(5, 3, rng);
  EXPECT_EQ(layer_features(spec, params, x, 0), x);
  EXPECT_EQ(layer_features(spec, params, x, 2).cols(), 2);
  EXPECT_THROW(layer_features(spec, params, x, 3), InputError);
  std::stringstream out;
  FeatureTableWriter w(out, 2);
  EXPECT_THROW(w.append(Matrix::Zero(1, 3), {0}, false), ShapeError);
  EXPECT_THROW(w.append(Matrix::Zero(2, 2), {0}, false), ShapeError);
}

}  // namespace
}  // namespace vhl::analysis
