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

#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "vhl/errors.hpp"
#include "vhl/nn/finite_diff.hpp"
#include "vhl/nn/losses.hpp"
#include "vhl/nn/mlp.hpp"
#include "vhl/nn/optimizer.hpp"

namespace vhl::nn {
namespace {

using vhl::testing::random_labels;
using vhl::testing::random_matrix;
using vhl::testing::relative_error;

// Straight-line forward pass over std::vector, no Eigen products.
std::vector<std::vector<double>> loop_forward(const MlpSpec& spec, const ModelParams& p,
                                              const std::vector<std::vector<double>>& rows) {
  std::vector<std::vector<double>> out;
  for (auto x : rows) {
    for (int l = 0; l < spec.linear_layers(); ++l) {
      const auto w = p.weight(l);
      const auto b = p.bias(l);
      std::vector<double> y(static_cast<std::size_t>(w.rows()));
      for (Eigen::Index o = 0; o < w.rows(); ++o) {
        double s = b(o);
        for (Eigen::Index i = 0; i < w.cols(); ++i) s += w(o, i) * x[static_cast<std::size_t>(i)];
        if (l < spec.hidden_layers()) s = spec.activation == Activation::kRelu ? std::max(0.0, s) : std::tanh(s);
        y[static_cast<std::size_t>(o)] = s;
      }
      x = y;
    }
    out.push_back(x);
  }
  return out;
}

TEST(Forward, ZeroNetworkGivesZeroLogitsAndFeatures) {
  MlpSpec spec{{3, 5, 4}, 3, 0, Activation::kRelu};
  const auto params = ModelParams::zeros(spec);
  Rng rng(1);
  const auto trace = forward(spec, params, random_matrix(6, 3, rng));
  EXPECT_EQ(trace.logits.norm(), 0.0);
  EXPECT_EQ(trace.features(1).norm(), 0.0);
  EXPECT_EQ(trace.features(2).norm(), 0.0);
}

TEST(Forward, IdentityLayerAppliesTanh) {
  MlpSpec spec{{3, 3}, 2, 0, Activation::kTanh};
  auto params = ModelParams::zeros(spec);
  params.weight(0).setIdentity();
  Matrix x(1, 3);
  x << 0.3, -1.2, 2.5;
  const auto trace = forward(spec, params, x);
  for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(trace.features(1)(0, j), std::tanh(x(0, j)));
}

TEST(Forward, Seed42NetworkMatchesLoopOracle) {
  MlpSpec spec{{2, 4}, 3, 0, Activation::kRelu};
  const auto params = init_params(spec, 42);
  Matrix x(2, 2);
  x << 0.5, -1.5, 2.0, 0.25;
  const auto trace = forward(spec, params, x);
  const auto oracle = loop_forward(spec, params, {{0.5, -1.5}, {2.0, 0.25}});
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(trace.logits(r, c), oracle[r][c], 1e-12);
}

TEST(Forward, RandomDeepNetworksMatchLoopOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto spec = vhl::testing::small_spec(rng, trial % 3);
    spec.activation = trial % 2 ? Activation::kRelu : Activation::kTanh;
    const auto params = init_params(spec, 100 + trial);
    const Matrix x = random_matrix(4, spec.input_dim(), rng);
    std::vector<std::vector<double>> rows;
    for (int r = 0; r < 4; ++r) rows.emplace_back(x.row(r).data(), x.row(r).data() + x.cols());
    const auto trace = forward(spec, params, x);
    const auto oracle = loop_forward(spec, params, rows);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < spec.output_dim(); ++c) EXPECT_NEAR(trace.logits(r, c), oracle[r][c], 1e-12);
  }
}

TEST(Forward, WrongInputWidthNamesLayer) {
  MlpSpec spec{{3, 4}, 2, 0, Activation::kRelu};
  const auto params = ModelParams::zeros(spec);
  try {
    forward(spec, params, Matrix::Zero(2, 5));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("layer"), std::string::npos);
  }
}

TEST(Forward, NonConformingParamsRejected) {
  MlpSpec a{{3, 4}, 2, 0, Activation::kRelu};
  MlpSpec b{{3, 5}, 2, 0, Activation::kRelu};
  EXPECT_THROW(forward(a, ModelParams::zeros(b), Matrix::Zero(1, 3)), ShapeError);
}

TEST(Forward, HeadWidthIncludesVirtualClasses) {
  MlpSpec spec{{3, 4}, 10, 7, Activation::kRelu};
  const auto trace = forward(spec, init_params(spec, 1), Matrix::Ones(2, 3));
  EXPECT_EQ(trace.logits.cols(), 17);
}

TEST(Predict, UsesNaturalLogitsOnly) {
  Matrix logits(2, 4);
  logits << 0.1, 0.9, 0.2, 5.0,  //
      0.7, 0.1, 0.2, 9.0;
  EXPECT_EQ(predict(logits, 2), (std::vector<int>{1, 0}));
}

TEST(Params, FlattenUnflattenIdentity) {
  MlpSpec spec{{4, 6, 5}, 3, 2, Activation::kRelu};
  const auto p = init_params(spec, 9);
  const auto flat = p.flatten();
  const auto q = ModelParams::unflatten(spec, flat);
  EXPECT_EQ(q.values(), p.values());
  EXPECT_EQ(q.flatten(), flat);
  EXPECT_EQ(flat.size(), static_cast<std::size_t>(4 * 6 + 6 + 6 * 5 + 5 + 5 * 5 + 5));
}

TEST(Params, UnflattenWrongSizeThrows) {
  MlpSpec spec{{2, 2}, 2, 0, Activation::kRelu};
  std::vector<double> flat(3, 0.0);
  EXPECT_THROW(ModelParams::unflatten(spec, flat), ShapeError);
}

TEST(Params, InitWithinFanInBound) {
  MlpSpec spec{{16, 8}, 4, 0, Activation::kRelu};
  const auto p = init_params(spec, 5);
  EXPECT_LE(p.weight(0).cwiseAbs().maxCoeff(), 1.0 / 4.0);
  EXPECT_LE(p.weight(1).cwiseAbs().maxCoeff(), 1.0 / std::sqrt(8.0));
  EXPECT_EQ(init_params(spec, 5).values(), p.values());
  EXPECT_NE(init_params(spec, 6).values(), p.values());
}

// Brute-force softmax NLL in long double.
double ce_oracle(const Matrix& logits, const Labels& labels) {
  long double total = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    long double z = 0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) z += std::exp(static_cast<long double>(logits(r, c)));
    total += -std::log(std::exp(static_cast<long double>(logits(r, labels[r]))) / z);
  }
  return static_cast<double>(total / logits.rows());
}

TEST(CrossEntropy, UniformLogitsGiveLogC) {
  for (int c : {2, 3, 10, 20}) {
    const Matrix logits = Matrix::Constant(5, c, 0.37);
    const auto r = cross_entropy(logits, Labels{0, 1, 1, 0, c - 1});
    EXPECT_NEAR(r.loss, std::log(static_cast<double>(c)), 1e-12);
  }
}

TEST(CrossEntropy, ConfidentCorrectLogitsNearZero) {
  Matrix logits = Matrix::Zero(3, 4);
  const Labels y{2, 0, 3};
  for (int r = 0; r < 3; ++r) logits(r, y[r]) = 50.0;
  EXPECT_LT(cross_entropy(logits, y).loss, 1e-6);
}

TEST(CrossEntropy, MatchesBruteForceSoftmax) {
  Rng rng(11);
  const Matrix logits = random_matrix(3, 4, rng, 2.0);
  const Labels y{0, 2, 1};
  EXPECT_NEAR(cross_entropy(logits, y).loss, ce_oracle(logits, y), 1e-12);
}

TEST(CrossEntropy, GradientIsSoftmaxMinusOnehotOverN) {
  Rng rng(12);
  const Matrix logits = random_matrix(3, 4, rng);
  const Labels y{1, 1, 3};
  const auto r = cross_entropy(logits, y);
  for (int i = 0; i < 3; ++i) {
    const RowVector e = logits.row(i).array().exp();
    for (int c = 0; c < 4; ++c) {
      const double expect = (e(c) / e.sum() - (c == y[i] ? 1.0 : 0.0)) / 3.0;
      EXPECT_NEAR(r.grad(i, c), expect, 1e-14);
    }
  }
}

TEST(CrossEntropy, OutOfRangeLabelThrows) {
  EXPECT_THROW(cross_entropy(Matrix::Zero(2, 3), Labels{0, 3}), InputError);
  EXPECT_THROW(cross_entropy(Matrix::Zero(2, 3), Labels{-1, 0}), InputError);
  EXPECT_THROW(cross_entropy(Matrix::Zero(0, 3), Labels{}), InputError);
}

// The SupCon formula written out per anchor with explicit sums.
double supcon_oracle(const Matrix& f, const Labels& y, double tau, const std::vector<bool>& frozen) {
  const Eigen::Index n = f.rows();
  std::vector<RowVector> z;
  for (Eigen::Index i = 0; i < n; ++i) z.push_back(f.row(i) / f.row(i).norm());
  double total = 0.0;
  int anchors = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!frozen.empty() && frozen[i]) continue;
    double denom = 0.0;
    for (Eigen::Index a = 0; a < n; ++a)
      if (a != i) denom += std::exp(z[i].dot(z[a]) / tau);
    double sum = 0.0;
    int positives = 0;
    for (Eigen::Index p = 0; p < n; ++p) {
      if (p == i || y[p] != y[i]) continue;
      sum += std::log(std::exp(z[i].dot(z[p]) / tau) / denom);
      ++positives;
    }
    if (positives == 0) continue;
    total += -sum / positives;
    ++anchors;
  }
  return anchors ? total / anchors : 0.0;
}

TEST(SupCon, TwoRowsSameLabelIsZero) {
  Matrix f(2, 3);
  f << 1, 2, 3, -1, 0.5, 2;
  EXPECT_NEAR(supcon_loss(f, {4, 4}, 0.07).loss, 0.0, 1e-12);
}

TEST(SupCon, FourRowsMatchesFormula) {
  Matrix f(4, 3);
  f << 1.0, 0.2, -0.3,  //
      0.8, 0.1, 0.0,    //
      -0.2, 1.0, 0.4,   //
      0.1, 0.7, 0.9;
  const Labels y{0, 0, 1, 1};
  const auto r = supcon_loss(f, y, 0.07);
  EXPECT_NEAR(r.loss, supcon_oracle(f, y, 0.07, {}), 1e-10);
  EXPECT_EQ(r.anchors, 4);
}

TEST(SupCon, FrozenRowsGetExactlyZeroGradient) {
  Rng rng(21);
  const Matrix f = random_matrix(8, 5, rng);
  const Labels y{0, 1, 2, 0, 0, 1, 2, 1};
  std::vector<bool> frozen{false, false, false, false, true, true, true, true};
  const auto r = supcon_loss(f, y, 0.07, frozen);
  for (int i = 4; i < 8; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_EQ(r.grad(i, j), 0.0);
  EXPECT_NEAR(r.loss, supcon_oracle(f, y, 0.07, frozen), 1e-10);
}

TEST(SupCon, InvariantToPositiveRowRescaling) {
  Rng rng(22);
  const Matrix f = random_matrix(6, 4, rng);
  const Labels y{0, 0, 1, 1, 2, 2};
  Matrix g = f;
  std::uniform_real_distribution<double> s(0.1, 10.0);
  for (int i = 0; i < 6; ++i) g.row(i) *= s(rng);
  EXPECT_NEAR(supcon_loss(f, y, 0.1).loss, supcon_loss(g, y, 0.1).loss, 1e-9);
}

TEST(SupCon, SkipsAnchorsWithoutPositives) {
  Rng rng(23);
  const Matrix f = random_matrix(3, 4, rng);
  const auto r = supcon_loss(f, {0, 1, 2}, 0.07);
  EXPECT_EQ(r.anchors, 0);
  EXPECT_EQ(r.loss, 0.0);
  EXPECT_EQ(r.grad.norm(), 0.0);
}

TEST(SupCon, Errors) {
  Matrix f = Matrix::Ones(3, 2);
  EXPECT_THROW(supcon_loss(f, {0, 0, 1}, 0.07, {true, true, true}), InputError);
  f.row(1).setZero();
  EXPECT_THROW(supcon_loss(f, {0, 0, 1}, 0.07), NumericError);
  EXPECT_THROW(supcon_loss(Matrix::Ones(1, 2), {0}, 0.07), InputError);
  EXPECT_THROW(supcon_loss(Matrix::Ones(2, 2), {0, 0}, 0.0), InputError);
}

TEST(SupCon, GradientMatchesFiniteDifferences) {
  Rng rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 8)(rng);
    const int d = std::uniform_int_distribution<int>(2, 8)(rng);
    const Matrix f = random_matrix(n, d, rng);
    const Labels y = random_labels(static_cast<std::size_t>(n), 3, rng);
    std::vector<bool> frozen(static_cast<std::size_t>(n), false);
    frozen[0] = trial % 2 == 1;
    if (n > 2 && std::all_of(frozen.begin(), frozen.end(), [](bool b) { return b; })) frozen[1] = false;
    const double tau = 0.07 + 0.1 * (trial % 3);
    const auto r = supcon_loss(f, y, tau, frozen);
    Matrix fd(n, d);
    const double eps = 1e-6;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) {
        if (frozen[static_cast<std::size_t>(i)]) {
          fd(i, j) = 0.0;
          continue;
        }
        Matrix a = f, b = f;
        a(i, j) += eps;
        b(i, j) -= eps;
        fd(i, j) = (supcon_loss(a, y, tau, frozen).loss - supcon_loss(b, y, tau, frozen).loss) / (2 * eps);
      }
    }
    EXPECT_LT(relative_error(Eigen::Map<const Vector>(r.grad.data(), r.grad.size()),
                             Eigen::Map<const Vector>(fd.data(), fd.size())),
              1e-5)
        << "trial " << trial;
  }
}

TEST(Backward, ZeroOutputGradientGivesZero) {
  MlpSpec spec{{3, 4, 2}, 3, 0, Activation::kRelu};
  const auto params = init_params(spec, 1);
  Rng rng(2);
  const auto trace = forward(spec, params, random_matrix(5, 3, rng));
  EXPECT_EQ(backward(spec, params, trace, Matrix::Zero(5, 3)).values().norm(), 0.0);
}

TEST(Backward, SingleLinearLayerByHand) {
  // Input width 2, feature layer width 2, head 2 classes. Only the head is
  // checked: dW = H^T-style outer products of the feature rows and the upstream gradient.
  MlpSpec spec{{2, 2}, 2, 0, Activation::kTanh};
  const auto params = init_params(spec, 3);
  Matrix x(2, 2);
  x << 0.5, -0.25, 1.0, 2.0;
  const auto trace = forward(spec, params, x);
  Matrix g(2, 2);
  g << 1.0, -2.0, 0.5, 0.25;
  const auto grad = backward(spec, params, trace, g);
  const Matrix& h = trace.features(1);
  for (int o = 0; o < 2; ++o) {
    for (int i = 0; i < 2; ++i) {
      const double expect = h(0, i) * g(0, o) + h(1, i) * g(1, o);
      EXPECT_NEAR(grad.weight(1)(o, i), expect, 1e-12);
    }
    EXPECT_NEAR(grad.bias(1)(o), g(0, o) + g(1, o), 1e-12);
  }
}

TEST(Backward, ShapeMismatchThrows) {
  MlpSpec spec{{3, 4}, 3, 0, Activation::kRelu};
  const auto params = init_params(spec, 1);
  const auto trace = forward(spec, params, Matrix::Ones(2, 3));
  EXPECT_THROW(backward(spec, params, trace, Matrix::Zero(3, 3)), ShapeError);
  EXPECT_THROW(backward(spec, params, trace, Matrix(), {{1, Matrix::Zero(2, 5)}}), ShapeError);
}

TEST(Backward, FeatureInjectionOnlyReachesUpstreamLayers) {
  MlpSpec spec{{3, 4, 4, 3}, 2, 0, Activation::kTanh};
  const auto params = init_params(spec, 8);
  Rng rng(9);
  const auto trace = forward(spec, params, random_matrix(3, 3, rng));
  const auto grad = backward(spec, params, trace, Matrix(), {{2, random_matrix(3, 4, rng)}});
  EXPECT_GT(grad.weight(0).norm(), 0.0);
  EXPECT_GT(grad.weight(1).norm(), 0.0);
  EXPECT_EQ(grad.weight(2).norm(), 0.0);
  EXPECT_EQ(grad.weight(3).norm(), 0.0);
}

TEST(Backward, MatchesFiniteDifferencesOnRandomNetworks) {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const auto spec = vhl::testing::small_spec(rng);
    const auto params = init_params(spec, 500 + trial);
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    const Matrix x = random_matrix(n, spec.input_dim(), rng);
    const Labels y = random_labels(static_cast<std::size_t>(n), spec.natural_classes, rng);
    const auto trace = forward(spec, params, x);
    const auto analytic = backward(spec, params, trace, cross_entropy(trace.logits, y).grad);
    const auto numeric = finite_diff_grad(params, [&](const ModelParams& p) {
      return cross_entropy(forward(spec, p, x).logits, y).loss;
    });
    EXPECT_LT(relative_error(analytic.values(), numeric.values()), 1e-5) << "trial " << trial;
  }
}

TEST(FiniteDiff, QuadraticGivesParams) {
  MlpSpec spec{{3, 2}, 2, 0, Activation::kRelu};
  const auto p = init_params(spec, 4);
  const auto g = finite_diff_grad(p, [](const ModelParams& q) { return 0.5 * q.values().squaredNorm(); });
  EXPECT_LT((g.values() - p.values()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FiniteDiff, ConstantGivesZero) {
  MlpSpec spec{{3, 2}, 2, 0, Activation::kRelu};
  const auto g = finite_diff_grad(init_params(spec, 4), [](const ModelParams&) { return 3.5; });
  EXPECT_EQ(g.values().norm(), 0.0);
}

TEST(FiniteDiff, Seed7CrossEntropyAgreesWithBackward) {
  MlpSpec spec{{4, 6, 5}, 3, 0, Activation::kTanh};
  const auto params = init_params(spec, 7);
  Rng rng(7);
  const Matrix x = random_matrix(6, 4, rng);
  const Labels y{0, 1, 2, 2, 1, 0};
  const auto trace = forward(spec, params, x);
  const auto analytic = backward(spec, params, trace, cross_entropy(trace.logits, y).grad);
  const auto numeric =
      finite_diff_grad(params, [&](const ModelParams& p) { return cross_entropy(forward(spec, p, x).logits, y).loss; });
  EXPECT_LT(relative_error(analytic.values(), numeric.values()), 1e-5);
}

TEST(FiniteDiff, NonFiniteLossThrows) {
  MlpSpec spec{{2, 2}, 2, 0, Activation::kRelu};
  EXPECT_THROW(finite_diff_grad(init_params(spec, 1), [](const ModelParams&) { return std::nan(""); }), NumericError);
  EXPECT_THROW(finite_diff_grad(init_params(spec, 1), [](const ModelParams&) { return 0.0; }, 0.0), InputError);
}

TEST(Sgd, ZeroEverythingLeavesParams) {
  MlpSpec spec{{3, 2}, 2, 0, Activation::kRelu};
  auto p = init_params(spec, 1);
  const auto before = p.values();
  MomentumState st;
  sgd_momentum_step(p, Gradient::zeros(spec), {0.1, 0.9, 0.0}, st);
  EXPECT_EQ(p.values(), before);
}

TEST(Sgd, PlainSgdReduction) {
  MlpSpec spec{{3, 2}, 2, 0, Activation::kRelu};
  auto p = init_params(spec, 1);
  const auto before = p.values();
  Gradient g = init_params(spec, 2).as<GradientTag>();
  MomentumState st;
  sgd_momentum_step(p, g, {0.05, 0.0, 0.0}, st);
  EXPECT_LT((p.values() - (before - 0.05 * g.values())).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Sgd, TwoStepMomentumRecurrence) {
  MlpSpec spec{{3, 2}, 2, 0, Activation::kRelu};
  auto p = init_params(spec, 1);
  Gradient g = init_params(spec, 2).as<GradientTag>();
  const SgdConfig cfg{0.1, 0.9, 0.0};
  MomentumState st;
  const Vector w0 = p.values();
  sgd_momentum_step(p, g, cfg, st);
  const Vector w1 = p.values();
  sgd_momentum_step(p, g, cfg, st);
  const Vector second = w1 - p.values();
  EXPECT_LT((w0 - w1 - 0.1 * g.values()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((second - 0.1 * 1.9 * g.values()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Sgd, WeightDecayEntersBuffer) {
  MlpSpec spec{{2, 2}, 2, 0, Activation::kRelu};
  auto p = init_params(spec, 3);
  const Vector w0 = p.values();
  MomentumState st;
  sgd_momentum_step(p, Gradient::zeros(spec), {0.5, 0.9, 1e-2}, st);
  EXPECT_LT((p.values() - (w0 - 0.5 * 1e-2 * w0)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Sgd, NonFiniteGradientNamesIndex) {
  MlpSpec spec{{2, 2}, 2, 0, Activation::kRelu};
  auto p = init_params(spec, 3);
  auto g = Gradient::zeros(spec);
  g.values()(4) = std::numeric_limits<double>::infinity();
  MomentumState st;
  try {
    sgd_momentum_step(p, g, {}, st);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("4"), std::string::npos);
  }
}

TEST(Sgd, InvalidHyperparametersRejected) {
  MlpSpec spec{{2, 2}, 2, 0, Activation::kRelu};
  auto p = init_params(spec, 3);
  MomentumState st;
  EXPECT_THROW(sgd_momentum_step(p, Gradient::zeros(spec), {-0.1, 0.9, 0.0}, st), InputError);
  EXPECT_THROW(sgd_momentum_step(p, Gradient::zeros(spec), {0.1, 1.0, 0.0}, st), InputError);
  EXPECT_THROW(sgd_momentum_step(p, Gradient::zeros(spec), {0.1, 0.9, -1.0}, st), InputError);
}

}  // namespace
}  // namespace vhl::nn
