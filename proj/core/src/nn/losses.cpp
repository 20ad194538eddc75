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


#include "vhl/nn/losses.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "vhl/errors.hpp"

namespace vhl::nn {

LossAndGrad cross_entropy(const Matrix& logits, const Labels& labels) {
  const Eigen::Index n = logits.rows();
  if (n == 0) throw InputError("cross_entropy needs at least one row");
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " + std::to_string(n) + " rows");
  }
  LossAndGrad out;
  out.grad.resize(n, logits.cols());
  double total = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    if (y < 0 || y >= logits.cols()) {
      throw InputError("label " + std::to_string(y) + " at row " + std::to_string(r) + " outside [0, " +
                       std::to_string(logits.cols()) + ")");
    }
    const double m = logits.row(r).maxCoeff();
    auto e = (logits.row(r).array() - m).exp();
    const double z = e.sum();
    total += std::log(z) + m - logits(r, y);
    out.grad.row(r) = e / z;
    out.grad(r, y) -= 1.0;
  }
  out.grad /= static_cast<double>(n);
  out.loss = total / static_cast<double>(n);
  return out;
}

SupConResult supcon_loss(const Matrix& features, const Labels& labels, double temperature,
                         const std::vector<bool>& frozen) {
  const Eigen::Index n = features.rows();
  if (n < 2) throw InputError("supcon_loss needs at least 2 rows");
  if (!(temperature > 0.0)) throw InputError("supcon_loss temperature must be positive");
  if (static_cast<Eigen::Index>(labels.size()) != n) throw ShapeError("supcon_loss: label count differs from row count");
  if (!frozen.empty() && static_cast<Eigen::Index>(frozen.size()) != n) {
    throw ShapeError("supcon_loss: frozen mask length differs from row count");
  }
  auto is_frozen = [&](Eigen::Index i) { return !frozen.empty() && frozen[static_cast<std::size_t>(i)]; };

  bool any_free = false;
  for (Eigen::Index i = 0; i < n; ++i) any_free = any_free || !is_frozen(i);
  if (!any_free) throw InputError("supcon_loss: every row is frozen, no anchors");

  Vector norms = features.rowwise().norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(norms(i) > 0.0) || !std::isfinite(norms(i))) {
      throw NumericError("supcon_loss: feature row " + std::to_string(i) + " cannot be normalised (norm " +
                         std::to_string(norms(i)) + ")");
    }
  }
  const Matrix z = norms.cwiseInverse().asDiagonal() * features;
  const Matrix sim = (z * z.transpose()) / temperature;

  // coeff(i, a) = dL/dsim(i, a) before averaging over anchors.
  Matrix coeff = Matrix::Zero(n, n);
  double total = 0.0;
  int anchors = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (is_frozen(i)) continue;
    int positives = 0;
    for (Eigen::Index a = 0; a < n; ++a)
      if (a != i && labels[static_cast<std::size_t>(a)] == labels[static_cast<std::size_t>(i)]) ++positives;
    if (positives == 0) continue;
    ++anchors;

    double m = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < n; ++a)
      if (a != i) m = std::max(m, sim(i, a));
    double denom = 0.0;
    for (Eigen::Index a = 0; a < n; ++a)
      if (a != i) denom += std::exp(sim(i, a) - m);
    const double log_denom = std::log(denom) + m;

    double pos_sum = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a == i) continue;
      const bool pos = labels[static_cast<std::size_t>(a)] == labels[static_cast<std::size_t>(i)];
      if (pos) pos_sum += sim(i, a) - log_denom;
      const double p = std::exp(sim(i, a) - log_denom);
      coeff(i, a) = (p - (pos ? 1.0 / positives : 0.0)) / temperature;
    }
    total += -pos_sum / positives;
  }

  SupConResult out;
  out.anchors = anchors;
  out.grad = Matrix::Zero(n, features.cols());
  if (anchors == 0) return out;
  out.loss = total / anchors;
  coeff /= static_cast<double>(anchors);

  Matrix dz = coeff * z + coeff.transpose() * z;
  for (Eigen::Index r = 0; r < n; ++r) {
    if (is_frozen(r)) continue;
    const double proj = z.row(r).dot(dz.row(r));
    out.grad.row(r) = (dz.row(r) - proj * z.row(r)) / norms(r);
  }
  return out;
}

}  // namespace vhl::nn
