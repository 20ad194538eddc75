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


#include "vhl/nn/finite_diff.hpp"

#include <cmath>
#include <string>

namespace vhl::nn {

Gradient finite_diff_grad(const ModelParams& params, const ScalarLoss& loss, double eps) {
  if (!(eps > 0.0)) throw InputError("finite difference step must be positive");
  Gradient g(params.layout());
  ModelParams probe = params;
  Vector& v = probe.values();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double orig = v(i);
    v(i) = orig + eps;
    const double up = loss(probe);
    v(i) = orig - eps;
    const double down = loss(probe);
    v(i) = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("non-finite loss while perturbing parameter " + std::to_string(i));
    }
    g.values()(i) = (up - down) / (2.0 * eps);
  }
  return g;
}

}  // namespace vhl::nn
