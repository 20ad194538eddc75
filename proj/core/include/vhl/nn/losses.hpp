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

#include <vector>

#include "vhl/common.hpp"

namespace vhl::nn {

struct LossAndGrad {
  double loss = 0.0;
  Matrix grad;  // same shape as the loss input
};

// Mean over rows of -log softmax(logits)[label]. Gradient is
// (softmax - onehot) / rows.
LossAndGrad cross_entropy(const Matrix& logits, const Labels& labels);

struct SupConResult {
  double loss = 0.0;
  Matrix grad;
  int anchors = 0;  // anchors that had at least one positive
};

inline constexpr double kDefaultTemperature = 0.07;

// Supervised contrastive loss on L2-normalised rows of `features`.
//
// Anchors are the rows with frozen[i] == false that have at least one other
// row with the same label; the loss is averaged over them. Frozen rows take
// part as positives/negatives but are constants: their gradient rows are 0.
// An empty `frozen` means nothing is frozen.
SupConResult supcon_loss(const Matrix& features, const Labels& labels, double temperature,
                         const std::vector<bool>& frozen = {});

}  // namespace vhl::nn
