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

#include <iosfwd>
#include <optional>

#include "vhl/data/dataset.hpp"
#include "vhl/nn/mlp.hpp"

namespace vhl::analysis {

// Writes `client,label,is_virtual,f0,...,f{d-1}` rows. The header goes out on
// construction, so a writer that never receives rows leaves a header-only
// table. Values use 17 significant digits.
class FeatureTableWriter {
 public:
  FeatureTableWriter(std::ostream& out, int dim);

  void append(const Matrix& features, const Labels& labels, bool is_virtual, std::optional<int> client = std::nullopt);

 private:
  std::ostream& out_;
  int dim_;
};

// Features of every row of `dataset` at trace layer `layer` (0 is the input,
// hidden_layers() the feature layer) as a complete table.
void export_features(const nn::MlpSpec& spec, const nn::ModelParams& params, const data::LabeledDataset& dataset,
                     int layer, std::ostream& sink, bool is_virtual = false, std::optional<int> client = std::nullopt);

// Network features of `dataset` at `layer`.
Matrix layer_features(const nn::MlpSpec& spec, const nn::ModelParams& params, const Matrix& inputs, int layer);

}  // namespace vhl::analysis
