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


#include "vhl/analysis/export.hpp"

#include <ostream>

#include <fmt/format.h>

#include "vhl/errors.hpp"

namespace vhl::analysis {

FeatureTableWriter::FeatureTableWriter(std::ostream& out, int dim) : out_(out), dim_(dim) {
  out_ << "client,label,is_virtual";
  for (int j = 0; j < dim_; ++j) out_ << ",f" << j;
  out_ << '\n';
  if (!out_) throw Error("feature sink rejected the header");
}

void FeatureTableWriter::append(const Matrix& features, const Labels& labels, bool is_virtual,
                                std::optional<int> client) {
  if (features.cols() != dim_ && features.rows() > 0) throw ShapeError("feature width differs from the table header");
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) throw ShapeError("feature/label count mismatch");
  std::string line;
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    line.clear();
    if (client) line += std::to_string(*client);
    fmt::format_to(std::back_inserter(line), ",{},{}", labels[static_cast<std::size_t>(r)], is_virtual ? 1 : 0);
    for (Eigen::Index c = 0; c < features.cols(); ++c) fmt::format_to(std::back_inserter(line), ",{:.17g}", features(r, c));
    line += '\n';
    out_ << line;
  }
  if (!out_) throw Error("feature sink write failed");
}

Matrix layer_features(const nn::MlpSpec& spec, const nn::ModelParams& params, const Matrix& inputs, int layer) {
  if (layer < 0 || layer > spec.hidden_layers()) {
    throw InputError("layer " + std::to_string(layer) + " outside 0.." + std::to_string(spec.hidden_layers()));
  }
  if (inputs.rows() == 0) return Matrix(0, spec.layer_widths[static_cast<std::size_t>(layer)]);
  return nn::forward(spec, params, inputs).features(layer);
}

void export_features(const nn::MlpSpec& spec, const nn::ModelParams& params, const data::LabeledDataset& dataset,
                     int layer, std::ostream& sink, bool is_virtual, std::optional<int> client) {
  const Matrix feats = layer_features(spec, params, dataset.features, layer);
  FeatureTableWriter writer(sink, spec.layer_widths[static_cast<std::size_t>(layer)]);
  writer.append(feats, dataset.labels, is_virtual, client);
}

}  // namespace vhl::analysis
