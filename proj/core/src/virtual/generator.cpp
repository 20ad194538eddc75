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


#include "vhl/virtual/generator.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>

#include "vhl/errors.hpp"

namespace vhl::virtual_data {

void VirtualSpec::validate() const {
  if (classes < 1) throw InputError("virtual classes must be at least 1");
  if (per_class < 1) throw InputError("virtual per_class must be at least 1");
  if (base_side < 1 || channels < 1) throw InputError("virtual base_side and channels must be positive");
  if (up_factor < 1) throw InputError("virtual up_factor must be at least 1");
  if (!(sigma > 0.0)) throw InputError("virtual sigma must be positive");
  if (!(mean_separation >= 0.0)) throw InputError("virtual mean_separation must be non-negative");
}

std::vector<double> upsample_nearest(const std::vector<double>& image, int side, int factor) {
  if (factor < 1) throw InputError("upsampling factor must be at least 1");
  if (image.size() != static_cast<std::size_t>(side) * static_cast<std::size_t>(side)) {
    throw ShapeError("image has " + std::to_string(image.size()) + " pixels, expected " + std::to_string(side * side));
  }
  const int out_side = side * factor;
  std::vector<double> out(static_cast<std::size_t>(out_side) * static_cast<std::size_t>(out_side));
  for (int r = 0; r < out_side; ++r)
    for (int c = 0; c < out_side; ++c)
      out[static_cast<std::size_t>(r * out_side + c)] = image[static_cast<std::size_t>((r / factor) * side + c / factor)];
  return out;
}

RowVector upsample_image(const RowVector& image, int side, int channels, int factor) {
  const int plane = side * side;
  if (image.size() != static_cast<Eigen::Index>(plane) * channels) throw ShapeError("image size does not match side/channels");
  const int out_plane = plane * factor * factor;
  RowVector out(static_cast<Eigen::Index>(out_plane) * channels);
  for (int ch = 0; ch < channels; ++ch) {
    std::vector<double> src(image.data() + static_cast<std::ptrdiff_t>(ch) * plane,
                            image.data() + static_cast<std::ptrdiff_t>(ch + 1) * plane);
    const auto up = upsample_nearest(src, side, factor);
    std::copy(up.begin(), up.end(), out.data() + static_cast<std::ptrdiff_t>(ch) * out_plane);
  }
  return out;
}

Matrix place_separated_means(int count, int dim, double separation, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix means(count, dim);
  // Start where the expected pairwise distance equals the separation.
  double scale = separation > 0.0 ? separation / std::sqrt(2.0 * dim) : 1.0;
  for (int attempt = 0;; ++attempt) {
    // Widen the cloud every 100 rejections so low dimensions still terminate.
    if (attempt > 0 && attempt % 100 == 0) scale *= 1.5;
    for (Eigen::Index i = 0; i < means.size(); ++i) means.data()[i] = scale * n01(rng);
    bool ok = true;
    for (int a = 0; a < count && ok; ++a)
      for (int b = a + 1; b < count && ok; ++b) ok = (means.row(a) - means.row(b)).norm() >= separation;
    if (ok) return means;
  }
}

namespace {

VirtualDataset sample_classes(const Matrix& base_means, int per_class, double sigma, Rng& rng,
                              const auto& to_sample_space) {
  std::normal_distribution<double> n01(0.0, 1.0);
  const int classes = static_cast<int>(base_means.rows());
  VirtualDataset out;
  out.data.class_count = classes;
  const Eigen::Index dim = to_sample_space(RowVector(base_means.row(0))).size();
  out.data.features.resize(static_cast<Eigen::Index>(classes) * per_class, dim);
  out.class_means.resize(classes, dim);
  Eigen::Index row = 0;
  for (int c = 0; c < classes; ++c) {
    out.class_means.row(c) = to_sample_space(RowVector(base_means.row(c)));
    for (int i = 0; i < per_class; ++i, ++row) {
      RowVector x = base_means.row(c);
      for (Eigen::Index j = 0; j < x.size(); ++j) x(j) += sigma * n01(rng);
      out.data.features.row(row) = to_sample_space(x);
      out.data.labels.push_back(c);
    }
  }
  return out;
}

}  // namespace

VirtualDataset generate_noise_dataset(const VirtualSpec& spec) {
  spec.validate();
  Rng rng(derive_seed({spec.seed, 0x7E}));
  const Matrix base_means = place_separated_means(spec.classes, spec.base_dim(), spec.mean_separation, rng);
  auto up = [&](const RowVector& x) { return upsample_image(x, spec.base_side, spec.channels, spec.up_factor); };
  VirtualDataset out = sample_classes(base_means, spec.per_class, spec.sigma, rng, up);
  out.spec = spec;
  return out;
}

VirtualDataset generate_vfa_features(int classes, int feature_dim, int per_class, double mean_separation,
                                     double sigma, std::uint64_t seed) {
  if (classes < 1 || per_class < 1 || feature_dim < 1) throw InputError("vfa counts must be positive");
  if (!(sigma > 0.0)) throw InputError("vfa sigma must be positive");
  Rng rng(derive_seed({seed, 0xFA}));
  const Matrix means = place_separated_means(classes, feature_dim, mean_separation, rng);
  VirtualDataset out = sample_classes(means, per_class, sigma, rng, [](const RowVector& x) { return x; });
  out.spec.classes = classes;
  out.spec.per_class = per_class;
  out.spec.mean_separation = mean_separation;
  out.spec.sigma = sigma;
  out.spec.seed = seed;
  out.spec.base_side = 1;
  out.spec.up_factor = 1;
  out.spec.channels = feature_dim;
  return out;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, std::size_t offset) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) throw ParseError(offset + static_cast<std::size_t>(in.gcount()), "container truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_container(std::ostream& out, const data::LabeledDataset& ds) {
  ds.validate();
  const auto hist = ds.class_histogram();
  const std::size_t per_class = hist.front();
  for (std::size_t c = 0; c < hist.size(); ++c) {
    if (hist[c] != per_class) throw InputError("container needs the same number of rows in every class");
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] != static_cast<int>(i / per_class)) throw InputError("container rows must be grouped by class");
  }
  put_u32(out, static_cast<std::uint32_t>(ds.class_count));
  put_u32(out, static_cast<std::uint32_t>(per_class));
  put_u32(out, static_cast<std::uint32_t>(ds.features.cols()));
  for (Eigen::Index r = 0; r < ds.features.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.features.cols(); ++c) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(ds.features(r, c))));
    }
  }
  if (!out) throw Error("failed writing virtual dataset container");
}

data::LabeledDataset read_container(std::istream& in) {
  const std::uint32_t classes = get_u32(in, 0);
  const std::uint32_t per_class = get_u32(in, 4);
  const std::uint32_t dim = get_u32(in, 8);
  if (classes == 0 || per_class == 0 || dim == 0) throw ParseError(0, "container header has a zero count");
  data::LabeledDataset ds;
  ds.class_count = static_cast<int>(classes);
  const Eigen::Index rows = static_cast<Eigen::Index>(classes) * per_class;
  ds.features.resize(rows, dim);
  std::size_t offset = 12;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(dim); ++c, offset += 4) {
      ds.features(r, c) = std::bit_cast<float>(get_u32(in, offset));
    }
    ds.labels.push_back(static_cast<int>(static_cast<std::uint32_t>(r) / per_class));
  }
  return ds;
}

}  // namespace vhl::virtual_data
