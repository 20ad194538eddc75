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

#include <sstream>

#include "vhl/data/dataset.hpp"
#include "vhl/errors.hpp"
#include "vhl/virtual/generator.hpp"

namespace vhl::virtual_data {
namespace {

TEST(Upsample, FactorOneIsIdentity) {
  const std::vector<double> img{1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_EQ(upsample_nearest(img, 3, 1), img);
}

TEST(Upsample, SinglePixelFillsBlock) {
  EXPECT_EQ(upsample_nearest({2.5}, 1, 3), std::vector<double>(9, 2.5));
}

TEST(Upsample, TwoByTwoCellByCell) {
  const double a = 1, b = 2, c = 3, d = 4;
  const std::vector<double> expect{
      a, a, b, b,  //
      a, a, b, b,  //
      c, c, d, d,  //
      c, c, d, d,
  };
  EXPECT_EQ(upsample_nearest({a, b, c, d}, 2, 2), expect);
}

TEST(Upsample, ChannelPlanesAreIndependent) {
  RowVector img(8);
  img << 1, 2, 3, 4, 10, 20, 30, 40;
  const RowVector up = upsample_image(img, 2, 2, 2);
  ASSERT_EQ(up.size(), 32);
  EXPECT_EQ(up(0), 1);
  EXPECT_EQ(up(3), 2);
  EXPECT_EQ(up(15), 4);
  EXPECT_EQ(up(16), 10);
  EXPECT_EQ(up(31), 40);
}

TEST(Noise, DefaultGeometryIs32By32) {
  VirtualSpec spec;
  spec.per_class = 2;
  const auto v = generate_noise_dataset(spec);
  EXPECT_EQ(v.data.dim(), 32 * 32 * 3);
  EXPECT_EQ(v.data.size(), 20u);
}

TEST(Noise, VanishingSigmaGivesUpsampledMeans) {
  VirtualSpec spec;
  spec.classes = 3;
  spec.per_class = 4;
  spec.base_side = 2;
  spec.up_factor = 3;
  spec.channels = 2;
  spec.sigma = 1e-12;
  spec.seed = 5;
  const auto v = generate_noise_dataset(spec);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 4; ++i) {
      EXPECT_LT((v.data.features.row(c * 4 + i) - v.class_means.row(c)).cwiseAbs().maxCoeff(), 1e-9);
    }
  // Class means are upsampled: every 3x3 block in a plane is constant.
  EXPECT_EQ(v.class_means(0, 0), v.class_means(0, 1));
  EXPECT_EQ(v.class_means(0, 0), v.class_means(0, 6 + 2));
}

TEST(Noise, LabelMarginalIsUniform) {
  VirtualSpec spec;
  spec.classes = 7;
  spec.per_class = 13;
  spec.base_side = 2;
  spec.up_factor = 1;
  spec.channels = 1;
  const auto v = generate_noise_dataset(spec);
  EXPECT_EQ(v.data.class_histogram(), std::vector<std::size_t>(7, 13));
}

TEST(Noise, SeparableAtTenSigma) {
  for (int classes : {2, 10}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      VirtualSpec spec;
      spec.classes = classes;
      spec.per_class = 50;
      spec.seed = seed;
      EXPECT_EQ(data::nearest_centroid_accuracy(generate_noise_dataset(spec).data), 1.0);
    }
  }
}

TEST(Noise, MeansRespectSeparation) {
  VirtualSpec spec;
  spec.classes = 10;
  spec.per_class = 1;
  spec.base_side = 1;
  spec.up_factor = 1;
  spec.channels = 2;
  spec.mean_separation = 3.0;
  const auto v = generate_noise_dataset(spec);
  for (int a = 0; a < 10; ++a)
    for (int b = a + 1; b < 10; ++b) EXPECT_GE((v.class_means.row(a) - v.class_means.row(b)).norm(), 3.0);
}

TEST(Noise, DeterministicPerSeed) {
  VirtualSpec spec;
  spec.per_class = 3;
  spec.seed = 11;
  EXPECT_EQ(generate_noise_dataset(spec).data.features, generate_noise_dataset(spec).data.features);
  auto other = spec;
  other.seed = 12;
  EXPECT_NE(generate_noise_dataset(other).data.features, generate_noise_dataset(spec).data.features);
}

TEST(Noise, InvalidSpecRejected) {
  VirtualSpec spec;
  spec.sigma = 0.0;
  EXPECT_THROW(generate_noise_dataset(spec), InputError);
  spec.sigma = 1.0;
  spec.classes = 0;
  EXPECT_THROW(generate_noise_dataset(spec), InputError);
  spec.classes = 2;
  spec.up_factor = 0;
  EXPECT_THROW(generate_noise_dataset(spec), InputError);
}

TEST(Vfa, ShapeAndDeterminism) {
  const auto a = generate_vfa_features(10, 64, 5, 10.0, 1.0, 3);
  EXPECT_EQ(a.data.features.rows(), 50);
  EXPECT_EQ(a.data.features.cols(), 64);
  EXPECT_EQ(a.data.features, generate_vfa_features(10, 64, 5, 10.0, 1.0, 3).data.features);
}

TEST(Vfa, EmpiricalMeansWithinStandardErrorBound) {
  const int per_class = 256;
  const double sigma = 1.0;
  const auto v = generate_vfa_features(4, 6, per_class, 10.0, sigma, 17);
  for (int c = 0; c < 4; ++c) {
    const RowVector mean = v.data.features.middleRows(c * per_class, per_class).colwise().mean();
    const double bound = 4.0 * sigma / std::sqrt(static_cast<double>(per_class));
    EXPECT_LT((mean - v.class_means.row(c)).cwiseAbs().maxCoeff(), bound) << "class " << c;
  }
  EXPECT_EQ(data::nearest_centroid_accuracy(v.data), 1.0);
}

TEST(Container, RoundTripsAtFloatPrecision) {
  VirtualSpec spec;
  spec.classes = 3;
  spec.per_class = 2;
  spec.base_side = 2;
  spec.up_factor = 2;
  spec.channels = 1;
  const auto v = generate_noise_dataset(spec);
  std::stringstream buf;
  write_container(buf, v.data);
  EXPECT_EQ(buf.str().size(), 12u + 6u * 16u * 4u);
  const auto back = read_container(buf);
  EXPECT_EQ(back.labels, v.data.labels);
  EXPECT_EQ(back.class_count, 3);
  const Matrix rounded = v.data.features.cast<float>().cast<double>();
  EXPECT_EQ(back.features, rounded);
}

TEST(Container, TruncationDetected) {
  data::LabeledDataset ds;
  ds.class_count = 2;
  ds.features = Matrix::Ones(2, 3);
  ds.labels = {0, 1};
  std::stringstream buf;
  write_container(buf, ds);
  std::string bytes = buf.str();
  bytes.pop_back();
  std::stringstream cut(bytes);
  EXPECT_THROW(read_container(cut), ParseError);
}

}  // namespace
}  // namespace vhl::virtual_data
