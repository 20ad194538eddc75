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


#include "vhl/data/idx.hpp"

#include <fstream>
#include <iterator>
#include <limits>

#include "vhl/errors.hpp"

namespace vhl::data {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t off) {
  return (static_cast<std::uint32_t>(b[off]) << 24) | (static_cast<std::uint32_t>(b[off + 1]) << 16) |
         (static_cast<std::uint32_t>(b[off + 2]) << 8) | static_cast<std::uint32_t>(b[off + 3]);
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::string hex32(std::uint32_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s = "0x";
  for (int shift = 28; shift >= 0; shift -= 4) s += digits[(v >> shift) & 0xF];
  return s;
}

}  // namespace

IdxTensor parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) {
    throw ParseError(bytes.size(), "truncated magic number: need 4 bytes, have " + std::to_string(bytes.size()));
  }
  IdxTensor t;
  t.magic = read_be32(bytes, 0);
  std::size_t ndims = 0;
  if (t.magic == kIdxImagesMagic) {
    ndims = 3;
  } else if (t.magic == kIdxLabelsMagic) {
    ndims = 1;
  } else {
    throw ParseError(0, "bad magic number " + hex32(t.magic) + " (expected " + hex32(kIdxImagesMagic) + " or " +
                            hex32(kIdxLabelsMagic) + ")");
  }

  const std::size_t header_end = 4 + 4 * ndims;
  if (bytes.size() < header_end) {
    throw ParseError(bytes.size(), "truncated header: need " + std::to_string(header_end) + " bytes, have " +
                                       std::to_string(bytes.size()));
  }
  std::uint64_t payload = 1;
  for (std::size_t d = 0; d < ndims; ++d) {
    const std::uint32_t n = read_be32(bytes, 4 + 4 * d);
    t.dims.push_back(n);
    // The payload must fit in memory and in a size_t offset.
    if (n != 0 && payload > static_cast<std::uint64_t>(std::numeric_limits<std::uint32_t>::max()) / n) {
      throw ParseError(4 + 4 * d, "dimension product overflows at dimension " + std::to_string(d));
    }
    payload *= n;
  }

  const std::size_t have = bytes.size() - header_end;
  if (have < payload) {
    throw ParseError(bytes.size(), "truncated payload: expected " + std::to_string(payload) + " bytes, got " +
                                       std::to_string(have));
  }
  if (have > payload) {
    throw ParseError(header_end + payload, "trailing data: expected " + std::to_string(payload) + " payload bytes, got " +
                                               std::to_string(have));
  }
  t.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header_end), bytes.end());
  return t;
}

std::vector<std::uint8_t> encode_idx(const IdxTensor& tensor) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 * tensor.dims.size() + tensor.data.size());
  write_be32(out, tensor.magic);
  for (std::uint32_t d : tensor.dims) write_be32(out, d);
  out.insert(out.end(), tensor.data.begin(), tensor.data.end());
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

LabeledDataset idx_to_dataset(const IdxTensor& images, const IdxTensor& labels, int class_count) {
  if (images.magic != kIdxImagesMagic || images.dims.size() != 3) throw InputError("first tensor is not an image file");
  if (labels.magic != kIdxLabelsMagic || labels.dims.size() != 1) throw InputError("second tensor is not a label file");
  if (images.dims[0] != labels.dims[0]) {
    throw ShapeError(std::to_string(images.dims[0]) + " images but " + std::to_string(labels.dims[0]) + " labels");
  }
  const Eigen::Index n = images.dims[0];
  const Eigen::Index d = static_cast<Eigen::Index>(images.dims[1]) * images.dims[2];
  LabeledDataset ds;
  ds.class_count = class_count;
  ds.features.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      ds.features(i, j) = images.data[static_cast<std::size_t>(i * d + j)] / 255.0;
  ds.labels.assign(labels.data.begin(), labels.data.end());
  ds.validate();
  return ds;
}

}  // namespace vhl::data
