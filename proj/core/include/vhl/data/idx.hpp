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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vhl/data/dataset.hpp"

namespace vhl::data {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// Decoded unsigned-byte IDX tensor. dims has 3 entries for image files
// (count, rows, cols) and 1 for label files.
struct IdxTensor {
  std::uint32_t magic = kIdxLabelsMagic;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;  // row-major payload

  bool operator==(const IdxTensor&) const = default;
};

// Big-endian header: 4-byte magic, one 4-byte size per dimension, then the
// payload. Throws ParseError whose offset() is the first byte that could not
// be decoded: 0 for a bad magic, the start of an overflowing size field, the
// end of input for truncation, the first surplus byte for trailing data.
IdxTensor parse_idx(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_idx(const IdxTensor& tensor);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);

// Pairs an images tensor with a labels tensor; pixels are scaled to [0, 1].
LabeledDataset idx_to_dataset(const IdxTensor& images, const IdxTensor& labels, int class_count);

}  // namespace vhl::data
