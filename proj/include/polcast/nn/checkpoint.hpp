// SPDX-License-Identifier: Apache-2.0
// ----------------------------------------------------------------------------
// Copyright 2026 The polcast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy
// of the License at:
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.
// ----------------------------------------------------------------------------

#pragma once

// Binary checkpoint: "PNNC", u32 version, u64 architecture hash, u32 count,
// then per tensor: u32 name length, name bytes, 4 x u32 dims (NCHW),
// little-endian fp32 data; trailing u32 CRC32 of all preceding bytes.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "polcast/errors.hpp"
#include "polcast/nn/tensor.hpp"

namespace polcast::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedArray {
    std::string name;
    Shape shape{1, 1, 1, 1};
    std::vector<float> data;
};

/// Raised when a checkpoint was written for a different architecture.
class ArchitectureMismatch : public DataError {
public:
    using DataError::DataError;
};

std::vector<std::uint8_t> encode_checkpoint(std::uint64_t arch_hash, const std::vector<NamedArray>& arrays);
std::vector<NamedArray> decode_checkpoint(const std::vector<std::uint8_t>& bytes, std::uint64_t expected_hash);

void save_checkpoint(const std::filesystem::path& path, std::uint64_t arch_hash,
                     const std::vector<NamedArray>& arrays);
std::vector<NamedArray> load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_hash);

/// Reads only the header hash (for diagnostics).
std::uint64_t peek_checkpoint_hash(const std::filesystem::path& path);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(const std::string& text);

}  // namespace polcast::nn
