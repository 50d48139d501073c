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

// Portable float map (PFM) and binary graymap (PGM) files.
//
// PFM: header "Pf" (1 channel) or "PF" (3 channels), dimensions line, scale
// line "-1.0" (little-endian), then 32-bit floats with rows stored
// bottom-to-top. Two-channel images are written as 3 channels with a zero pad.

#include <cstdint>
#include <filesystem>

#include "polcast/image.hpp"

namespace polcast::io {

void write_pfm(const std::filesystem::path& path, const Image<double>& img);
Image<double> read_pfm(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const Image<std::uint8_t>& img);
Image<std::uint8_t> read_pgm(const std::filesystem::path& path);

/// Keeps the first `channels` channels of an image.
Image<double> take_channels(const Image<double>& img, int channels);

}  // namespace polcast::io
