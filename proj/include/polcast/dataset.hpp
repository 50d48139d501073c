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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polcast/renderer.hpp"

namespace polcast {

inline constexpr int kManifestVersion = 1;

/// Mask file levels: background, surface without a screen reflection, valid.
inline constexpr std::uint8_t kMaskBackground = 0;
inline constexpr std::uint8_t kMaskSurfaceOnly = 128;
inline constexpr std::uint8_t kMaskValid = 255;

struct DatasetConfig {
    int count = 4;
    int resolution = 128;
    std::uint64_t seed = 0;
    double snr_min_db = 40.0;
    double snr_max_db = 50.0;
    bool noise = true;
    double sphere_fraction = 0.3;
    double half_fov_deg = 15.0;
    double refractive_index = kDefaultRefractiveIndex;
    // sphere family
    double sphere_depth_min = 450.0, sphere_depth_max = 600.0;
    double sphere_radius_min = 60.0, sphere_radius_max = 130.0;
    double sphere_lateral = 30.0;
    // heightfield family
    double hf_depth_min = 430.0, hf_depth_max = 580.0;
    double hf_tilt_max = 0.05;
    double hf_amplitude_min = 0.5, hf_amplitude_max = 3.0;
    double hf_wavelength_min = 40.0, hf_wavelength_max = 90.0;
    int hf_terms = 6;

    void validate() const;
    nlohmann::json to_json() const;
    /// Fields present in `j` override `base`.
    static DatasetConfig from_json(const nlohmann::json& j, DatasetConfig base);
    static DatasetConfig from_json(const nlohmann::json& j);
};

/// Draws the scene of sample `index` from the root seed.
Scene sample_scene(const DatasetConfig& cfg, std::uint64_t sample_seed);

/// Renders `cfg.count` samples into `out_dir` and writes `manifest.json`.
nlohmann::json generate_dataset(const DatasetConfig& cfg, const std::filesystem::path& out_dir);

struct DatasetEntry {
    std::string id;
    nlohmann::json record;  // manifest entry
};

class Dataset {
public:
    static Dataset open(const std::filesystem::path& dir);

    const std::filesystem::path& root() const noexcept { return root_; }
    const nlohmann::json& manifest() const noexcept { return manifest_; }
    const std::vector<DatasetEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    const Calibration& calibration() const noexcept { return calib_; }

    CaptureSet load(std::size_t index) const;
    std::size_t find(const std::string& id) const;

private:
    std::filesystem::path root_;
    nlohmann::json manifest_;
    std::vector<DatasetEntry> entries_;
    Calibration calib_;
    ScreenPattern pattern_;
};

/// Writes one capture in the sample-directory layout.
nlohmann::json save_capture(const CaptureSet& cs, const std::filesystem::path& dir, const std::string& rel_prefix);

Mask encode_mask(const Mask& gt_mask, const Mask& corr_mask);

}  // namespace polcast
