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

// Angular-error maps, threshold statistics, radial error profiles and
// report files.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polcast/geometry.hpp"

namespace polcast::eval {

struct ErrorMap {
    Image<double> deg;
    Mask valid;

    int height() const noexcept { return valid.height(); }
    int width() const noexcept { return valid.width(); }
    std::vector<double> values() const;
};

/// Per-pixel angle between `pred` and `gt` in degrees, valid where `mask`
/// and both normal maps are valid.
ErrorMap angular_error_map(const NormalMap& pred, const NormalMap& gt, const Mask& mask);

inline const std::vector<double> kDefaultThresholds{1.0, 2.0, 3.0};

struct ErrorStats {
    double mean_deg = 0.0;
    double median_deg = 0.0;
    std::vector<double> thresholds;
    std::vector<double> pct_below;  // strictly below each threshold, 0..100
    std::size_t n_valid = 0;

    /// Percentage for a threshold present in `thresholds`.
    double pct(double threshold) const;
};

ErrorStats error_stats(std::span<const double> errors_deg, const std::vector<double>& thresholds = kDefaultThresholds);
ErrorStats error_stats(const ErrorMap& map, const std::vector<double>& thresholds = kDefaultThresholds);

struct ProfileBin {
    int index = 0;
    double r_min_px = 0.0;
    double r_max_px = 0.0;
    std::optional<double> mean_deg;  // absent for empty bins
    std::size_t count = 0;
};

/// Bins valid pixels by distance from the principal point. The bins split
/// [0, r] evenly, r being the largest radius among valid pixels.
std::vector<ProfileBin> radial_profile(const ErrorMap& map, const Intrinsics& k, int n_bins);

struct MethodResult {
    std::string method;
    ErrorStats stats;
    std::vector<ProfileBin> profile;
    std::optional<ErrorMap> map;  // rendered to a PGM when present
};

/// `method,mean_deg,median_deg,pct_lt1,pct_lt2,pct_lt3,n_valid`, rows sorted by mean.
std::string report_csv(std::vector<MethodResult> results);
/// `bin_index,r_min_px,r_max_px,mean_deg,count`; empty bins leave mean_deg blank.
std::string profile_csv(const std::vector<ProfileBin>& profile);

/// Gray ramp: 0 deg -> 0, >= 10 deg -> 255; invalid pixels are 0.
Image<std::uint8_t> render_error_map(const ErrorMap& map);

/// Writes report.csv, profile_<method>.csv and error_<method>.pgm into `dir`.
void write_report(const std::vector<MethodResult>& results, const std::filesystem::path& dir);

}  // namespace polcast::eval
