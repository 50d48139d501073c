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

// Camera-pixel to screen-pixel correspondence from depth and normals via
// the law of specular reflection.

#include "polcast/geometry.hpp"

namespace polcast {

struct CorrespondenceMap {
    Image<double> uv;  // 2 channels, screen pixels
    Mask valid;

    int height() const noexcept { return valid.height(); }
    int width() const noexcept { return valid.width(); }
};

/// uv for one pixel, or nullopt when the reflected ray misses the screen panel.
std::optional<Vec2> correspond_pixel(int x, int y, double depth, const Vec3& normal, const Intrinsics& k,
                                     const PlanePose& screen);

CorrespondenceMap compute_correspondence(const DepthMap& depth, const NormalMap& normal, const Intrinsics& k,
                                         const PlanePose& screen);

/// Network-facing encoding: channels (u', v', validity) with u' = 2u/u_res - 1,
/// v' = 2v/v_res - 1; invalid pixels are (0, 0, 0).
Image<double> normalize_correspondence(const CorrespondenceMap& cm, const PlanePose& screen);
CorrespondenceMap denormalize_correspondence(const Image<double>& encoded, const PlanePose& screen);

}  // namespace polcast
