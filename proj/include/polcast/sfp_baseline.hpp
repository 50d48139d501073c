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

// Conventional orthographic shape-from-polarization. Zenith comes from DoLP,
// azimuth from AoLP; both ambiguities are resolved against ground truth, and
// every pixel is assumed to be viewed along the optical axis.

#include "polcast/geometry.hpp"
#include "polcast/polarization.hpp"

namespace polcast::sfp {

struct AngleMap {
    Image<double> angle;  // radians
    Mask valid;
    Mask flagged;  // clamped DoLP or unreliable AoLP
};

/// Zenith of a camera-facing normal measured from the orthographic view axis (0, 0, -1).
inline double orthographic_zenith(const Vec3& n) { return std::acos(std::clamp(-n.z(), -1.0, 1.0)); }

/// Image-plane azimuth of a normal in [0, 2 pi).
double normal_azimuth(const Vec3& n);

/// Smallest absolute difference between two angles on the circle.
double circular_distance(double a, double b);

AngleMap estimate_zenith(const Image<double>& dolp, double n, const NormalMap& gt_normal);
AngleMap estimate_azimuth(const Image<double>& aolp, const NormalMap& gt_normal, const Mask* aolp_reliable = nullptr);
NormalMap assemble_normals(const AngleMap& zenith, const AngleMap& azimuth);

/// Full baseline on a Stokes map, restricted to `mask`.
NormalMap reconstruct(const StokesMap& sm, double n, const NormalMap& gt_normal, const Mask& mask);

}  // namespace polcast::sfp
