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

#include "polcast/sfp_baseline.hpp"

#include <cmath>
#include <numbers>

namespace polcast::sfp {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_two_pi(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    if (a >= kTwoPi) a -= kTwoPi;
    return a;
}
}  // namespace

double normal_azimuth(const Vec3& n) { return wrap_two_pi(std::atan2(n.y(), n.x())); }

double circular_distance(double a, double b) {
    const double d = wrap_two_pi(a - b);
    return std::min(d, kTwoPi - d);
}

AngleMap estimate_zenith(const Image<double>& dolp, double n, const NormalMap& gt_normal) {
    require_same_shape(dolp, gt_normal.mask, "estimate_zenith");
    const int h = dolp.height();
    const int w = dolp.width();
    AngleMap out{Image<double>(h, w), Mask(h, w), Mask(h, w)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!gt_normal.valid(y, x) || !std::isfinite(dolp(y, x))) continue;
            double rho = std::max(0.0, dolp(y, x));
            bool clamped = false;
            if (rho > 1.0) {
                rho = 1.0;
                clamped = true;
            }
            const double gt = orthographic_zenith(gt_normal.at(y, x));
            const auto below = invert_dolp(rho, n, Branch::below_brewster);
            const auto above = invert_dolp(rho, n, Branch::above_brewster);
            // Ties go to the below-Brewster branch.
            const bool use_above = std::abs(above.theta - gt) < std::abs(below.theta - gt);
            const auto& pick = use_above ? above : below;
            out.angle(y, x) = pick.theta;
            out.valid(y, x) = 1;
            out.flagged(y, x) = clamped || pick.clamped;
        }
    }
    return out;
}

AngleMap estimate_azimuth(const Image<double>& aolp, const NormalMap& gt_normal, const Mask* aolp_reliable) {
    require_same_shape(aolp, gt_normal.mask, "estimate_azimuth");
    const int h = aolp.height();
    const int w = aolp.width();
    AngleMap out{Image<double>(h, w), Mask(h, w), Mask(h, w)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!gt_normal.valid(y, x) || !std::isfinite(aolp(y, x))) continue;
            // Specular reflection polarizes perpendicular to the plane of incidence.
            const double c1 = wrap_two_pi(aolp(y, x) + 0.5 * std::numbers::pi);
            const double c2 = wrap_two_pi(aolp(y, x) + 1.5 * std::numbers::pi);
            const double gt = normal_azimuth(gt_normal.at(y, x));
            out.angle(y, x) = circular_distance(c2, gt) < circular_distance(c1, gt) ? c2 : c1;
            out.valid(y, x) = 1;
            out.flagged(y, x) = aolp_reliable != nullptr && !(*aolp_reliable)(y, x);
        }
    }
    return out;
}

NormalMap assemble_normals(const AngleMap& zenith, const AngleMap& azimuth) {
    require_same_shape(zenith.angle, azimuth.angle, "assemble_normals");
    const int h = zenith.angle.height();
    const int w = zenith.angle.width();
    NormalMap out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!zenith.valid(y, x) || !azimuth.valid(y, x)) continue;
            const double t = zenith.angle(y, x);
            const double p = azimuth.angle(y, x);
            out.set(y, x, Vec3(std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), -std::cos(t)));
            out.mask(y, x) = 1;
        }
    }
    return out;
}

NormalMap reconstruct(const StokesMap& sm, double n, const NormalMap& gt_normal, const Mask& mask) {
    require_same_shape(sm.s0, mask, "sfp::reconstruct");
    NormalMap gated = gt_normal;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            gated.mask(y, x) = gt_normal.valid(y, x) && mask(y, x) && sm.valid(y, x);
        }
    }
    const AngleMap zenith = estimate_zenith(sm.dolp, n, gated);
    const AngleMap azimuth = estimate_azimuth(sm.aolp, gated, &sm.aolp_reliable);
    return assemble_normals(zenith, azimuth);
}

}  // namespace polcast::sfp
