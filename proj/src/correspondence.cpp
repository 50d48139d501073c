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

#include "polcast/correspondence.hpp"

namespace polcast {

std::optional<Vec2> correspond_pixel(int x, int y, double depth, const Vec3& normal, const Intrinsics& k,
                                     const PlanePose& screen) {
    if (!(depth > 0.0) || !std::isfinite(depth)) return std::nullopt;
    const double len = normal.norm();
    if (!(std::abs(len - 1.0) < 1e-6)) return std::nullopt;
    const Vec3 view = view_direction(x, y, k);
    const Vec3 point = depth * view;
    const Vec3 incident = reflect(view, normal / len);
    const auto hit = try_intersect_plane(Ray(point, incident), screen);
    if (!hit) return std::nullopt;
    const Vec2& uv = hit.hit.uv;
    if (uv.x() < 0.0 || uv.x() > screen.u_res || uv.y() < 0.0 || uv.y() > screen.v_res) return std::nullopt;
    return uv;
}

CorrespondenceMap compute_correspondence(const DepthMap& depth, const NormalMap& normal, const Intrinsics& k,
                                         const PlanePose& screen) {
    require_same_shape(depth, normal.mask, "compute_correspondence");
    const int h = depth.height();
    const int w = depth.width();
    CorrespondenceMap cm{Image<double>(h, w, 2), Mask(h, w)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!normal.valid(y, x)) continue;
            const auto uv = correspond_pixel(x, y, depth(y, x), normal.at(y, x), k, screen);
            if (!uv) continue;
            cm.uv(y, x, 0) = uv->x();
            cm.uv(y, x, 1) = uv->y();
            cm.valid(y, x) = 1;
        }
    }
    return cm;
}

Image<double> normalize_correspondence(const CorrespondenceMap& cm, const PlanePose& screen) {
    Image<double> out(cm.height(), cm.width(), 3);
    for (int y = 0; y < cm.height(); ++y) {
        for (int x = 0; x < cm.width(); ++x) {
            if (!cm.valid(y, x)) continue;
            out(y, x, 0) = 2.0 * cm.uv(y, x, 0) / screen.u_res - 1.0;
            out(y, x, 1) = 2.0 * cm.uv(y, x, 1) / screen.v_res - 1.0;
            out(y, x, 2) = 1.0;
        }
    }
    return out;
}

CorrespondenceMap denormalize_correspondence(const Image<double>& encoded, const PlanePose& screen) {
    if (encoded.channels() != 3) throw DomainError("denormalize_correspondence: expected 3 channels");
    CorrespondenceMap cm{Image<double>(encoded.height(), encoded.width(), 2), Mask(encoded.height(), encoded.width())};
    for (int y = 0; y < encoded.height(); ++y) {
        for (int x = 0; x < encoded.width(); ++x) {
            if (encoded(y, x, 2) < 0.5) continue;
            cm.uv(y, x, 0) = 0.5 * (encoded(y, x, 0) + 1.0) * screen.u_res;
            cm.uv(y, x, 1) = 0.5 * (encoded(y, x, 1) + 1.0) * screen.v_res;
            cm.valid(y, x) = 1;
        }
    }
    return cm;
}

}  // namespace polcast
