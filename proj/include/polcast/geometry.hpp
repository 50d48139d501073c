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

// Pinhole camera, rays, specular reflection and plane intersection.
//
// Frame conventions used throughout the library:
//  - camera frame is right-handed, +z along the optical axis into the scene,
//    +x along image columns and +y along image rows (down);
//  - pixel centers sit at integer coordinates;
//  - depth is the range along the unit view ray, so P = depth * direction;
//  - stored surface normals face the camera (n . view < 0).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "polcast/errors.hpp"
#include "polcast/image.hpp"

namespace polcast {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kDegPerRad = 180.0 / std::numbers::pi;
inline constexpr double kRadPerDeg = std::numbers::pi / 180.0;

struct Intrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;

    void validate() const {
        if (!(fx > 0.0) || !(fy > 0.0)) throw DomainError("Intrinsics: focal lengths must be positive");
        if (width <= 0 || height <= 0) throw DomainError("Intrinsics: empty image");
        if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
            throw DomainError("Intrinsics: principal point outside the image");
        }
    }

    /// Square pixels, principal point at the image center, given horizontal half field of view.
    static Intrinsics from_fov(int width, int height, double half_fov_deg) {
        const double f = 0.5 * width / std::tan(half_fov_deg * kRadPerDeg);
        Intrinsics k{f, f, 0.5 * (width - 1), 0.5 * (height - 1), width, height};
        k.validate();
        return k;
    }

    bool operator==(const Intrinsics&) const = default;
};

/// Screen plane in the camera frame. `origin` is the corner of screen pixel (0, 0).
struct PlanePose {
    Vec3 origin = Vec3::Zero();
    Vec3 u_axis = Vec3::UnitX();
    Vec3 v_axis = Vec3::UnitY();
    Vec3 normal = Vec3::UnitZ();
    double pixel_pitch = 1.0;  // mm per screen pixel
    int u_res = 1;
    int v_res = 1;

    void validate() const {
        constexpr double tol = 1e-9;
        if (std::abs(u_axis.norm() - 1.0) > tol || std::abs(v_axis.norm() - 1.0) > tol) {
            throw DomainError("PlanePose: axes must be unit vectors");
        }
        if (std::abs(u_axis.dot(v_axis)) > tol) throw DomainError("PlanePose: axes must be orthogonal");
        if ((u_axis.cross(v_axis) - normal).norm() > tol) throw DomainError("PlanePose: normal must equal u x v");
        if (!(pixel_pitch > 0.0)) throw DomainError("PlanePose: pixel pitch must be positive");
        if (u_res <= 0 || v_res <= 0) throw DomainError("PlanePose: empty screen");
    }

    double width_mm() const { return u_res * pixel_pitch; }
    double height_mm() const { return v_res * pixel_pitch; }

    /// Builds a pose from two (not necessarily unit) spanning directions.
    static PlanePose make(const Vec3& origin, const Vec3& u_dir, const Vec3& v_dir, double pitch, int u_res,
                          int v_res) {
        PlanePose p;
        p.origin = origin;
        p.u_axis = u_dir.normalized();
        p.v_axis = v_dir.normalized();
        p.normal = p.u_axis.cross(p.v_axis);
        p.pixel_pitch = pitch;
        p.u_res = u_res;
        p.v_res = v_res;
        p.validate();
        return p;
    }
};

struct Calibration {
    Intrinsics camera;
    PlanePose screen;
};

class Ray {
public:
    Ray(const Vec3& origin, const Vec3& direction) : origin_(origin), direction_(direction.normalized()) {
        if (!direction_.allFinite()) throw DomainError("Ray: degenerate direction");
    }

    const Vec3& origin() const noexcept { return origin_; }
    const Vec3& direction() const noexcept { return direction_; }
    Vec3 at(double t) const { return origin_ + t * direction_; }

private:
    Vec3 origin_;
    Vec3 direction_;
};

inline bool pixel_in_bounds(const Vec2& px, const Intrinsics& k) {
    return px.x() >= -0.5 && px.x() <= k.width - 0.5 && px.y() >= -0.5 && px.y() <= k.height - 0.5;
}

/// Unit view direction through a pixel, without bounds checking.
inline Vec3 view_direction(double px, double py, const Intrinsics& k) {
    return Vec3((px - k.cx) / k.fx, (py - k.cy) / k.fy, 1.0).normalized();
}

inline Ray pixel_to_ray(const Vec2& px, const Intrinsics& k) {
    if (!pixel_in_bounds(px, k)) throw DomainError("pixel_to_ray: pixel outside the image");
    return Ray(Vec3::Zero(), view_direction(px.x(), px.y(), k));
}

/// Perspective projection of a camera-frame point to pixel coordinates.
inline Vec2 project(const Vec3& p, const Intrinsics& k) {
    if (!(p.z() > 0.0)) throw DomainError("project: point not in front of the camera");
    return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

/// Mirror `d` about the surface with normal `n`: d - 2 (d.n) n.
inline Vec3 reflect(const Vec3& d, const Vec3& n) {
    constexpr double tol = 1e-9;
    if (std::abs(d.norm() - 1.0) > tol || std::abs(n.norm() - 1.0) > tol) {
        throw DomainError("reflect: inputs must be unit vectors");
    }
    return d - 2.0 * d.dot(n) * n;
}

struct PlaneHit {
    Vec3 point;
    Vec2 uv;   // screen pixels
    double t;  // distance along the ray, mm
};

enum class PlaneHitStatus { ok, parallel, behind };

struct PlaneHitResult {
    PlaneHitStatus status = PlaneHitStatus::parallel;
    PlaneHit hit{};
    explicit operator bool() const noexcept { return status == PlaneHitStatus::ok; }
};

/// Non-throwing ray/plane intersection for per-pixel loops.
inline PlaneHitResult try_intersect_plane(const Ray& ray, const PlanePose& plane) {
    const double denom = ray.direction().dot(plane.normal);
    if (std::abs(denom) < 1e-12) return {PlaneHitStatus::parallel, {}};
    const double t = (plane.origin - ray.origin()).dot(plane.normal) / denom;
    if (!(t > 0.0)) return {PlaneHitStatus::behind, {}};
    const Vec3 point = ray.at(t);
    const Vec3 rel = point - plane.origin;
    return {PlaneHitStatus::ok,
            {point, Vec2(rel.dot(plane.u_axis) / plane.pixel_pitch, rel.dot(plane.v_axis) / plane.pixel_pitch), t}};
}

inline PlaneHit intersect_plane(const Ray& ray, const PlanePose& plane) {
    const auto r = try_intersect_plane(ray, plane);
    switch (r.status) {
        case PlaneHitStatus::ok: return r.hit;
        case PlaneHitStatus::parallel: throw NoIntersection("intersect_plane: ray parallel to plane");
        case PlaneHitStatus::behind: throw BehindCamera("intersect_plane: plane behind ray origin");
    }
    throw NoIntersection("intersect_plane: unreachable");
}

/// Angle between two vectors in degrees. The atan2 form stays accurate near
/// 0 and 180 degrees and never produces NaN.
inline double angle_between(const Vec3& a, const Vec3& b) {
    return std::atan2(a.cross(b).norm(), a.dot(b)) * kDegPerRad;
}

/// Unit normals (3 channels, camera frame) plus a validity mask.
struct NormalMap {
    Image<double> values;
    Mask mask;

    NormalMap() = default;
    NormalMap(int height, int width) : values(height, width, 3), mask(height, width) {}

    int height() const noexcept { return mask.height(); }
    int width() const noexcept { return mask.width(); }
    bool valid(int y, int x) const noexcept { return mask(y, x) != 0; }

    Vec3 at(int y, int x) const { return {values(y, x, 0), values(y, x, 1), values(y, x, 2)}; }
    void set(int y, int x, const Vec3& n) {
        values(y, x, 0) = n.x();
        values(y, x, 1) = n.y();
        values(y, x, 2) = n.z();
    }
};

namespace detail {

/// Tangent along one image axis using the three-point stencil that fits
/// inside the mask: central where both neighbors exist, otherwise the
/// second-order one-sided form. Returns nullopt when no 3-pixel run exists.
template <class PointAt, class Inside>
std::optional<Vec3> axis_tangent(int i, int n, PointAt point_at, Inside inside) {
    auto in = [&](int j) { return j >= 0 && j < n && inside(j); };
    if (in(i - 1) && in(i + 1)) return 0.5 * (point_at(i + 1) - point_at(i - 1));
    if (in(i + 1) && in(i + 2)) return 0.5 * (-3.0 * point_at(i) + 4.0 * point_at(i + 1) - point_at(i + 2));
    if (in(i - 1) && in(i - 2)) return 0.5 * (3.0 * point_at(i) - 4.0 * point_at(i - 1) + point_at(i - 2));
    return std::nullopt;
}

}  // namespace detail

/// Surface normals from a ray-depth map via finite-difference tangents.
inline NormalMap normals_from_depth(const DepthMap& depth, const Intrinsics& k, const Mask& mask) {
    require_same_shape(depth, mask, "normals_from_depth");
    const int h = depth.height();
    const int w = depth.width();
    NormalMap out(h, w);

    auto point = [&](int y, int x) -> Vec3 { return depth(y, x) * view_direction(x, y, k); };
    auto usable = [&](int y, int x) { return mask(y, x) != 0 && std::isfinite(depth(y, x)) && depth(y, x) > 0.0; };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!usable(y, x)) continue;
            const auto tx = detail::axis_tangent(
                x, w, [&](int j) { return point(y, j); }, [&](int j) { return usable(y, j); });
            const auto ty = detail::axis_tangent(
                y, h, [&](int j) { return point(j, x); }, [&](int j) { return usable(j, x); });
            if (!tx || !ty) continue;
            Vec3 n = tx->cross(*ty);
            const double len = n.norm();
            if (!(len > 0.0)) continue;
            n /= len;
            if (n.dot(view_direction(x, y, k)) > 0.0) n = -n;
            out.set(y, x, n);
            out.mask(y, x) = 1;
        }
    }
    return out;
}

}  // namespace polcast
