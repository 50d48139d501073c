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

// Desk-scale digital twin: a pinhole polarization camera looking at a
// specular object that reflects a patterned, unpolarized screen.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polcast/geometry.hpp"
#include "polcast/image.hpp"
#include "polcast/polarization.hpp"

namespace polcast {

struct Sphere {
    Vec3 center{0.0, 0.0, 500.0};
    double radius = 100.0;
};

/// Band-limited random cosine series on a (possibly tilted) base plane.
struct HeightfieldParams {
    double base_depth = 500.0;  // z of the base plane at x = y = 0, mm
    double tilt_x = 0.0;        // dz/dx of the base plane
    double tilt_y = 0.0;        // dz/dy of the base plane
    double amplitude = 2.0;     // total amplitude of the cosine series, mm
    double min_wavelength = 40.0;  // shortest wavelength in the series, mm
    int terms = 6;
    std::uint64_t seed = 0;
    double half_extent = 200.0;  // grid covers [-half_extent, half_extent]^2, mm
    double grid_pitch = 1.0;     // mm
};

/// Height samples z(x, y) on a regular grid plus the analytic gradient there.
/// Heights are bilinearly interpolated for intersection; normals come from
/// the bilinearly interpolated gradient.
class Heightfield {
public:
    Heightfield() = default;
    explicit Heightfield(const HeightfieldParams& params);

    const HeightfieldParams& params() const noexcept { return params_; }
    int nodes() const noexcept { return nodes_; }
    double z_min() const noexcept { return z_min_; }
    double z_max() const noexcept { return z_max_; }

    bool contains(double x, double y) const;
    double height(double x, double y) const;
    Vec2 gradient(double x, double y) const;
    /// Unit normal facing the camera (-z side).
    Vec3 normal(double x, double y) const;

private:
    struct Cell {
        int ix, iy;
        double fx, fy;
    };
    Cell locate(double x, double y) const;
    double bilerp(const std::vector<double>& grid, const Cell& c) const;

    HeightfieldParams params_;
    int nodes_ = 0;
    std::vector<double> z_, gx_, gy_;
    double z_min_ = 0.0;
    double z_max_ = 0.0;
};

enum class SceneKind { sphere, heightfield };

struct Scene {
    SceneKind kind = SceneKind::sphere;
    Sphere sphere;
    Heightfield heightfield;
    double refractive_index = kDefaultRefractiveIndex;

    static Scene make_sphere(const Sphere& s, double n = kDefaultRefractiveIndex);
    static Scene make_heightfield(const HeightfieldParams& p, double n = kDefaultRefractiveIndex);
    void validate() const;
};

struct SurfaceHit {
    double t;  // range along the view ray, mm
    Vec3 point;
    Vec3 normal;  // unit, facing the camera
};

/// First intersection of a ray leaving the camera center with the scene.
std::optional<SurfaceHit> intersect_scene(const Scene& scene, const Ray& ray);

enum class PatternKind { cross_sinusoid, uniform };

struct ScreenPattern {
    PatternKind kind = PatternKind::cross_sinusoid;
    double mean = 0.5;       // A
    double amplitude = 0.2;  // B
    double fu = 8.0;         // cycles across the screen width
    double fv = 8.0;         // cycles across the screen height
    int u_res = 1000;
    int v_res = 1000;

    void validate() const;
    /// Radiance at continuous screen pixel coordinates.
    double radiance(double u, double v) const;
    double max_radiance() const { return kind == PatternKind::uniform ? mean : mean + 2.0 * amplitude; }
};

/// Screen radiance image (v_res rows by u_res columns), sampled at integer pixel coordinates.
Image<double> make_pattern(const ScreenPattern& pattern);

struct CaptureMeta {
    Calibration calib;
    Scene scene;
    ScreenPattern pattern;
    std::uint64_t seed = 0;
    double snr_db = kNoNoise;
};

/// Four polarization images plus the renderer's ground truth.
struct CaptureSet {
    Image<double> i0, i45, i90, i135;
    DepthMap gt_depth;
    NormalMap gt_normal;      // mask = surface hit
    Mask gt_mask;             // surface hit
    Mask corr_mask;           // surface hit and reflected ray lands on the screen
    Image<double> gt_corr;    // 2 channels, screen pixels, valid on corr_mask
    CaptureMeta meta;

    int height() const noexcept { return i0.height(); }
    int width() const noexcept { return i0.width(); }
    const Image<double>& image(int k) const;
};

/// Digital-twin defaults: coaxial screen around the camera at z = 0 facing the scene.
Calibration default_calibration(int resolution, double half_fov_deg = 15.0);
ScreenPattern default_pattern(const PlanePose& screen);

/// Image-plane orientation of the plane of incidence spanned by `view` and `normal`, in [0, pi).
double plane_of_incidence_angle(const Vec3& view, const Vec3& normal, const Intrinsics& k);

CaptureSet render(const Scene& scene, const Calibration& calib, const ScreenPattern& pattern, double snr_db,
                  std::uint64_t seed);

// JSON views of the scene description (used by the dataset manifest).
nlohmann::json to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Calibration& calib);
Calibration calibration_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScreenPattern& pattern);
ScreenPattern pattern_from_json(const nlohmann::json& j);

}  // namespace polcast
