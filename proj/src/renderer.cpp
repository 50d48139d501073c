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

#include "polcast/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace polcast {

// ---------------------------------------------------------------------------
// Heightfield

Heightfield::Heightfield(const HeightfieldParams& params) : params_(params) {
    if (!(params.grid_pitch > 0.0) || !(params.half_extent > params.grid_pitch)) {
        throw DomainError("Heightfield: invalid grid");
    }
    if (params.terms < 0 || !(params.min_wavelength > 0.0) || !std::isfinite(params.amplitude)) {
        throw DomainError("Heightfield: invalid series parameters");
    }
    nodes_ = static_cast<int>(std::lround(2.0 * params.half_extent / params.grid_pitch)) + 1;

    struct Term {
        double a, kx, ky, phase;
    };
    std::vector<Term> series;
    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> weights;
    for (int k = 0; k < params.terms; ++k) {
        const double dir = 2.0 * std::numbers::pi * unit(rng);
        const double wavelength = params.min_wavelength * (1.0 + 3.0 * unit(rng));
        const double knum = 2.0 * std::numbers::pi / wavelength;
        series.push_back({0.0, knum * std::cos(dir), knum * std::sin(dir), 2.0 * std::numbers::pi * unit(rng)});
        weights.push_back(0.25 + unit(rng));
    }
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    for (std::size_t k = 0; k < series.size(); ++k) series[k].a = params.amplitude * weights[k] / wsum;

    const std::size_t count = static_cast<std::size_t>(nodes_) * nodes_;
    z_.resize(count);
    gx_.resize(count);
    gy_.resize(count);
    z_min_ = std::numeric_limits<double>::infinity();
    z_max_ = -std::numeric_limits<double>::infinity();
    for (int iy = 0; iy < nodes_; ++iy) {
        const double y = -params.half_extent + iy * params.grid_pitch;
        for (int ix = 0; ix < nodes_; ++ix) {
            const double x = -params.half_extent + ix * params.grid_pitch;
            double z = params.base_depth + params.tilt_x * x + params.tilt_y * y;
            double gx = params.tilt_x;
            double gy = params.tilt_y;
            for (const Term& t : series) {
                const double arg = t.kx * x + t.ky * y + t.phase;
                z += t.a * std::cos(arg);
                gx -= t.a * t.kx * std::sin(arg);
                gy -= t.a * t.ky * std::sin(arg);
            }
            const std::size_t i = static_cast<std::size_t>(iy) * nodes_ + ix;
            z_[i] = z;
            gx_[i] = gx;
            gy_[i] = gy;
            z_min_ = std::min(z_min_, z);
            z_max_ = std::max(z_max_, z);
        }
    }
}

bool Heightfield::contains(double x, double y) const {
    const double e = params_.half_extent;
    return x >= -e && x <= e && y >= -e && y <= e;
}

Heightfield::Cell Heightfield::locate(double x, double y) const {
    const double gxf = (x + params_.half_extent) / params_.grid_pitch;
    const double gyf = (y + params_.half_extent) / params_.grid_pitch;
    const int ix = std::clamp(static_cast<int>(std::floor(gxf)), 0, nodes_ - 2);
    const int iy = std::clamp(static_cast<int>(std::floor(gyf)), 0, nodes_ - 2);
    return {ix, iy, gxf - ix, gyf - iy};
}

double Heightfield::bilerp(const std::vector<double>& grid, const Cell& c) const {
    const std::size_t i00 = static_cast<std::size_t>(c.iy) * nodes_ + c.ix;
    const std::size_t i10 = i00 + 1;
    const std::size_t i01 = i00 + nodes_;
    const std::size_t i11 = i01 + 1;
    return (1 - c.fy) * ((1 - c.fx) * grid[i00] + c.fx * grid[i10]) +
           c.fy * ((1 - c.fx) * grid[i01] + c.fx * grid[i11]);
}

double Heightfield::height(double x, double y) const { return bilerp(z_, locate(x, y)); }

Vec2 Heightfield::gradient(double x, double y) const {
    const Cell c = locate(x, y);
    return {bilerp(gx_, c), bilerp(gy_, c)};
}

Vec3 Heightfield::normal(double x, double y) const {
    const Vec2 g = gradient(x, y);
    return Vec3(g.x(), g.y(), -1.0).normalized();
}

// ---------------------------------------------------------------------------
// Scene

Scene Scene::make_sphere(const Sphere& s, double n) {
    Scene scene;
    scene.kind = SceneKind::sphere;
    scene.sphere = s;
    scene.refractive_index = n;
    scene.validate();
    return scene;
}

Scene Scene::make_heightfield(const HeightfieldParams& p, double n) {
    Scene scene;
    scene.kind = SceneKind::heightfield;
    scene.heightfield = Heightfield(p);
    scene.refractive_index = n;
    scene.validate();
    return scene;
}

void Scene::validate() const {
    check_refractive_index(refractive_index);
    if (kind == SceneKind::sphere) {
        if (!(sphere.radius > 0.0)) throw DomainError("Scene: sphere radius must be positive");
        if (!(sphere.center.z() - sphere.radius > 0.0)) throw DomainError("Scene: sphere must lie in front of the camera");
    } else {
        if (heightfield.nodes() == 0) throw DomainError("Scene: empty heightfield");
        if (!(heightfield.z_min() > 0.0) || !std::isfinite(heightfield.z_max())) {
            throw DomainError("Scene: heightfield must lie in front of the camera");
        }
    }
}

namespace {

std::optional<SurfaceHit> intersect_sphere(const Sphere& s, const Ray& ray) {
    const Vec3 oc = s.center - ray.origin();
    const double b = ray.direction().dot(oc);
    const double c = oc.squaredNorm() - s.radius * s.radius;
    const double disc = b * b - c;
    if (disc < 0.0) return std::nullopt;
    const double root = std::sqrt(disc);
    double t = b - root;
    if (!(t > 0.0)) t = b + root;
    if (!(t > 0.0)) return std::nullopt;
    const Vec3 p = ray.at(t);
    return SurfaceHit{t, p, (p - s.center) / s.radius};
}

std::optional<SurfaceHit> intersect_heightfield(const Heightfield& hf, const Ray& ray) {
    const Vec3& d = ray.direction();
    const Vec3& o = ray.origin();
    if (!(d.z() > 0.0)) return std::nullopt;
    constexpr double margin = 1.0;
    const double t_begin = std::max(0.0, (hf.z_min() - margin - o.z()) / d.z());
    const double t_end = (hf.z_max() + margin - o.z()) / d.z();
    const double step = 0.5 * hf.params().grid_pitch;

    auto f = [&](double t, bool& inside) {
        const Vec3 p = o + t * d;
        inside = hf.contains(p.x(), p.y());
        return inside ? p.z() - hf.height(p.x(), p.y()) : -1.0;
    };

    bool inside_prev = false;
    double t_prev = t_begin;
    double f_prev = f(t_prev, inside_prev);
    for (double t = t_begin + step; t <= t_end + step; t += step) {
        bool inside = false;
        const double fv = f(t, inside);
        if (inside && inside_prev && f_prev < 0.0 && fv >= 0.0) {
            // Bracketed root: regula falsi with Illinois weighting.
            double a = t_prev, fa = f_prev, b = t, fb = fv;
            int side = 0;
            double tr = b;
            for (int it = 0; it < 60; ++it) {
                tr = (a * fb - b * fa) / (fb - fa);
                bool in_r = false;
                const double fr = f(tr, in_r);
                if (std::abs(fr) < 1e-11 || b - a < 1e-12) break;
                if (fr < 0.0) {
                    a = tr;
                    fa = fr;
                    if (side == -1) fb *= 0.5;
                    side = -1;
                } else {
                    b = tr;
                    fb = fr;
                    if (side == 1) fa *= 0.5;
                    side = 1;
                }
            }
            const Vec3 p = o + tr * d;
            return SurfaceHit{tr, p, hf.normal(p.x(), p.y())};
        }
        t_prev = t;
        f_prev = fv;
        inside_prev = inside;
    }
    return std::nullopt;
}

}  // namespace

std::optional<SurfaceHit> intersect_scene(const Scene& scene, const Ray& ray) {
    return scene.kind == SceneKind::sphere ? intersect_sphere(scene.sphere, ray)
                                           : intersect_heightfield(scene.heightfield, ray);
}

// ---------------------------------------------------------------------------
// Pattern

void ScreenPattern::validate() const {
    if (mean < 0.0 || amplitude < 0.0) throw DomainError("ScreenPattern: negative radiance parameter");
    if (u_res <= 0 || v_res <= 0) throw DomainError("ScreenPattern: empty resolution");
    if (kind == PatternKind::cross_sinusoid) {
        if (mean - 2.0 * amplitude < 0.0) throw DomainError("ScreenPattern: pattern would go negative");
        if (!(fu > 0.0) || !(fv > 0.0)) throw DomainError("ScreenPattern: frequencies must be positive");
    }
}

double ScreenPattern::radiance(double u, double v) const {
    if (kind == PatternKind::uniform) return mean;
    return mean + amplitude * (std::cos(2.0 * std::numbers::pi * fu * u / u_res) +
                               std::cos(2.0 * std::numbers::pi * fv * v / v_res));
}

Image<double> make_pattern(const ScreenPattern& pattern) {
    pattern.validate();
    Image<double> img(pattern.v_res, pattern.u_res);
    for (int v = 0; v < pattern.v_res; ++v) {
        for (int u = 0; u < pattern.u_res; ++u) img(v, u) = pattern.radiance(u, v);
    }
    return img;
}

// ---------------------------------------------------------------------------
// Rendering

const Image<double>& CaptureSet::image(int k) const {
    switch (k) {
        case 0: return i0;
        case 1: return i45;
        case 2: return i90;
        case 3: return i135;
        default: throw DomainError("CaptureSet::image: index must be 0..3");
    }
}

Calibration default_calibration(int resolution, double half_fov_deg) {
    Calibration c;
    c.camera = Intrinsics::from_fov(resolution, resolution, half_fov_deg);
    constexpr double pitch = 0.5;
    constexpr int res = 1000;
    const double half = 0.5 * pitch * res;
    c.screen = PlanePose::make(Vec3(-half, -half, 0.0), Vec3::UnitX(), Vec3::UnitY(), pitch, res, res);
    return c;
}

ScreenPattern default_pattern(const PlanePose& screen) {
    ScreenPattern p;
    p.u_res = screen.u_res;
    p.v_res = screen.v_res;
    return p;
}

double plane_of_incidence_angle(const Vec3& view, const Vec3& normal, const Intrinsics& k) {
    const Vec3 m = view.cross(normal);
    if (m.squaredNorm() < 1e-30) return 0.0;
    double phi = std::atan2(-m.x() / k.fx, m.y() / k.fy);
    phi = std::fmod(phi, std::numbers::pi);
    if (phi < 0.0) phi += std::numbers::pi;
    if (phi >= std::numbers::pi) phi -= std::numbers::pi;
    return phi;
}

CaptureSet render(const Scene& scene, const Calibration& calib, const ScreenPattern& pattern, double snr_db,
                  std::uint64_t seed) {
    scene.validate();
    calib.camera.validate();
    calib.screen.validate();
    pattern.validate();

    const int h = calib.camera.height;
    const int w = calib.camera.width;
    const double n = scene.refractive_index;
    CaptureSet cs;
    Image<double> clean[4] = {Image<double>(h, w), Image<double>(h, w), Image<double>(h, w), Image<double>(h, w)};
    cs.gt_depth = DepthMap(h, w);
    cs.gt_normal = NormalMap(h, w);
    cs.gt_mask = Mask(h, w);
    cs.corr_mask = Mask(h, w);
    cs.gt_corr = Image<double>(h, w, 2);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Ray view = pixel_to_ray(Vec2(x, y), calib.camera);
            const auto hit = intersect_scene(scene, view);
            if (!hit) continue;
            cs.gt_depth(y, x) = hit->t;
            cs.gt_normal.set(y, x, hit->normal);
            cs.gt_normal.mask(y, x) = 1;
            cs.gt_mask(y, x) = 1;

            const Vec3 reflected = reflect(view.direction(), hit->normal);
            const auto screen_hit = try_intersect_plane(Ray(hit->point, reflected), calib.screen);
            if (!screen_hit) continue;
            const Vec2 uv = screen_hit.hit.uv;
            if (uv.x() < 0.0 || uv.x() > calib.screen.u_res || uv.y() < 0.0 || uv.y() > calib.screen.v_res) continue;
            cs.corr_mask(y, x) = 1;
            cs.gt_corr(y, x, 0) = uv.x();
            cs.gt_corr(y, x, 1) = uv.y();

            const double radiance = pattern.radiance(uv.x(), uv.y());
            const double cos_i = std::clamp(-view.direction().dot(hit->normal), 0.0, 1.0);
            const double theta_i = std::min(std::acos(cos_i), kGrazingLimit);
            const double phi_inc = plane_of_incidence_angle(view.direction(), hit->normal, calib.camera);
            const Stokes s = stokes_from_reflection(theta_i, phi_inc, radiance, n);
            for (int k = 0; k < 4; ++k) clean[k](y, x) = sample_polarizer(s, kPolarizerAngles[k]);
        }
    }

    Image<double>* outs[4] = {&cs.i0, &cs.i45, &cs.i90, &cs.i135};
    for (int k = 0; k < 4; ++k) {
        *outs[k] = add_noise(clean[k], snr_db, derive_seed(seed, static_cast<std::uint64_t>(k)), SnrPolicy::any);
    }
    cs.meta = {calib, scene, pattern, seed, snr_db};
    return cs;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Vec3 vec_from(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

}  // namespace

nlohmann::json to_json(const Scene& scene) {
    nlohmann::json j;
    j["refractive_index"] = scene.refractive_index;
    if (scene.kind == SceneKind::sphere) {
        j["kind"] = "sphere";
        j["center"] = vec_json(scene.sphere.center);
        j["radius"] = scene.sphere.radius;
    } else {
        const auto& p = scene.heightfield.params();
        j["kind"] = "heightfield";
        j["base_depth"] = p.base_depth;
        j["tilt_x"] = p.tilt_x;
        j["tilt_y"] = p.tilt_y;
        j["amplitude"] = p.amplitude;
        j["min_wavelength"] = p.min_wavelength;
        j["terms"] = p.terms;
        j["seed"] = p.seed;
        j["half_extent"] = p.half_extent;
        j["grid_pitch"] = p.grid_pitch;
    }
    return j;
}

Scene scene_from_json(const nlohmann::json& j) {
    const double n = j.value("refractive_index", kDefaultRefractiveIndex);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "sphere") return Scene::make_sphere({vec_from(j.at("center")), j.at("radius").get<double>()}, n);
    if (kind == "heightfield") {
        HeightfieldParams p;
        p.base_depth = j.at("base_depth").get<double>();
        p.tilt_x = j.at("tilt_x").get<double>();
        p.tilt_y = j.at("tilt_y").get<double>();
        p.amplitude = j.at("amplitude").get<double>();
        p.min_wavelength = j.at("min_wavelength").get<double>();
        p.terms = j.at("terms").get<int>();
        p.seed = j.at("seed").get<std::uint64_t>();
        p.half_extent = j.at("half_extent").get<double>();
        p.grid_pitch = j.at("grid_pitch").get<double>();
        return Scene::make_heightfield(p, n);
    }
    throw DataError("unknown scene kind '" + kind + "'");
}

nlohmann::json to_json(const Calibration& calib) {
    const auto& k = calib.camera;
    const auto& s = calib.screen;
    return {{"camera", {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}}},
            {"screen",
             {{"origin", vec_json(s.origin)},
              {"u_axis", vec_json(s.u_axis)},
              {"v_axis", vec_json(s.v_axis)},
              {"pixel_pitch", s.pixel_pitch},
              {"u_res", s.u_res},
              {"v_res", s.v_res}}}};
}

Calibration calibration_from_json(const nlohmann::json& j) {
    Calibration c;
    const auto& k = j.at("camera");
    c.camera = {k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                k.at("cy").get<double>(), k.at("width").get<int>(),   k.at("height").get<int>()};
    c.camera.validate();
    const auto& s = j.at("screen");
    c.screen = PlanePose::make(vec_from(s.at("origin")), vec_from(s.at("u_axis")), vec_from(s.at("v_axis")),
                               s.at("pixel_pitch").get<double>(), s.at("u_res").get<int>(), s.at("v_res").get<int>());
    return c;
}

nlohmann::json to_json(const ScreenPattern& p) {
    return {{"kind", p.kind == PatternKind::uniform ? "uniform" : "cross_sinusoid"},
            {"mean", p.mean},
            {"amplitude", p.amplitude},
            {"fu", p.fu},
            {"fv", p.fv},
            {"u_res", p.u_res},
            {"v_res", p.v_res}};
}

ScreenPattern pattern_from_json(const nlohmann::json& j) {
    ScreenPattern p;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "uniform") {
        p.kind = PatternKind::uniform;
    } else if (kind == "cross_sinusoid") {
        p.kind = PatternKind::cross_sinusoid;
    } else {
        throw DataError("unknown pattern kind '" + kind + "'");
    }
    p.mean = j.at("mean").get<double>();
    p.amplitude = j.at("amplitude").get<double>();
    p.fu = j.at("fu").get<double>();
    p.fv = j.at("fv").get<double>();
    p.u_res = j.at("u_res").get<int>();
    p.v_res = j.at("v_res").get<int>();
    p.validate();
    return p;
}

}  // namespace polcast
