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

#include "polcast/dataset.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "polcast/io.hpp"

namespace polcast {

namespace fs = std::filesystem;

void DatasetConfig::validate() const {
    if (count < 0) throw DomainError("dataset: count must be non-negative");
    if (resolution < 8) throw DomainError("dataset: resolution must be at least 8");
    if (noise && !(snr_min_db <= snr_max_db)) throw DomainError("dataset: empty SNR range");
    if (!(sphere_fraction >= 0.0 && sphere_fraction <= 1.0)) throw DomainError("dataset: sphere_fraction in [0,1]");
    check_refractive_index(refractive_index);
}

nlohmann::json DatasetConfig::to_json() const {
    return {{"count", count},
            {"resolution", resolution},
            {"seed", seed},
            {"snr_min_db", snr_min_db},
            {"snr_max_db", snr_max_db},
            {"noise", noise},
            {"sphere_fraction", sphere_fraction},
            {"half_fov_deg", half_fov_deg},
            {"refractive_index", refractive_index},
            {"sphere_depth", {sphere_depth_min, sphere_depth_max}},
            {"sphere_radius", {sphere_radius_min, sphere_radius_max}},
            {"sphere_lateral", sphere_lateral},
            {"hf_depth", {hf_depth_min, hf_depth_max}},
            {"hf_tilt_max", hf_tilt_max},
            {"hf_amplitude", {hf_amplitude_min, hf_amplitude_max}},
            {"hf_wavelength", {hf_wavelength_min, hf_wavelength_max}},
            {"hf_terms", hf_terms}};
}

DatasetConfig DatasetConfig::from_json(const nlohmann::json& j) { return from_json(j, DatasetConfig{}); }

DatasetConfig DatasetConfig::from_json(const nlohmann::json& j, DatasetConfig c) {
    auto range = [&](const char* key, double& lo, double& hi) {
        if (j.contains(key)) {
            lo = j.at(key).at(0).get<double>();
            hi = j.at(key).at(1).get<double>();
        }
    };
    c.count = j.value("count", c.count);
    c.resolution = j.value("resolution", c.resolution);
    c.seed = j.value("seed", c.seed);
    c.snr_min_db = j.value("snr_min_db", c.snr_min_db);
    c.snr_max_db = j.value("snr_max_db", c.snr_max_db);
    c.noise = j.value("noise", c.noise);
    c.sphere_fraction = j.value("sphere_fraction", c.sphere_fraction);
    c.half_fov_deg = j.value("half_fov_deg", c.half_fov_deg);
    c.refractive_index = j.value("refractive_index", c.refractive_index);
    range("sphere_depth", c.sphere_depth_min, c.sphere_depth_max);
    range("sphere_radius", c.sphere_radius_min, c.sphere_radius_max);
    c.sphere_lateral = j.value("sphere_lateral", c.sphere_lateral);
    range("hf_depth", c.hf_depth_min, c.hf_depth_max);
    c.hf_tilt_max = j.value("hf_tilt_max", c.hf_tilt_max);
    range("hf_amplitude", c.hf_amplitude_min, c.hf_amplitude_max);
    range("hf_wavelength", c.hf_wavelength_min, c.hf_wavelength_max);
    c.hf_terms = j.value("hf_terms", c.hf_terms);
    c.validate();
    return c;
}

Scene sample_scene(const DatasetConfig& cfg, std::uint64_t sample_seed) {
    std::mt19937_64 rng(sample_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    if (unit(rng) < cfg.sphere_fraction) {
        Sphere s;
        s.center = Vec3(uniform(-cfg.sphere_lateral, cfg.sphere_lateral), uniform(-cfg.sphere_lateral, cfg.sphere_lateral),
                        uniform(cfg.sphere_depth_min, cfg.sphere_depth_max));
        s.radius = uniform(cfg.sphere_radius_min, cfg.sphere_radius_max);
        return Scene::make_sphere(s, cfg.refractive_index);
    }
    HeightfieldParams p;
    p.base_depth = uniform(cfg.hf_depth_min, cfg.hf_depth_max);
    p.tilt_x = uniform(-cfg.hf_tilt_max, cfg.hf_tilt_max);
    p.tilt_y = uniform(-cfg.hf_tilt_max, cfg.hf_tilt_max);
    p.amplitude = uniform(cfg.hf_amplitude_min, cfg.hf_amplitude_max);
    p.min_wavelength = uniform(cfg.hf_wavelength_min, cfg.hf_wavelength_max);
    p.terms = cfg.hf_terms;
    p.seed = rng();
    // Cover the view frustum at the deepest point of the base plane.
    const double reach = 1.5 * std::tan(cfg.half_fov_deg * kRadPerDeg) * (p.base_depth + 50.0);
    p.half_extent = std::ceil(reach / 10.0) * 10.0;
    p.grid_pitch = 1.0;
    return Scene::make_heightfield(p, cfg.refractive_index);
}

Mask encode_mask(const Mask& gt_mask, const Mask& corr_mask) {
    require_same_shape(gt_mask, corr_mask, "encode_mask");
    Mask out(gt_mask.height(), gt_mask.width());
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            out(y, x) = corr_mask(y, x) ? kMaskValid : (gt_mask(y, x) ? kMaskSurfaceOnly : kMaskBackground);
        }
    }
    return out;
}

nlohmann::json save_capture(const CaptureSet& cs, const fs::path& dir, const std::string& rel_prefix) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    const char* names[4] = {"i000.pfm", "i045.pfm", "i090.pfm", "i135.pfm"};
    nlohmann::json paths;
    for (int k = 0; k < 4; ++k) {
        io::write_pfm(dir / names[k], cs.image(k));
        paths[std::string(names[k]).substr(0, 4)] = rel_prefix + names[k];
    }
    io::write_pfm(dir / "depth.pfm", cs.gt_depth);
    io::write_pfm(dir / "normal.pfm", cs.gt_normal.values);
    io::write_pfm(dir / "corr.pfm", cs.gt_corr);
    io::write_pgm(dir / "mask.pgm", encode_mask(cs.gt_mask, cs.corr_mask));
    paths["depth"] = rel_prefix + "depth.pfm";
    paths["normal"] = rel_prefix + "normal.pfm";
    paths["corr"] = rel_prefix + "corr.pfm";
    paths["mask"] = rel_prefix + "mask.pgm";
    return paths;
}

nlohmann::json generate_dataset(const DatasetConfig& cfg, const fs::path& out_dir) {
    cfg.validate();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

    const Calibration calib = default_calibration(cfg.resolution, cfg.half_fov_deg);
    const ScreenPattern pattern = default_pattern(calib.screen);

    nlohmann::json manifest;
    manifest["version"] = kManifestVersion;
    manifest["seed"] = cfg.seed;
    manifest["config"] = cfg.to_json();
    manifest["calibration"] = to_json(calib);
    manifest["pattern"] = to_json(pattern);
    manifest["samples"] = nlohmann::json::array();

    double depth_min = std::numeric_limits<double>::infinity();
    double depth_max = 0.0;
    for (int i = 0; i < cfg.count; ++i) {
        const std::uint64_t sample_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
        const Scene scene = sample_scene(cfg, sample_seed);
        std::mt19937_64 rng(derive_seed(sample_seed, 1));
        const double snr = cfg.noise ? std::uniform_real_distribution<double>(cfg.snr_min_db, cfg.snr_max_db)(rng)
                                     : kNoNoise;
        const CaptureSet cs = render(scene, calib, pattern, snr, derive_seed(sample_seed, 2));

        char id[32];
        std::snprintf(id, sizeof id, "sample_%04d", i);
        nlohmann::json rec;
        rec["id"] = id;
        rec["seed"] = sample_seed;
        rec["scene"] = to_json(scene);
        rec["snr_db"] = cfg.noise ? nlohmann::json(snr) : nlohmann::json(nullptr);
        rec["paths"] = save_capture(cs, out_dir / id, std::string(id) + "/");
        manifest["samples"].push_back(rec);

        for (int y = 0; y < cs.height(); ++y) {
            for (int x = 0; x < cs.width(); ++x) {
                if (!cs.corr_mask(y, x)) continue;
                depth_min = std::min(depth_min, cs.gt_depth(y, x));
                depth_max = std::max(depth_max, cs.gt_depth(y, x));
            }
        }
    }
    if (depth_max > 0.0) manifest["depth_range"] = {depth_min, depth_max};

    std::ofstream out(out_dir / "manifest.json", std::ios::trunc);
    if (!out) throw IoError("cannot write manifest in '" + out_dir.string() + "'");
    out << manifest.dump(2) << '\n';
    return manifest;
}

// ---------------------------------------------------------------------------

Dataset Dataset::open(const fs::path& dir) {
    Dataset ds;
    ds.root_ = dir;
    std::ifstream in(dir / "manifest.json");
    if (!in) throw IoError("no manifest.json in '" + dir.string() + "'");
    try {
        in >> ds.manifest_;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("manifest.json: " + std::string(e.what()));
    }
    if (ds.manifest_.value("version", -1) != kManifestVersion) {
        throw DataError("manifest.json: unsupported schema version");
    }
    try {
        ds.calib_ = calibration_from_json(ds.manifest_.at("calibration"));
        ds.pattern_ = pattern_from_json(ds.manifest_.at("pattern"));
        for (const auto& rec : ds.manifest_.at("samples")) {
            ds.entries_.push_back({rec.at("id").get<std::string>(), rec});
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError("manifest.json: " + std::string(e.what()));
    }
    return ds;
}

std::size_t Dataset::find(const std::string& id) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].id == id) return i;
    }
    throw DataError("sample '" + id + "' not in manifest");
}

CaptureSet Dataset::load(std::size_t index) const {
    if (index >= entries_.size()) throw DataError("sample index out of range");
    const auto& rec = entries_[index].record;
    const auto& paths = rec.at("paths");
    auto path_of = [&](const char* key) { return root_ / paths.at(key).get<std::string>(); };

    CaptureSet cs;
    cs.i0 = io::read_pfm(path_of("i000"));
    cs.i45 = io::read_pfm(path_of("i045"));
    cs.i90 = io::read_pfm(path_of("i090"));
    cs.i135 = io::read_pfm(path_of("i135"));
    cs.gt_depth = io::read_pfm(path_of("depth"));
    const Image<double> normals = io::read_pfm(path_of("normal"));
    cs.gt_corr = io::take_channels(io::read_pfm(path_of("corr")), 2);
    const Mask encoded = io::read_pgm(path_of("mask"));

    const int h = cs.i0.height();
    const int w = cs.i0.width();
    for (const auto* img : {&cs.i45, &cs.i90, &cs.i135, &cs.gt_depth}) require_same_shape(cs.i0, *img, "Dataset::load");
    require_same_shape(cs.i0, normals, "Dataset::load");
    require_same_shape(cs.i0, encoded, "Dataset::load");
    if (normals.channels() != 3) throw DataError("normal.pfm must have 3 channels");

    cs.gt_mask = Mask(h, w);
    cs.corr_mask = Mask(h, w);
    cs.gt_normal = NormalMap(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const bool surface = encoded(y, x) != kMaskBackground;
            cs.gt_mask(y, x) = surface;
            cs.corr_mask(y, x) = encoded(y, x) == kMaskValid;
            if (!surface) continue;
            // Renormalize after the fp32 round trip.
            const Vec3 n = Vec3(normals(y, x, 0), normals(y, x, 1), normals(y, x, 2)).normalized();
            cs.gt_normal.set(y, x, n);
            cs.gt_normal.mask(y, x) = 1;
        }
    }
    cs.meta.calib = calib_;
    cs.meta.pattern = pattern_;
    cs.meta.scene = scene_from_json(rec.at("scene"));
    cs.meta.seed = rec.at("seed").get<std::uint64_t>();
    cs.meta.snr_db = rec.at("snr_db").is_null() ? kNoNoise : rec.at("snr_db").get<double>();
    return cs;
}

}  // namespace polcast
