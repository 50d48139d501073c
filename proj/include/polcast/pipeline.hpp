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

// Two-stage normal estimation: coarse depth/normal U-Nets, analytic
// correspondence, then correspondence features modulated by polarization
// features (FiLM) decoded into the final normal map.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polcast/correspondence.hpp"
#include "polcast/dataset.hpp"
#include "polcast/networks.hpp"
#include "polcast/nn/checkpoint.hpp"

namespace polcast::pipeline {

using nn::Real;
using Tensor = nn::Tensor<Real>;

enum class FilmPlacement { per_level, bottleneck };

struct ModelConfig {
    int resolution = 64;
    int levels = 3;
    int width = 16;
    FilmPlacement film_placement = FilmPlacement::per_level;
    double lr0 = 1e-4;
    int epochs = 30;  // per stage
    int batch = 8;
    std::uint64_t seed = 0;
    std::string depth_range_policy = "manifest";  // "manifest" or "fixed"
    double depth_min = 400.0;                     // used by "fixed"
    double depth_max = 650.0;
    double depth_loss_weight = 1.0;
    bool include_aolp = false;
    bool ray_channels = true;

    void validate() const;
    nlohmann::json to_json() const;
    /// Fields present in `j` override the defaults.
    static ModelConfig from_json(const nlohmann::json& j);
    /// FNV-1a of the canonical JSON of every field.
    std::uint64_t arch_hash() const;
    nets::ArchSpec arch() const;
    int stack_channels() const { return include_aolp ? 5 : 4; }
};

/// Network input channels: S0 / max(S0), S1 / S0, S2 / S0, DoLP (and
/// optionally AoLP / pi). Invalid pixels are zero.
struct PolarStack {
    Image<double> channels;
    Mask valid;

    int height() const noexcept { return channels.height(); }
    int width() const noexcept { return channels.width(); }
};

PolarStack build_polar_stack(const StokesMap& sm, bool include_aolp = false);
PolarStack build_polar_stack(const CaptureSet& cs, bool include_aolp = false);

struct DepthRange {
    double min = 0.0;
    double max = 1.0;
    double to_unit(double d) const { return (d - min) / (max - min); }
    double from_unit(double u) const { return min + u * (max - min); }
};

/// Manifest range widened by 5% of its span on both sides.
DepthRange depth_range_from_manifest(const nlohmann::json& manifest);

struct StageOneOutput {
    DepthMap depth;
    NormalMap normal;
};

/// Input tensor for a batch of stacks: stack channels followed by the two
/// pixel-ray channels (x - cx) / (W / 2), (y - cy) / (H / 2) when enabled.
Tensor polar_input(const std::vector<const PolarStack*>& stacks, const ModelConfig& cfg, const Intrinsics& k);
/// Encoded correspondence (u', v', validity) plus the ray channels.
Tensor correspondence_input(const std::vector<const Image<double>*>& encoded, const ModelConfig& cfg,
                            const Intrinsics& k);

class Model {
public:
    Model(const ModelConfig& cfg, const DepthRange& range);

    const ModelConfig& config() const noexcept { return cfg_; }
    const DepthRange& depth_range() const noexcept { return range_; }
    nets::StageOne<Real>& stage_one() { return s1_; }
    nets::StageTwo<Real>& stage_two() { return s2_; }
    const nets::StageOne<Real>& stage_one() const { return s1_; }
    const nets::StageTwo<Real>& stage_two() const { return s2_; }

    StageOneOutput stage1_forward(const PolarStack& stack, const Intrinsics& k, const Mask& mask) const;
    NormalMap stage2_forward(const PolarStack& stack, const Image<double>& corr_encoded, const Intrinsics& k,
                             const Mask& mask, bool identity_film = false) const;

    std::vector<nn::NamedArray> to_arrays() const;
    void save(const std::filesystem::path& path) const;
    /// Refuses checkpoints whose architecture hash differs from `cfg`'s.
    static Model load(const std::filesystem::path& path, const ModelConfig& cfg);

private:
    void check_resolution(const PolarStack& stack) const;

    ModelConfig cfg_;
    DepthRange range_;
    nets::StageOne<Real> s1_;
    nets::StageTwo<Real> s2_;
};

struct InferenceTiming {
    double stack_ms = 0.0;
    double stage1_ms = 0.0;
    double correspondence_ms = 0.0;
    double stage2_ms = 0.0;
    double total_ms = 0.0;
};

struct InferenceResult {
    StageOneOutput coarse;
    CorrespondenceMap correspondence;
    NormalMap normal;
    InferenceTiming timing;
};

/// Full pipeline on one capture; outputs are valid on `mask`.
InferenceResult infer(const Model& model, const CaptureSet& cs, const Calibration& calib, const Mask& mask,
                      bool identity_film = false);

struct TrainSummary {
    double best_val_stage1_deg = 0.0;
    double best_val_stage2_deg = 0.0;
    int best_epoch_stage1 = -1;
    int best_epoch_stage2 = -1;
};

/// Stage 1 (depth L1 + normal angular loss) is trained first and frozen at
/// its best validation epoch, then stage 2 on the frozen stage-1 outputs.
/// Writes model.pnnc, config.json, stage1_log.csv and stage2_log.csv.
TrainSummary train(const ModelConfig& cfg, const Dataset& train_set, const Dataset& val_set,
                   const std::filesystem::path& out_dir);

/// Pooled held-out angular errors (degrees) on corr_mask.
struct HeldOutErrors {
    std::vector<double> stage1, stage2, baseline;
};
HeldOutErrors evaluate_held_out(const Model& model, const Dataset& data);

}  // namespace polcast::pipeline
