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

#include "polcast/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "polcast/sfp_baseline.hpp"

namespace polcast::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

void ModelConfig::validate() const {
    if (resolution < 8) throw DomainError("config: resolution must be >= 8");
    if (levels < 1 || levels > 6) throw DomainError("config: levels must be in [1, 6]");
    if (resolution % (1 << (levels - 1)) != 0) {
        throw DomainError("config: resolution must be divisible by 2^(levels-1)");
    }
    if (width < 1) throw DomainError("config: width must be positive");
    if (!(lr0 > 0.0)) throw DomainError("config: lr0 must be positive");
    if (epochs < 1) throw DomainError("config: epochs must be >= 1");
    if (batch < 1) throw DomainError("config: batch must be >= 1");
    if (depth_range_policy != "manifest" && depth_range_policy != "fixed") {
        throw DomainError("config: depth_range_policy must be 'manifest' or 'fixed'");
    }
    if (!(depth_min > 0.0) || !(depth_max > depth_min)) throw DomainError("config: invalid fixed depth range");
    if (!(depth_loss_weight >= 0.0)) throw DomainError("config: depth_loss_weight must be >= 0");
}

json ModelConfig::to_json() const {
    return {{"resolution", resolution},
            {"levels", levels},
            {"width", width},
            {"film_placement", film_placement == FilmPlacement::per_level ? "per_level" : "bottleneck"},
            {"lr0", lr0},
            {"epochs", epochs},
            {"batch", batch},
            {"seed", seed},
            {"depth_range_policy", depth_range_policy},
            {"depth_min", depth_min},
            {"depth_max", depth_max},
            {"depth_loss_weight", depth_loss_weight},
            {"include_aolp", include_aolp},
            {"ray_channels", ray_channels}};
}

ModelConfig ModelConfig::from_json(const json& j) {
    ModelConfig c;
    try {
        c.resolution = j.value("resolution", c.resolution);
        c.levels = j.value("levels", c.levels);
        c.width = j.value("width", c.width);
        if (j.contains("film_placement")) {
            const auto p = j.at("film_placement").get<std::string>();
            if (p == "per_level") {
                c.film_placement = FilmPlacement::per_level;
            } else if (p == "bottleneck") {
                c.film_placement = FilmPlacement::bottleneck;
            } else {
                throw DomainError("config: film_placement must be 'per_level' or 'bottleneck'");
            }
        }
        c.lr0 = j.value("lr0", c.lr0);
        c.epochs = j.value("epochs", c.epochs);
        c.batch = j.value("batch", c.batch);
        c.seed = j.value("seed", c.seed);
        c.depth_range_policy = j.value("depth_range_policy", c.depth_range_policy);
        c.depth_min = j.value("depth_min", c.depth_min);
        c.depth_max = j.value("depth_max", c.depth_max);
        c.depth_loss_weight = j.value("depth_loss_weight", c.depth_loss_weight);
        c.include_aolp = j.value("include_aolp", c.include_aolp);
        c.ray_channels = j.value("ray_channels", c.ray_channels);
    } catch (const json::exception& e) {
        throw DataError("config: " + std::string(e.what()));
    }
    c.validate();
    return c;
}

std::uint64_t ModelConfig::arch_hash() const { return nn::fnv1a64(to_json().dump()); }

nets::ArchSpec ModelConfig::arch() const {
    nets::ArchSpec a;
    a.levels = levels;
    a.width = width;
    const int rays = ray_channels ? 2 : 0;
    a.polar_channels = stack_channels() + rays;
    a.corr_channels = 3 + rays;
    a.film_every_level = film_placement == FilmPlacement::per_level;
    return a;
}

// ---------------------------------------------------------------------------
// Inputs

PolarStack build_polar_stack(const StokesMap& sm, bool include_aolp) {
    const int h = sm.height();
    const int w = sm.width();
    double max_s0 = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (sm.valid(y, x)) max_s0 = std::max(max_s0, sm.s0(y, x));
        }
    }
    if (!(max_s0 > 0.0)) throw DomainError("build_polar_stack: capture is dark");
    PolarStack ps{Image<double>(h, w, include_aolp ? 5 : 4), sm.valid};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!sm.valid(y, x)) continue;
            const double s0 = sm.s0(y, x);
            ps.channels(y, x, 0) = s0 / max_s0;
            ps.channels(y, x, 1) = sm.s1(y, x) / s0;
            ps.channels(y, x, 2) = sm.s2(y, x) / s0;
            ps.channels(y, x, 3) = sm.dolp(y, x);
            if (include_aolp) ps.channels(y, x, 4) = sm.aolp(y, x) / std::numbers::pi;
        }
    }
    return ps;
}

PolarStack build_polar_stack(const CaptureSet& cs, bool include_aolp) {
    return build_polar_stack(compute_stokes(cs.i0, cs.i45, cs.i90, cs.i135), include_aolp);
}

DepthRange depth_range_from_manifest(const json& manifest) {
    if (!manifest.contains("depth_range")) throw DataError("manifest has no depth_range");
    const double lo = manifest.at("depth_range").at(0).get<double>();
    const double hi = manifest.at("depth_range").at(1).get<double>();
    if (!(hi > lo) || !(lo > 0.0)) throw DataError("manifest depth_range is degenerate");
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

namespace {

Tensor batch_from_images(const std::vector<const Image<double>*>& images, int channels, const ModelConfig& cfg,
                         const Intrinsics& k) {
    if (images.empty()) throw DomainError("empty batch");
    const int h = images.front()->height();
    const int w = images.front()->width();
    const int rays = cfg.ray_channels ? 2 : 0;
    const int c_total = channels + rays;
    Tensor t = Tensor::zeros({static_cast<int>(images.size()), c_total, h, w});
    for (std::size_t n = 0; n < images.size(); ++n) {
        const Image<double>& img = *images[n];
        if (img.height() != h || img.width() != w || img.channels() != channels) {
            throw DomainError("batch: inconsistent input shapes");
        }
        for (int c = 0; c < channels; ++c) {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) t.at(static_cast<int>(n), c, y, x) = static_cast<Real>(img(y, x, c));
            }
        }
        if (rays) {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    t.at(static_cast<int>(n), channels, y, x) = static_cast<Real>((x - k.cx) / (0.5 * w));
                    t.at(static_cast<int>(n), channels + 1, y, x) = static_cast<Real>((y - k.cy) / (0.5 * h));
                }
            }
        }
    }
    return t;
}

}  // namespace

Tensor polar_input(const std::vector<const PolarStack*>& stacks, const ModelConfig& cfg, const Intrinsics& k) {
    std::vector<const Image<double>*> images;
    for (const auto* s : stacks) images.push_back(&s->channels);
    return batch_from_images(images, cfg.stack_channels(), cfg, k);
}

Tensor correspondence_input(const std::vector<const Image<double>*>& encoded, const ModelConfig& cfg,
                            const Intrinsics& k) {
    return batch_from_images(encoded, 3, cfg, k);
}

// ---------------------------------------------------------------------------
// Model

Model::Model(const ModelConfig& cfg, const DepthRange& range) : cfg_(cfg), range_(range) {
    cfg_.validate();
    if (!(range.max > range.min)) throw DomainError("Model: empty depth range");
    std::mt19937_64 rng(derive_seed(cfg.seed, 0x5131));
    s1_ = nets::StageOne<Real>(cfg_.arch(), rng);
    std::mt19937_64 rng2(derive_seed(cfg.seed, 0x5132));
    s2_ = nets::StageTwo<Real>(cfg_.arch(), rng2);
}

void Model::check_resolution(const PolarStack& stack) const {
    if (stack.height() != cfg_.resolution || stack.width() != cfg_.resolution) {
        throw DomainError("model expects " + std::to_string(cfg_.resolution) + "x" + std::to_string(cfg_.resolution) +
                          " input, got " + std::to_string(stack.width()) + "x" + std::to_string(stack.height()));
    }
}

namespace {

NormalMap normals_from_tensor(const Tensor& t, int n, const Mask& mask) {
    NormalMap out(t.h(), t.w());
    for (int y = 0; y < t.h(); ++y) {
        for (int x = 0; x < t.w(); ++x) {
            if (!mask(y, x)) continue;
            const Vec3 v(t.at(n, 0, y, x), t.at(n, 1, y, x), t.at(n, 2, y, x));
            const double len = v.norm();
            if (!(len > 0.0)) continue;
            out.set(y, x, v / len);
            out.mask(y, x) = 1;
        }
    }
    return out;
}

DepthMap depth_from_tensor(const Tensor& t, int n, const DepthRange& range) {
    DepthMap d(t.h(), t.w());
    for (int y = 0; y < t.h(); ++y) {
        for (int x = 0; x < t.w(); ++x) d(y, x) = range.from_unit(t.at(n, 0, y, x));
    }
    return d;
}

}  // namespace

StageOneOutput Model::stage1_forward(const PolarStack& stack, const Intrinsics& k, const Mask& mask) const {
    check_resolution(stack);
    require_same_shape(stack.channels, mask, "stage1_forward");
    nn::NoGradGuard guard;
    const auto out = s1_(polar_input({&stack}, cfg_, k));
    return {depth_from_tensor(out.depth01, 0, range_), normals_from_tensor(out.normal, 0, mask)};
}

NormalMap Model::stage2_forward(const PolarStack& stack, const Image<double>& corr_encoded, const Intrinsics& k,
                                const Mask& mask, bool identity_film) const {
    check_resolution(stack);
    if (!stack.channels.same_shape(corr_encoded)) throw DomainError("stage2_forward: misaligned inputs");
    require_same_shape(stack.channels, mask, "stage2_forward");
    nn::NoGradGuard guard;
    const Tensor out = s2_(polar_input({&stack}, cfg_, k), correspondence_input({&corr_encoded}, cfg_, k), identity_film);
    return normals_from_tensor(out, 0, mask);
}

std::vector<nn::NamedArray> Model::to_arrays() const {
    std::vector<nn::NamedArray> arrays;
    arrays.push_back({"meta.depth_range", {1, 2, 1, 1}, {static_cast<float>(range_.min), static_cast<float>(range_.max)}});
    for (const auto* list : {&s1_.params(), &s2_.params()}) {
        for (const auto& p : *list) {
            nn::NamedArray a{p.name, p.tensor.shape(), {}};
            a.data.assign(p.tensor.values().begin(), p.tensor.values().end());
            arrays.push_back(std::move(a));
        }
    }
    return arrays;
}

void Model::save(const fs::path& path) const { nn::save_checkpoint(path, cfg_.arch_hash(), to_arrays()); }

Model Model::load(const fs::path& path, const ModelConfig& cfg) {
    const auto arrays = nn::load_checkpoint(path, cfg.arch_hash());
    if (arrays.empty() || arrays.front().name != "meta.depth_range" || arrays.front().data.size() != 2) {
        throw DataError("checkpoint: missing depth range");
    }
    Model m(cfg, {arrays.front().data[0], arrays.front().data[1]});
    std::size_t k = 1;
    for (auto* list : {&m.s1_.params(), &m.s2_.params()}) {
        for (auto& p : *list) {
            if (k >= arrays.size()) throw DataError("checkpoint: too few tensors");
            const auto& a = arrays[k++];
            if (a.name != p.name || a.shape != p.tensor.shape()) {
                throw DataError("checkpoint: tensor '" + a.name + "' does not match parameter '" + p.name + "'");
            }
            std::copy(a.data.begin(), a.data.end(), p.tensor.values().begin());
        }
    }
    if (k != arrays.size()) throw DataError("checkpoint: unexpected extra tensors");
    return m;
}

// ---------------------------------------------------------------------------
// Inference

namespace {
double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace

InferenceResult infer(const Model& model, const CaptureSet& cs, const Calibration& calib, const Mask& mask,
                      bool identity_film) {
    using clock = std::chrono::steady_clock;
    InferenceResult r;
    const auto start = clock::now();

    auto t = clock::now();
    const PolarStack stack = build_polar_stack(cs, model.config().include_aolp);
    r.timing.stack_ms = ms_since(t);

    t = clock::now();
    r.coarse = model.stage1_forward(stack, calib.camera, mask);
    r.timing.stage1_ms = ms_since(t);

    t = clock::now();
    r.correspondence = compute_correspondence(r.coarse.depth, r.coarse.normal, calib.camera, calib.screen);
    const Image<double> encoded = normalize_correspondence(r.correspondence, calib.screen);
    r.timing.correspondence_ms = ms_since(t);

    t = clock::now();
    r.normal = model.stage2_forward(stack, encoded, calib.camera, mask, identity_film);
    r.timing.stage2_ms = ms_since(t);

    r.timing.total_ms = ms_since(start);
    return r;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Sample {
    std::string id;
    PolarStack stack;
    Mask mask;
    DepthMap gt_depth;
    NormalMap gt_normal;
    Image<double> corr;  // encoded correspondence from frozen stage 1
};

std::vector<Sample> load_samples(const Dataset& ds, const ModelConfig& cfg) {
    std::vector<Sample> out;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CaptureSet cs = ds.load(i);
        if (cs.height() != cfg.resolution || cs.width() != cfg.resolution) {
            throw DataError("sample " + ds.entries()[i].id + " resolution does not match the model config");
        }
        if (std::none_of(cs.corr_mask.data().begin(), cs.corr_mask.data().end(), [](auto v) { return v != 0; })) {
            spdlog::warn("skipping {}: no pixel reflects the screen", ds.entries()[i].id);
            continue;
        }
        Sample s{ds.entries()[i].id, build_polar_stack(cs, cfg.include_aolp), cs.corr_mask, cs.gt_depth,
                 cs.gt_normal, {}};
        out.push_back(std::move(s));
    }
    if (out.empty()) throw DataError("dataset '" + ds.root().string() + "' has no usable samples");
    return out;
}

struct Targets {
    Tensor normal, depth01, mask;
};

Targets batch_targets(const std::vector<const Sample*>& batch, const DepthRange& range) {
    const int n = static_cast<int>(batch.size());
    const int h = batch.front()->mask.height();
    const int w = batch.front()->mask.width();
    Targets t{Tensor::zeros({n, 3, h, w}), Tensor::zeros({n, 1, h, w}), Tensor::zeros({n, 1, h, w})};
    for (int b = 0; b < n; ++b) {
        const Sample& s = *batch[b];
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!s.mask(y, x)) continue;
                t.mask.at(b, 0, y, x) = 1;
                t.depth01.at(b, 0, y, x) = static_cast<Real>(range.to_unit(s.gt_depth(y, x)));
                for (int c = 0; c < 3; ++c) t.normal.at(b, c, y, x) = static_cast<Real>(s.gt_normal.values(y, x, c));
            }
        }
    }
    return t;
}

std::vector<std::vector<const Sample*>> make_batches(const std::vector<Sample>& samples, int batch,
                                                     std::mt19937_64* rng) {
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    if (rng) std::shuffle(order.begin(), order.end(), *rng);
    std::vector<std::vector<const Sample*>> batches;
    for (std::size_t i = 0; i < order.size(); i += batch) {
        std::vector<const Sample*> b;
        for (std::size_t j = i; j < std::min(order.size(), i + batch); ++j) b.push_back(&samples[order[j]]);
        batches.push_back(std::move(b));
    }
    return batches;
}

void append_errors(const Tensor& pred, const std::vector<const Sample*>& batch, std::vector<double>& errors) {
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const NormalMap nm = normals_from_tensor(pred, static_cast<int>(b), batch[b]->mask);
        for (int y = 0; y < nm.height(); ++y) {
            for (int x = 0; x < nm.width(); ++x) {
                if (nm.valid(y, x)) errors.push_back(angle_between(nm.at(y, x), batch[b]->gt_normal.at(y, x)));
            }
        }
    }
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<std::vector<float>> snapshot(const nn::ParameterList<Real>& params) {
    std::vector<std::vector<float>> s;
    for (const auto& p : params) s.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
    return s;
}

void restore(nn::ParameterList<Real>& params, const std::vector<std::vector<float>>& s) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::copy(s[i].begin(), s[i].end(), params[i].tensor.values().begin());
    }
}

class CsvLog {
public:
    explicit CsvLog(const fs::path& path) : out_(path) {
        if (!out_) throw IoError("cannot write " + path.string());
        out_ << "epoch,lr,train_loss,val_mae_deg\n";
    }
    void row(int epoch, double lr, double loss, double val) {
        char line[160];
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", epoch, lr, loss, val);
        out_ << line;
        out_.flush();
    }

private:
    std::ofstream out_;
};

/// Shared epoch loop. `step` runs forward/backward on one batch and returns
/// the batch loss; `validate` returns the validation MAE in degrees.
template <class Step, class Validate>
std::pair<double, int> run_stage(const char* name, const ModelConfig& cfg, nn::ParameterList<Real>& params,
                                 const std::vector<Sample>& train_samples, const fs::path& log_path, Step step,
                                 Validate validate) {
    nn::Adam<Real> adam(params, {cfg.lr0, 0.9, 0.999, 1e-8});
    std::mt19937_64 rng(derive_seed(cfg.seed, nn::fnv1a64(name)));
    CsvLog log(log_path);
    double best = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    std::vector<std::vector<float>> best_params = snapshot(params);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = nn::cosine_anneal(cfg.lr0, epoch, cfg.epochs);
        adam.set_lr(lr);
        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (const auto& batch : make_batches(train_samples, cfg.batch, &rng)) {
            adam.zero_grad();
            const double loss = step(batch);
            adam.step();
            loss_sum += loss * static_cast<double>(batch.size());
            seen += batch.size();
        }
        const double train_loss = loss_sum / static_cast<double>(seen);
        const double val = validate();
        if (!std::isfinite(val)) {
            throw NumericError(std::string(name) + ": validation MAE is not finite at epoch " + std::to_string(epoch));
        }
        log.row(epoch, lr, train_loss, val);
        spdlog::info("{} epoch {:3d} lr {:.3e} loss {:.5f} val_mae {:.3f} deg", name, epoch, lr, train_loss, val);
        if (val < best) {
            best = val;
            best_epoch = epoch;
            best_params = snapshot(params);
        }
    }
    restore(params, best_params);
    return {best, best_epoch};
}

}  // namespace

TrainSummary train(const ModelConfig& cfg, const Dataset& train_set, const Dataset& val_set, const fs::path& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);
    const DepthRange range = cfg.depth_range_policy == "manifest" ? depth_range_from_manifest(train_set.manifest())
                                                                  : DepthRange{cfg.depth_min, cfg.depth_max};
    const Calibration& calib = train_set.calibration();
    const Intrinsics& k = calib.camera;

    std::vector<Sample> train_samples = load_samples(train_set, cfg);
    std::vector<Sample> val_samples = load_samples(val_set, cfg);
    spdlog::info("training on {} samples, validating on {}", train_samples.size(), val_samples.size());

    {
        std::ofstream f(out_dir / "config.json");
        f << cfg.to_json().dump(2) << "\n";
    }

    Model model(cfg, range);
    TrainSummary summary;

    auto polar_batch = [&](const std::vector<const Sample*>& batch) {
        std::vector<const PolarStack*> stacks;
        for (const auto* s : batch) stacks.push_back(&s->stack);
        return polar_input(stacks, cfg, k);
    };
    const auto val_batches = make_batches(val_samples, cfg.batch, nullptr);

    // Stage 1.
    auto& s1 = model.stage_one();
    std::tie(summary.best_val_stage1_deg, summary.best_epoch_stage1) = run_stage(
        "stage1", cfg, s1.params(), train_samples, out_dir / "stage1_log.csv",
        [&](const std::vector<const Sample*>& batch) {
            const Targets t = batch_targets(batch, range);
            const auto out = s1(polar_batch(batch));
            Tensor loss = nn::masked_mean_angular_error(out.normal, t.normal, t.mask);
            if (cfg.depth_loss_weight > 0.0) {
                loss = nn::add(loss, nn::scale(nn::masked_l1(out.depth01, t.depth01, t.mask),
                                               static_cast<Real>(cfg.depth_loss_weight)));
            }
            nn::backward(loss);
            return static_cast<double>(loss.item());
        },
        [&]() {
            nn::NoGradGuard guard;
            std::vector<double> errors;
            for (const auto& batch : val_batches) append_errors(s1(polar_batch(batch)).normal, batch, errors);
            return mean_of(errors);
        });

    // Frozen stage-1 outputs feed the correspondence encoder.
    for (auto* set : {&train_samples, &val_samples}) {
        for (auto& s : *set) {
            const StageOneOutput coarse = model.stage1_forward(s.stack, k, s.mask);
            s.corr = normalize_correspondence(compute_correspondence(coarse.depth, coarse.normal, k, calib.screen),
                                              calib.screen);
        }
    }
    auto corr_batch = [&](const std::vector<const Sample*>& batch) {
        std::vector<const Image<double>*> enc;
        for (const auto* s : batch) enc.push_back(&s->corr);
        return correspondence_input(enc, cfg, k);
    };

    // Stage 2.
    auto& s2 = model.stage_two();
    std::tie(summary.best_val_stage2_deg, summary.best_epoch_stage2) = run_stage(
        "stage2", cfg, s2.params(), train_samples, out_dir / "stage2_log.csv",
        [&](const std::vector<const Sample*>& batch) {
            const Targets t = batch_targets(batch, range);
            Tensor loss = nn::masked_mean_angular_error(s2(polar_batch(batch), corr_batch(batch)), t.normal, t.mask);
            nn::backward(loss);
            return static_cast<double>(loss.item());
        },
        [&]() {
            nn::NoGradGuard guard;
            std::vector<double> errors;
            for (const auto& batch : val_batches) append_errors(s2(polar_batch(batch), corr_batch(batch)), batch, errors);
            return mean_of(errors);
        });

    model.save(out_dir / "model.pnnc");
    return summary;
}

HeldOutErrors evaluate_held_out(const Model& model, const Dataset& data) {
    HeldOutErrors e;
    const Calibration& calib = data.calibration();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const CaptureSet cs = data.load(i);
        const Mask& mask = cs.corr_mask;
        if (std::none_of(mask.data().begin(), mask.data().end(), [](auto v) { return v != 0; })) continue;
        const InferenceResult r = infer(model, cs, calib, mask);
        const StokesMap sm = compute_stokes(cs.i0, cs.i45, cs.i90, cs.i135);
        const NormalMap base = sfp::reconstruct(sm, cs.meta.scene.refractive_index, cs.gt_normal, mask);
        for (int y = 0; y < cs.height(); ++y) {
            for (int x = 0; x < cs.width(); ++x) {
                if (!mask(y, x)) continue;
                const Vec3 gt = cs.gt_normal.at(y, x);
                if (r.coarse.normal.valid(y, x)) e.stage1.push_back(angle_between(r.coarse.normal.at(y, x), gt));
                if (r.normal.valid(y, x)) e.stage2.push_back(angle_between(r.normal.at(y, x), gt));
                if (base.valid(y, x)) e.baseline.push_back(angle_between(base.at(y, x), gt));
            }
        }
    }
    return e;
}

}  // namespace polcast::pipeline
