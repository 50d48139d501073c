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

// polcast: dataset generation, reconstruction, training and evaluation.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "polcast/correspondence.hpp"
#include "polcast/dataset.hpp"
#include "polcast/evaluation.hpp"
#include "polcast/io.hpp"
#include "polcast/nn/gradcheck.hpp"
#include "polcast/pipeline.hpp"
#include "polcast/sfp_baseline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polcast;

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config '" + path + "'");
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw DataError("config '" + path + "': " + e.what());
    }
}

void print_header(const std::string& command, const json& resolved) {
    std::printf("# polcast %s\n# config %s\n", command.c_str(), resolved.dump().c_str());
    std::fflush(stdout);
}

Mask mask_to_pgm(const Mask& m) {
    Mask out(m.height(), m.width());
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) out(y, x) = m(y, x) ? 255 : 0;
    }
    return out;
}

void write_normals(const fs::path& dir, const NormalMap& n) {
    fs::create_directories(dir);
    io::write_pfm(dir / "normal.pfm", n.values);
    io::write_pgm(dir / "mask.pgm", mask_to_pgm(n.mask));
}

NormalMap read_normals(const fs::path& dir) {
    const Image<double> v = io::read_pfm(dir / "normal.pfm");
    const Mask m = io::read_pgm(dir / "mask.pgm");
    require_same_shape(v, m, "prediction");
    if (v.channels() != 3) throw DataError(dir.string() + "/normal.pfm must have 3 channels");
    NormalMap n(v.height(), v.width());
    for (int y = 0; y < v.height(); ++y) {
        for (int x = 0; x < v.width(); ++x) {
            if (!m(y, x)) continue;
            const Vec3 a(v(y, x, 0), v(y, x, 1), v(y, x, 2));
            if (!(a.norm() > 0.0)) continue;
            n.set(y, x, a.normalized());
            n.mask(y, x) = 1;
        }
    }
    return n;
}

/// Sample indices selected by --sample (repeatable) or all samples.
std::vector<std::size_t> select_samples(const Dataset& ds, const std::vector<std::string>& ids) {
    std::vector<std::size_t> out;
    if (ids.empty()) {
        for (std::size_t i = 0; i < ds.size(); ++i) out.push_back(i);
    } else {
        for (const auto& id : ids) out.push_back(ds.find(id));
    }
    return out;
}

// ---------------------------------------------------------------------------

struct GenArgs {
    std::string out, config;
    int n = 4, res = 128;
    std::uint64_t seed = 0;
    double snr_min = 40.0, snr_max = 50.0, sphere_fraction = 0.3;
    bool no_noise = false;
};

int cmd_gen(const GenArgs& a, const CLI::App& app) {
    DatasetConfig cfg = a.config.empty() ? DatasetConfig{} : DatasetConfig::from_json(read_json_file(a.config));
    if (app.count("--n")) cfg.count = a.n;
    if (app.count("--res")) cfg.resolution = a.res;
    if (app.count("--seed")) cfg.seed = a.seed;
    if (app.count("--snr-min")) cfg.snr_min_db = a.snr_min;
    if (app.count("--snr-max")) cfg.snr_max_db = a.snr_max;
    if (app.count("--sphere-fraction")) cfg.sphere_fraction = a.sphere_fraction;
    if (a.no_noise) cfg.noise = false;
    cfg.validate();
    print_header("gen", {{"out", a.out}, {"dataset", cfg.to_json()}});
    const json manifest = generate_dataset(cfg, a.out);
    std::printf("wrote %zu samples to %s\n", manifest.at("samples").size(), a.out.c_str());
    return kOk;
}

struct SampleArgs {
    std::string data, out;
    std::vector<std::string> samples;
};

int cmd_baseline(const SampleArgs& a) {
    const Dataset ds = Dataset::open(a.data);
    print_header("baseline", {{"data", a.data}, {"out", a.out}, {"samples", a.samples}});
    fs::create_directories(a.out);
    std::vector<eval::MethodResult> results;
    std::vector<double> pooled;
    for (std::size_t i : select_samples(ds, a.samples)) {
        const CaptureSet cs = ds.load(i);
        const StokesMap sm = compute_stokes(cs.i0, cs.i45, cs.i90, cs.i135);
        const NormalMap n = sfp::reconstruct(sm, cs.meta.scene.refractive_index, cs.gt_normal, cs.corr_mask);
        write_normals(fs::path(a.out) / ds.entries()[i].id, n);
        bool any = false;
        for (auto v : n.mask.data()) any = any || v;
        if (!any) continue;
        const auto errs = eval::angular_error_map(n, cs.gt_normal, cs.corr_mask).values();
        pooled.insert(pooled.end(), errs.begin(), errs.end());
    }
    const eval::ErrorStats s = eval::error_stats(pooled);
    std::printf("baseline mean %.4f deg median %.4f deg <1 %.2f%% <2 %.2f%% <3 %.2f%% n %zu\n", s.mean_deg,
                s.median_deg, s.pct(1), s.pct(2), s.pct(3), s.n_valid);
    return kOk;
}

struct CorrArgs {
    std::string data, out, pred;
    std::vector<std::string> samples;
};

int cmd_correspond(const CorrArgs& a) {
    const Dataset ds = Dataset::open(a.data);
    print_header("correspond", {{"data", a.data}, {"out", a.out}, {"pred", a.pred}, {"samples", a.samples}});
    const Calibration& calib = ds.calibration();
    for (std::size_t i : select_samples(ds, a.samples)) {
        const CaptureSet cs = ds.load(i);
        const std::string& id = ds.entries()[i].id;
        DepthMap depth = cs.gt_depth;
        NormalMap normal = cs.gt_normal;
        normal.mask = cs.corr_mask;
        if (!a.pred.empty()) {
            const fs::path p = fs::path(a.pred) / id;
            depth = io::read_pfm(p / "coarse_depth.pfm");
            normal = read_normals(p);
        }
        const CorrespondenceMap cm = compute_correspondence(depth, normal, calib.camera, calib.screen);
        const fs::path dir = fs::path(a.out) / id;
        fs::create_directories(dir);
        io::write_pfm(dir / "corr.pfm", cm.uv);
        io::write_pgm(dir / "corr_mask.pgm", mask_to_pgm(cm.valid));
    }
    return kOk;
}

struct TrainArgs {
    std::string train, val, out, config;
    int epochs = 0, batch = 0, width = 0, levels = 0, res = 0;
    double lr0 = 0.0;
    std::uint64_t seed = 0;
};

int cmd_train(const TrainArgs& a, const CLI::App& app) {
    json j = a.config.empty() ? json::object() : read_json_file(a.config);
    if (app.count("--epochs")) j["epochs"] = a.epochs;
    if (app.count("--batch")) j["batch"] = a.batch;
    if (app.count("--width")) j["width"] = a.width;
    if (app.count("--levels")) j["levels"] = a.levels;
    if (app.count("--res")) j["resolution"] = a.res;
    if (app.count("--lr0")) j["lr0"] = a.lr0;
    if (app.count("--seed")) j["seed"] = a.seed;
    const auto cfg = pipeline::ModelConfig::from_json(j);
    print_header("train", {{"train", a.train}, {"val", a.val}, {"out", a.out}, {"model", cfg.to_json()}});
    const Dataset tr = Dataset::open(a.train);
    const Dataset va = Dataset::open(a.val);
    const auto s = pipeline::train(cfg, tr, va, a.out);
    std::printf("stage1 best val %.4f deg (epoch %d), stage2 best val %.4f deg (epoch %d)\n", s.best_val_stage1_deg,
                s.best_epoch_stage1, s.best_val_stage2_deg, s.best_epoch_stage2);
    return kOk;
}

struct InferArgs {
    std::string model, data, out;
    std::vector<std::string> samples;
};

pipeline::Model load_model(const fs::path& dir) {
    const auto cfg = pipeline::ModelConfig::from_json(read_json_file((dir / "config.json").string()));
    return pipeline::Model::load(dir / "model.pnnc", cfg);
}

int cmd_infer(const InferArgs& a) {
    const pipeline::Model model = load_model(a.model);
    print_header("infer", {{"model", a.model}, {"data", a.data}, {"out", a.out}, {"samples", a.samples},
                           {"model_config", model.config().to_json()}});
    const Dataset ds = Dataset::open(a.data);
    for (std::size_t i : select_samples(ds, a.samples)) {
        const CaptureSet cs = ds.load(i);
        const std::string& id = ds.entries()[i].id;
        const auto r = pipeline::infer(model, cs, ds.calibration(), cs.corr_mask);
        const fs::path dir = fs::path(a.out) / id;
        write_normals(dir, r.normal);
        io::write_pfm(dir / "coarse_depth.pfm", r.coarse.depth);
        io::write_pfm(dir / "coarse_normal.pfm", r.coarse.normal.values);
        io::write_pfm(dir / "corr.pfm", r.correspondence.uv);
        const json timing = {{"stack_ms", r.timing.stack_ms},
                             {"stage1_ms", r.timing.stage1_ms},
                             {"correspondence_ms", r.timing.correspondence_ms},
                             {"stage2_ms", r.timing.stage2_ms},
                             {"total_ms", r.timing.total_ms}};
        std::printf("%s timing %s\n", id.c_str(), timing.dump().c_str());
    }
    return kOk;
}

struct EvalArgs {
    std::string gt, out;
    std::vector<std::string> preds;  // name=dir
    int bins = 8;
};

int cmd_eval(const EvalArgs& a) {
    print_header("eval", {{"gt", a.gt}, {"out", a.out}, {"pred", a.preds}, {"bins", a.bins}});
    const Dataset ds = Dataset::open(a.gt);
    const Intrinsics& k = ds.calibration().camera;
    std::vector<eval::MethodResult> results;
    for (const auto& spec : a.preds) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--pred expects name=dir, got '" + spec + "'");
        const std::string name = spec.substr(0, eq);
        const fs::path dir = spec.substr(eq + 1);
        std::vector<double> pooled;
        std::vector<eval::ProfileBin> profile;
        std::vector<double> bin_sums(a.bins, 0.0);
        std::vector<std::size_t> bin_counts(a.bins, 0);
        std::vector<eval::ErrorMap> maps;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const std::string& id = ds.entries()[i].id;
            const CaptureSet cs = ds.load(i);
            const NormalMap pred = read_normals(dir / id);
            bool any = false;
            for (int y = 0; y < cs.height(); ++y)
                for (int x = 0; x < cs.width(); ++x) any = any || (cs.corr_mask(y, x) && pred.valid(y, x));
            if (!any) continue;
            eval::ErrorMap m = eval::angular_error_map(pred, cs.gt_normal, cs.corr_mask);
            const auto v = m.values();
            pooled.insert(pooled.end(), v.begin(), v.end());
            const fs::path maps_dir = fs::path(a.out) / "maps" / name;
            fs::create_directories(maps_dir);
            io::write_pgm(maps_dir / (id + ".pgm"), eval::render_error_map(m));
            maps.push_back(std::move(m));
        }
        if (maps.empty()) throw DataError("method '" + name + "' has no valid pixels on the evaluation mask");
        // Pooled radial profile: one combined map per sample, same intrinsics.
        double r_max = 0.0;
        for (const auto& m : maps)
            for (int y = 0; y < m.height(); ++y)
                for (int x = 0; x < m.width(); ++x)
                    if (m.valid(y, x)) r_max = std::max(r_max, std::hypot(x - k.cx, y - k.cy));
        profile.resize(a.bins);
        for (int b = 0; b < a.bins; ++b) profile[b] = {b, r_max * b / a.bins, r_max * (b + 1) / a.bins, {}, 0};
        for (const auto& m : maps)
            for (int y = 0; y < m.height(); ++y)
                for (int x = 0; x < m.width(); ++x) {
                    if (!m.valid(y, x)) continue;
                    const double r = std::hypot(x - k.cx, y - k.cy);
                    const int b = r_max > 0.0 ? std::min(a.bins - 1, static_cast<int>(r / r_max * a.bins)) : 0;
                    bin_sums[b] += m.deg(y, x);
                    ++bin_counts[b];
                }
        for (int b = 0; b < a.bins; ++b) {
            profile[b].count = bin_counts[b];
            if (bin_counts[b]) profile[b].mean_deg = bin_sums[b] / static_cast<double>(bin_counts[b]);
        }
        results.push_back({name, eval::error_stats(pooled), profile, maps.size() == 1 ? std::optional(maps[0]) : std::nullopt});
    }
    eval::write_report(results, a.out);
    std::fputs(eval::report_csv(results).c_str(), stdout);
    return kOk;
}

// ---------------------------------------------------------------------------

int cmd_selftest() {
    print_header("selftest", json::object());
    int failures = 0;
    auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        std::printf("%s %s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
        failures += ok ? 0 : 1;
    };
    char buf[128];

    // Gradient checks.
    using T = nn::Tensor<double>;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto rnd = [&](nn::Shape s, double away = 0.0) {
        T t = T::zeros(s);
        for (double& v : t.values()) {
            v = u(rng);
            if (std::abs(v) < away) v += v < 0 ? -away : away;
        }
        return t;
    };
    const T mask = [&] {
        T m = T::zeros({2, 1, 4, 4});
        for (std::size_t i = 0; i < m.size(); ++i) m.values()[i] = i % 3 ? 1.0 : 0.0;
        return m;
    }();
    struct Case {
        const char* name;
        nn::GradFn f;
        std::vector<nn::Shape> shapes;
        double away;
    };
    const T gt = nn::l2_normalize(rnd({2, 3, 4, 4})).detach();
    const std::vector<Case> cases = {
        {"conv2d", [](const auto& in) { return nn::conv2d(in[0], in[1], in[2], 1, 1); }, {{2, 2, 5, 5}, {3, 2, 3, 3}, {1, 3, 1, 1}}, 0},
        {"conv2d_stride2", [](const auto& in) { return nn::conv2d(in[0], in[1], in[2], 2, 1); }, {{1, 2, 6, 6}, {3, 2, 3, 3}, {1, 3, 1, 1}}, 0},
        {"relu", [](const auto& in) { return nn::relu(in[0]); }, {{2, 3, 4, 4}}, 0.05},
        {"sigmoid", [](const auto& in) { return nn::sigmoid(in[0]); }, {{2, 3, 4, 4}}, 0},
        {"upsample", [](const auto& in) { return nn::upsample_nearest(in[0]); }, {{2, 3, 3, 3}}, 0},
        {"concat", [](const auto& in) { return nn::concat<double>({in[0], in[1]}); }, {{2, 2, 3, 3}, {2, 1, 3, 3}}, 0},
        {"l2_normalize", [](const auto& in) { return nn::l2_normalize(in[0]); }, {{2, 3, 3, 3}}, 0},
        {"film", [](const auto& in) { return nn::film(in[0], in[1], in[2]); }, {{2, 3, 4, 4}, {2, 3, 1, 1}, {2, 3, 4, 4}}, 0},
        {"masked_mean_angular_error",
         [&](const auto& in) { return nn::masked_mean_angular_error(nn::l2_normalize(in[0]), gt, mask); }, {{2, 3, 4, 4}}, 0},
        {"masked_l1", [&](const auto& in) { return nn::masked_l1(in[0], gt, mask); }, {{2, 3, 4, 4}}, 0},
    };
    for (const auto& c : cases) {
        double worst = 0.0;
        for (int s = 0; s < 5; ++s) {
            std::vector<T> inputs;
            for (const auto& sh : c.shapes) inputs.push_back(rnd(sh, c.away));
            worst = std::max(worst, nn::gradcheck(c.f, inputs, 100 + s).max_relative_error);
        }
        std::snprintf(buf, sizeof buf, "max_rel_err=%.3e", worst);
        report(std::string("grad.") + c.name, worst < 1e-4, buf);
    }

    // Stokes round trip.
    {
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const double s0 = 0.01 + std::abs(u(rng));
            const double p = std::abs(u(rng));
            const double a = u(rng) * std::numbers::pi;
            const Stokes s{s0, s0 * p * std::cos(a), s0 * p * std::sin(a)};
            double in[4];
            for (int k = 0; k < 4; ++k) in[k] = sample_polarizer(s, kPolarizerAngles[k]);
            const Stokes r = stokes_from_intensities(in[0], in[1], in[2], in[3]);
            worst = std::max({worst, std::abs(r.s0 - s.s0) / s0, std::abs(r.s1 - s.s1) / s0, std::abs(r.s2 - s.s2) / s0});
        }
        std::snprintf(buf, sizeof buf, "max_rel_err=%.3e", worst);
        report("stokes.round_trip", worst <= 1e-12, buf);
    }

    // Correspondence self-consistency on a noise-free sphere.
    {
        const Calibration calib = default_calibration(64);
        const CaptureSet cs = render(Scene::make_sphere({{0, 0, 500}, 110}), calib, default_pattern(calib.screen),
                                     kNoNoise, 1);
        NormalMap n = cs.gt_normal;
        n.mask = cs.corr_mask;
        const auto cm = compute_correspondence(cs.gt_depth, n, calib.camera, calib.screen);
        double worst = 0.0;
        std::size_t count = 0;
        for (int y = 0; y < cs.height(); ++y) {
            for (int x = 0; x < cs.width(); ++x) {
                if (!cs.corr_mask(y, x)) continue;
                ++count;
                worst = cm.valid(y, x) ? std::max(worst, std::hypot(cm.uv(y, x, 0) - cs.gt_corr(y, x, 0),
                                                                  cm.uv(y, x, 1) - cs.gt_corr(y, x, 1)))
                                       : std::numeric_limits<double>::infinity();
            }
        }
        std::snprintf(buf, sizeof buf, "max_px=%.3e pixels=%zu", worst, count);
        report("correspondence.self_consistency", count > 0 && worst < 0.5, buf);
    }
    std::printf("selftest %s (%d failure%s)\n", failures ? "FAILED" : "passed", failures, failures == 1 ? "" : "s");
    return failures ? kNumeric : kOk;
}

int thread_count(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("POLCAST_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
        throw UsageError(std::string("POLCAST_THREADS must be a positive integer, got '") + env + "'");
    }
    return 0;  // hardware default
}

int fail(int code, const char* kind, const std::string& message) {
    std::string clean = message;
    for (char& c : clean) {
        if (c == '\n' || c == '"') c = '\'';
    }
    std::fprintf(stderr, "error code=%d kind=%s message=\"%s\"\n", code, kind, clean.c_str());
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polarimetric 3D imaging of specular surfaces: digital twin, baselines and learned reconstruction"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: POLCAST_THREADS or hardware)");
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Render a synthetic dataset");
    g->add_option("--out", gen.out, "Output directory")->required();
    g->add_option("--config", gen.config, "Dataset config JSON (flags override)");
    g->add_option("--n", gen.n, "Number of samples");
    g->add_option("--res", gen.res, "Image resolution (square)");
    g->add_option("--seed", gen.seed, "Root seed");
    g->add_option("--snr-min", gen.snr_min, "Minimum SNR in dB");
    g->add_option("--snr-max", gen.snr_max, "Maximum SNR in dB");
    g->add_option("--sphere-fraction", gen.sphere_fraction, "Fraction of sphere scenes");
    g->add_flag("--no-noise", gen.no_noise, "Render noise-free captures");

    SampleArgs base;
    auto* b = app.add_subcommand("baseline", "Orthographic shape-from-polarization baseline");
    b->add_option("--data", base.data, "Dataset directory")->required();
    b->add_option("--out", base.out, "Output directory")->required();
    b->add_option("--sample", base.samples, "Sample id (repeatable; default all)");

    CorrArgs corr;
    auto* c = app.add_subcommand("correspond", "Analytic camera-screen correspondence");
    c->add_option("--data", corr.data, "Dataset directory")->required();
    c->add_option("--out", corr.out, "Output directory")->required();
    c->add_option("--pred", corr.pred, "Inference output directory (uses coarse depth/normal instead of ground truth)");
    c->add_option("--sample", corr.samples, "Sample id (repeatable; default all)");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train both stages");
    t->add_option("--train", tr.train, "Training dataset")->required();
    t->add_option("--val", tr.val, "Validation dataset")->required();
    t->add_option("--out", tr.out, "Output directory")->required();
    t->add_option("--config", tr.config, "Model config JSON (flags override)");
    t->add_option("--epochs", tr.epochs, "Epochs per stage");
    t->add_option("--batch", tr.batch, "Batch size");
    t->add_option("--width", tr.width, "Base channel width");
    t->add_option("--levels", tr.levels, "Encoder levels");
    t->add_option("--res", tr.res, "Input resolution");
    t->add_option("--lr0", tr.lr0, "Initial learning rate");
    t->add_option("--seed", tr.seed, "Seed");

    InferArgs inf;
    auto* i = app.add_subcommand("infer", "Run the trained pipeline");
    i->add_option("--model", inf.model, "Training output directory (model.pnnc + config.json)")->required();
    i->add_option("--data", inf.data, "Dataset directory")->required();
    i->add_option("--out", inf.out, "Output directory")->required();
    i->add_option("--sample", inf.samples, "Sample id (repeatable; default all)");

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Error statistics, radial profiles and error maps");
    e->add_option("--gt", ev.gt, "Ground-truth dataset directory")->required();
    e->add_option("--pred", ev.preds, "name=dir of per-sample normal.pfm/mask.pgm (repeatable)")->required();
    e->add_option("--out", ev.out, "Output directory")->required();
    e->add_option("--bins", ev.bins, "Radial profile bins")->check(CLI::Range(2, 1000));

    auto* s = app.add_subcommand("selftest", "Gradient, Stokes and correspondence checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        if (err.get_exit_code() == 0) return app.exit(err);
        app.exit(err);
        return kUsage;
    }

    try {
        spdlog::set_level(spdlog::level::from_str(log_level));
        const int n_threads = thread_count(threads);
#ifdef _OPENMP
        if (n_threads > 0) omp_set_num_threads(n_threads);
#else
        (void)n_threads;
#endif
        if (g->parsed()) return cmd_gen(gen, *g);
        if (b->parsed()) return cmd_baseline(base);
        if (c->parsed()) return cmd_correspond(corr);
        if (t->parsed()) return cmd_train(tr, *t);
        if (i->parsed()) return cmd_infer(inf);
        if (e->parsed()) return cmd_eval(ev);
        if (s->parsed()) return cmd_selftest();
        return fail(kUsage, "usage", "no subcommand");
    } catch (const UsageError& err) {
        return fail(kUsage, "usage", err.what());
    } catch (const NumericError& err) {
        return fail(kNumeric, "numeric", err.what());
    } catch (const DataError& err) {
        return fail(kData, "data", err.what());
    } catch (const DomainError& err) {
        return fail(kData, "domain", err.what());
    } catch (const std::exception& err) {
        return fail(kData, "error", err.what());
    }
}
