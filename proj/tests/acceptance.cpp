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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "op_cases.hpp"
#include "polcast/correspondence.hpp"
#include "polcast/evaluation.hpp"
#include "polcast/nn/optim.hpp"
#include "polcast/pipeline.hpp"
#include "polcast/polarization.hpp"
#include "polcast/renderer.hpp"
#include "polcast/sfp_baseline.hpp"

using namespace polcast;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

// Tolerances and budgets.
constexpr double kStokesRelTol = 1e-12;
constexpr double kBrewsterRpTol = 1e-12;
constexpr double kInvertTolRad = 1e-6;
constexpr double kCorrP99Px = 0.1;
constexpr double kCorrMaxPx = 0.5;
constexpr double kMinSphereHalfAngleDeg = 12.0;
constexpr double kCenterBinMaxDeg = 0.5;
constexpr double kOuterBinMinDeg = 3.0;
constexpr double kGradRelTol = 1e-4;
constexpr int kGradSeeds = 20;
constexpr double kStage2MaxDeg = 3.0;
constexpr double kSnrTolDb = 1.0;
constexpr double kLrTol = 1e-12;

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(int id, const char* name, double seconds, double budget_s, const Outcome& o) {
    const bool in_budget = budget_s <= 0.0 || seconds < budget_s;
    const bool pass = o.pass && in_budget;
    if (!pass) ++failures;
    std::printf("%s criterion %d %s: %s; %.2f s", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), seconds);
    if (budget_s > 0.0) std::printf(" (budget %.0f s)", budget_s);
    std::printf("\n");
    std::fflush(stdout);
}

template <class F>
void run(int id, const char* name, double budget_s, F f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = f();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    report(id, name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), budget_s, o);
}

std::string strf(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

int cli(const std::string& args, const fs::path& log) {
    const std::string cmd = "\"" POLCAST_CLI "\" " + args + " >>\"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        files[fs::relative(e.path(), root).string()] = {std::istreambuf_iterator<char>(in), {}};
    }
    return files;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------

Outcome stokes_round_trip() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double s0 = 1e-3 + 10.0 * u(rng);
        const double m = s0 * u(rng);
        const double a = 2.0 * kPi * u(rng);
        const Stokes s{s0, m * std::cos(a), m * std::sin(a)};
        double in[4];
        for (int k = 0; k < 4; ++k) in[k] = sample_polarizer(s, kPolarizerAngles[k]);
        const Stokes r = stokes_from_intensities(in[0], in[1], in[2], in[3]);
        worst = std::max({worst, std::abs(r.s0 - s.s0) / s0, std::abs(r.s1 - s.s1) / s0, std::abs(r.s2 - s.s2) / s0});
    }
    return {worst <= kStokesRelTol, strf("max relative error %.3e over 10^4 triples (tol %.0e)", worst, kStokesRelTol)};
}

Outcome fresnel_oracle() {
    double worst_rp = 0.0;
    double worst_theta = 0.0;
    for (double n : {1.3, 1.5, 1.8}) {
        worst_rp = std::max(worst_rp, std::abs(fresnel_coeffs(brewster_angle(n), n).rp));
        const double b = brewster_angle(n);
        for (int i = 1; i <= 1000; ++i) {
            const double below = b * i / 1001.0;
            const double above = b + (0.5 * kPi - b) * i / 1001.0;
            const auto lo = invert_dolp(specular_dolp(below, n), n, Branch::below_brewster);
            const auto hi = invert_dolp(specular_dolp(above, n), n, Branch::above_brewster);
            worst_theta = std::max({worst_theta, std::abs(lo.theta - below), std::abs(hi.theta - above)});
        }
    }
    const bool pass = worst_rp <= kBrewsterRpTol && worst_theta <= kInvertTolRad;
    return {pass, strf("max |Rp(Brewster)| %.3e (tol %.0e), max inversion error %.3e rad on 1000 points per branch "
                      "(tol %.0e)",
                      worst_rp, kBrewsterRpTol, worst_theta, kInvertTolRad)};
}

Outcome digital_twin() {
    const auto calib = default_calibration(256);
    const auto cs = render(Scene::make_sphere({Vec3(-8.0, 6.0, 520.0), 115.0}), calib, default_pattern(calib.screen),
                           kNoNoise, 0);
    const auto cm = compute_correspondence(cs.gt_depth, cs.gt_normal, calib.camera, calib.screen);
    std::vector<double> err;
    int mismatched = 0;
    for (int y = 0; y < cs.height(); ++y) {
        for (int x = 0; x < cs.width(); ++x) {
            if (!cs.corr_mask(y, x)) continue;
            if (!cm.valid(y, x)) {
                ++mismatched;
                continue;
            }
            err.push_back(std::hypot(cm.uv(y, x, 0) - cs.gt_corr(y, x, 0), cm.uv(y, x, 1) - cs.gt_corr(y, x, 1)));
        }
    }
    if (err.empty()) return {false, "no valid pixels"};
    std::sort(err.begin(), err.end());
    const double p99 = err[static_cast<std::size_t>(std::ceil(0.99 * err.size())) - 1];
    const double mx = err.back();
    const bool pass = mismatched == 0 && p99 < kCorrP99Px && mx < kCorrMaxPx;
    return {pass, strf("p99 %.3e px (tol %.1f), max %.3e px (tol %.1f)", p99, kCorrP99Px, mx, kCorrMaxPx) +
                      ", pixels " + std::to_string(err.size()) + ", unresolved " + std::to_string(mismatched)};
}

Outcome periphery_profile() {
    const auto calib = default_calibration(256);
    const Sphere sphere{Vec3(0, 0, 500), 110.0};
    const double half_angle = std::asin(sphere.radius / sphere.center.norm()) * 180.0 / kPi;
    const auto cs = render(Scene::make_sphere(sphere), calib, default_pattern(calib.screen), kNoNoise, 0);
    const auto sm = compute_stokes(cs.i0, cs.i45, cs.i90, cs.i135);
    const auto pred = sfp::reconstruct(sm, kDefaultRefractiveIndex, cs.gt_normal, cs.corr_mask);
    const auto profile = eval::radial_profile(eval::angular_error_map(pred, cs.gt_normal, cs.corr_mask), calib.camera, 8);
    bool monotone = true;
    std::string bins;
    for (std::size_t b = 0; b < profile.size(); ++b) {
        if (!profile[b].mean_deg) return {false, "empty bin " + std::to_string(b)};
        bins += strf(b ? " %.3f" : "%.3f", *profile[b].mean_deg);
        if (b > 0 && *profile[b].mean_deg < *profile[b - 1].mean_deg) monotone = false;
    }
    const double center = *profile.front().mean_deg;
    const double outer = *profile.back().mean_deg;
    const bool pass = half_angle >= kMinSphereHalfAngleDeg && monotone && center < kCenterBinMaxDeg &&
                      outer > kOuterBinMinDeg;
    return {pass, strf("sphere half-angle %.2f deg, center %.3f deg (< %.1f), outer %.3f deg", half_angle, center,
                      kCenterBinMaxDeg, outer) +
                      strf(" (> %.1f), ", kOuterBinMinDeg) + (monotone ? "non-decreasing" : "NOT monotone") +
                      " [" + bins + "]"};
}

Outcome gradient_suite() {
    double worst = 0.0;
    std::string worst_name;
    int checked = 0;
    for (int seed = 1; seed <= kGradSeeds; ++seed) {
        for (const auto& c : tutil::op_cases(seed)) {
            const double e = tutil::check_case(c, seed);
            ++checked;
            if (!(e <= worst)) {
                worst = e;
                worst_name = c.name;
            }
        }
    }
    return {worst < kGradRelTol, strf("%.0f op checks, worst relative error %.3e", checked, worst) + " (" + worst_name +
                                     strf(", tol %.0e)", kGradRelTol)};
}

Outcome noise_calibration() {
    const Image<double> img(1024, 1024, 1, 0.6);
    double worst = 0.0;
    for (double snr : {40.0, 50.0}) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto out = add_noise(img, snr, seed);
            double noise = 0.0;
            for (std::size_t i = 0; i < out.size(); ++i) {
                const double e = out.data()[i] - img.data()[i];
                noise += e * e;
            }
            const double empirical = 10.0 * std::log10((0.6 * 0.6) / (noise / static_cast<double>(out.size())));
            worst = std::max(worst, std::abs(empirical - snr));
        }
    }
    return {worst <= kSnrTolDb, strf("max |empirical - target| %.4f dB at 40 and 50 dB over 10 seeds (tol %.0f)", worst,
                                    kSnrTolDb)};
}

// Training run shared by criteria 6, 7 and 9.
struct TrainingRun {
    fs::path root;
    bool ok = false;
    std::string error;
    double seconds = 0.0;
};

TrainingRun train_documented(const fs::path& root, const std::string& tag) {
    TrainingRun r{root};
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path log = root / (tag + ".log");
    const fs::path out = root / tag;
    const std::string train = "train --train " + q(root / "data_train") + " --val " + q(root / "data_val") +
                              " --out " + q(out);
    if (cli(train, log) != 0) {
        r.error = "train failed, see " + log.string();
        return r;
    }
    if (cli("infer --model " + q(out) + " --data " + q(root / "data_test") + " --out " + q(out / "infer"), log) !=
        0) {
        r.error = "infer failed, see " + log.string();
        return r;
    }
    r.ok = true;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

Outcome training_ordering(const TrainingRun& run) {
    if (!run.ok) return {false, run.error};
    const auto cfg =
        pipeline::ModelConfig::from_json(nlohmann::json::parse(std::ifstream(run.root / "run_a" / "config.json")));
    const auto model = pipeline::Model::load(run.root / "run_a" / "model.pnnc", cfg);
    const auto e = pipeline::evaluate_held_out(model, Dataset::open(run.root / "data_test"));
    if (e.stage2.empty() || e.stage1.empty() || e.baseline.empty()) return {false, "no held-out pixels"};
    const double s1 = mean(e.stage1), s2 = mean(e.stage2), base = mean(e.baseline);
    const bool pass = s2 < s1 && s1 < base && s2 < kStage2MaxDeg;
    return {pass, strf("held-out MAE stage-2 %.3f < stage-1 %.3f < baseline %.3f deg, stage-2 < %.1f", s2, s1, base,
                      kStage2MaxDeg) +
                      " (" + std::to_string(e.stage2.size()) + " pixels, " + std::to_string(cfg.epochs) +
                      " epochs per stage)"};
}

Outcome determinism(const fs::path& root, const TrainingRun& a, const TrainingRun& b) {
    if (!a.ok || !b.ok) return {false, a.ok ? b.error : a.error};
    const bool gen_same = snapshot_tree(root / "data_train") == snapshot_tree(root / "data_train_again");
    const std::vector<std::string> files{"model.pnnc", "config.json", "stage1_log.csv", "stage2_log.csv"};
    bool train_same = true;
    for (const auto& f : files) {
        std::ifstream fa(root / "run_a" / f, std::ios::binary), fb(root / "run_b" / f, std::ios::binary);
        train_same = train_same && std::string(std::istreambuf_iterator<char>(fa), {}) ==
                                       std::string(std::istreambuf_iterator<char>(fb), {});
    }
    const bool infer_same = snapshot_tree(root / "run_a" / "infer") == snapshot_tree(root / "run_b" / "infer");
    return {gen_same && train_same && infer_same,
            std::string("gen ") + (gen_same ? "identical" : "DIFFERS") + ", train " +
                (train_same ? "identical" : "DIFFERS") + ", infer " + (infer_same ? "identical" : "DIFFERS")};
}

Outcome schedule(const TrainingRun& run) {
    if (!run.ok) return {false, run.error};
    const auto cfg = nlohmann::json::parse(std::ifstream(run.root / "run_a" / "config.json"));
    const int epochs = cfg.at("epochs");
    const double lr0 = cfg.at("lr0");
    if (lr0 != 1e-4) return {false, strf("configured lr0 %.3e is not 1e-4", lr0)};
    double worst = 0.0;
    int rows = 0;
    for (const char* name : {"stage1_log.csv", "stage2_log.csv"}) {
        std::ifstream in(run.root / "run_a" / name);
        std::string line;
        std::getline(in, line);
        if (line != "epoch,lr,train_loss,val_mae_deg") return {false, std::string("bad header in ") + name};
        int expect = 0;
        while (std::getline(in, line)) {
            std::istringstream ss(line);
            int epoch;
            double lr;
            char comma;
            ss >> epoch >> comma >> lr;
            if (epoch != expect++) return {false, std::string("epoch gap in ") + name};
            worst = std::max(worst, std::abs(lr - nn::cosine_anneal(1e-4, epoch, epochs)));
            ++rows;
        }
        if (expect != epochs) return {false, std::string("row count mismatch in ") + name};
    }
    return {worst <= kLrTol, strf("%.0f logged epochs, max |lr - cosine_anneal(1e-4, t, T)| %.3e (tol %.0e)", rows,
                                 worst, kLrTol)};
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::warn);
    const fs::path root = fs::temp_directory_path() / "polcast_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);

    run(1, "stokes round trip", 1.0, stokes_round_trip);
    run(2, "fresnel/dolp oracle", 1.0, fresnel_oracle);
    run(3, "digital-twin correspondence", 30.0, digital_twin);
    run(4, "baseline periphery profile", 30.0, periphery_profile);
    run(5, "gradient suite", 60.0, gradient_suite);

    // Documented run: 200 train / 20 val / 40 held-out at 64x64, default model config.
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path gen_log = root / "gen.log";
    bool gen_ok = cli("gen --n 200 --res 64 --seed 1 --out " + q(root / "data_train"), gen_log) == 0 &&
                  cli("gen --n 200 --res 64 --seed 1 --out " + q(root / "data_train_again"), gen_log) == 0 &&
                  cli("gen --n 20 --res 64 --seed 2 --out " + q(root / "data_val"), gen_log) == 0 &&
                  cli("gen --n 40 --res 64 --seed 3 --out " + q(root / "data_test"), gen_log) == 0;
    TrainingRun a{root}, b{root};
    if (gen_ok) {
        a = train_documented(root, "run_a");
        b = train_documented(root, "run_b");
    } else {
        a.error = b.error = "gen failed, see " + gen_log.string();
    }
    const double train_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run(6, "toy training ordering", 0.0, [&] {
        auto o = training_ordering(a);
        o.detail += strf("; train + infer %.0f s per run", a.seconds);
        if (a.seconds >= 7200.0) o.pass = false;
        return o;
    });
    run(7, "determinism", 0.0, [&] {
        auto o = determinism(root, a, b);
        o.detail += strf("; both runs %.0f s", train_s);
        return o;
    });
    run(8, "noise calibration", 10.0, noise_calibration);
    run(9, "schedule exactness", 0.0, [&] { return schedule(a); });

    if (failures == 0) fs::remove_all(root);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
