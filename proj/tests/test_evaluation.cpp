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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "polcast/evaluation.hpp"
#include "polcast/io.hpp"
#include "polcast/renderer.hpp"
#include "polcast/sfp_baseline.hpp"
#include "test_util.hpp"

using namespace polcast;
using namespace polcast::eval;

namespace {

constexpr double kPi = std::numbers::pi;

NormalMap random_normals(int h, int w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    NormalMap m(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            m.set(y, x, Vec3(0.3 * g(rng), 0.3 * g(rng), -1.0).normalized());
            m.mask(y, x) = 1;
        }
    }
    return m;
}

ErrorMap filled(int h, int w, double deg) {
    ErrorMap m{Image<double>(h, w), Mask(h, w)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            m.deg(y, x) = deg;
            m.valid(y, x) = 1;
        }
    }
    return m;
}

Intrinsics centered(int n) { return Intrinsics{50.0, 50.0, (n - 1) / 2.0, (n - 1) / 2.0, n, n}; }

}  // namespace

TEST(AngularErrorMap, IdenticalIsZero) {
    const auto gt = random_normals(16, 16, 1);
    const auto m = angular_error_map(gt, gt, gt.mask);
    for (double v : m.values()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(m.values().size(), 256u);
}

TEST(AngularErrorMap, RigidRotationGivesConstantAngle) {
    const auto gt = random_normals(12, 12, 2);
    NormalMap pred = gt;
    const Eigen::AngleAxisd rot(5.0 * kPi / 180.0, Vec3(1, 2, 0.5).normalized());
    std::size_t checked = 0;
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 12; ++x) pred.set(y, x, rot * gt.at(y, x));
    const auto m = angular_error_map(pred, gt, gt.mask);
    for (int y = 0; y < 12; ++y) {
        for (int x = 0; x < 12; ++x) {
            // Rotation by t moves a vector at angle a from the axis by acos(1 - (1 - cos t) sin^2 a).
            const double s = gt.at(y, x).cross(rot.axis()).norm();
            const double want = std::acos(1.0 - (1.0 - std::cos(rot.angle())) * s * s) * 180.0 / kPi;
            ASSERT_NEAR(m.deg(y, x), want, 1e-9);
            ++checked;
        }
    }
    EXPECT_EQ(checked, 144u);

    // About an axis perpendicular to every normal of a constant map the angle is exactly 5.
    NormalMap flat(4, 4), turned(4, 4);
    const Eigen::AngleAxisd about_x(5.0 * kPi / 180.0, Vec3::UnitX());
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            flat.set(y, x, Vec3(0, 0, -1));
            flat.mask(y, x) = 1;
            turned.set(y, x, about_x * Vec3(0, 0, -1));
            turned.mask(y, x) = 1;
        }
    }
    for (double v : angular_error_map(turned, flat, flat.mask).values()) EXPECT_NEAR(v, 5.0, 1e-12);
}

TEST(AngularErrorMap, AntiparallelIsFinite) {
    NormalMap a(1, 2), b(1, 2);
    a.set(0, 0, Vec3(0, 0, -1));
    b.set(0, 0, Vec3(0, 0, 1));
    a.set(0, 1, Vec3(1, 0, 0));
    b.set(0, 1, Vec3(-1, 0, 0));
    a.mask.data()[0] = a.mask.data()[1] = b.mask.data()[0] = b.mask.data()[1] = 1;
    const auto m = angular_error_map(a, b, a.mask);
    for (double v : m.values()) {
        EXPECT_FALSE(std::isnan(v));
        EXPECT_NEAR(v, 180.0, 1e-9);
    }
}

TEST(AngularErrorMap, MaskGatesAndEmptyMaskThrows) {
    const auto gt = random_normals(4, 4, 3);
    Mask one(4, 4);
    one(2, 1) = 1;
    const auto m = angular_error_map(gt, gt, one);
    EXPECT_EQ(m.values().size(), 1u);
    EXPECT_FALSE(m.valid(0, 0));
    EXPECT_THROW(angular_error_map(gt, gt, Mask(4, 4)), DomainError);
}

TEST(ErrorStats, ConstantHalfDegree) {
    const auto s = error_stats(filled(5, 5, 0.5));
    EXPECT_DOUBLE_EQ(s.mean_deg, 0.5);
    EXPECT_DOUBLE_EQ(s.median_deg, 0.5);
    EXPECT_EQ(s.pct(1.0), 100.0);
    EXPECT_EQ(s.pct(2.0), 100.0);
    EXPECT_EQ(s.pct(3.0), 100.0);
    EXPECT_EQ(s.n_valid, 25u);
}

TEST(ErrorStats, HalfAndHalf) {
    std::vector<double> v(10, 0.5);
    v.insert(v.end(), 10, 2.5);
    const auto s = error_stats(v);
    EXPECT_DOUBLE_EQ(s.mean_deg, 1.5);
    EXPECT_EQ(s.pct(1.0), 50.0);
    EXPECT_EQ(s.pct(2.0), 50.0);
    EXPECT_EQ(s.pct(3.0), 100.0);
    EXPECT_THROW(s.pct(4.0), DomainError);
}

TEST(ErrorStats, ThresholdIsStrict) {
    const std::vector<double> v{1.0, 2.0, 3.0, 0.999};
    const auto s = error_stats(v);
    EXPECT_EQ(s.pct(1.0), 25.0);
    EXPECT_EQ(s.pct(2.0), 50.0);
    EXPECT_EQ(s.pct(3.0), 75.0);
}

TEST(ErrorStats, MedianOfEvenCount) {
    const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
    EXPECT_DOUBLE_EQ(error_stats(v).median_deg, 2.5);
}

TEST(ErrorStats, PermutationInvariantAndMonotone) {
    std::mt19937_64 rng(4);
    std::exponential_distribution<double> e(0.6);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(1 + trial * 7);
        for (double& x : v) x = e(rng);
        const auto a = error_stats(v, {0.5, 1.0, 2.0, 3.0, 8.0});
        std::shuffle(v.begin(), v.end(), rng);
        const auto b = error_stats(v, {0.5, 1.0, 2.0, 3.0, 8.0});
        EXPECT_NEAR(a.mean_deg, b.mean_deg, 1e-12);
        EXPECT_EQ(a.median_deg, b.median_deg);
        EXPECT_EQ(a.pct_below, b.pct_below);
        for (std::size_t i = 0; i < a.pct_below.size(); ++i) {
            EXPECT_GE(a.pct_below[i], 0.0);
            EXPECT_LE(a.pct_below[i], 100.0);
            if (i > 0) EXPECT_GE(a.pct_below[i], a.pct_below[i - 1]);
        }
    }
}

TEST(RadialProfile, ConstantMapIsFlat) {
    const auto p = radial_profile(filled(32, 32, 1.25), centered(32), 8);
    ASSERT_EQ(p.size(), 8u);
    for (const auto& b : p) {
        ASSERT_TRUE(b.mean_deg);
        EXPECT_DOUBLE_EQ(*b.mean_deg, 1.25);
        EXPECT_GT(b.count, 0u);
    }
    EXPECT_THROW(radial_profile(filled(4, 4, 1.0), centered(4), 1), DomainError);
}

TEST(RadialProfile, FieldAngleMapIsStrictlyIncreasing) {
    const int n = 64;
    const Intrinsics k = centered(n);
    ErrorMap m = filled(n, n, 0.0);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) m.deg(y, x) = angle_between(view_direction(x, y, k), Vec3(0, 0, 1));
    const auto p = radial_profile(m, k, 8);
    for (std::size_t b = 1; b < p.size(); ++b) EXPECT_GT(*p[b].mean_deg, *p[b - 1].mean_deg) << b;
}

TEST(RadialProfile, EmptyBinIsAbsent) {
    const int n = 33;
    ErrorMap m{Image<double>(n, n), Mask(n, n)};
    m.valid(16, 16) = 1;
    m.deg(16, 16) = 2.0;
    m.valid(0, 0) = 1;
    m.deg(0, 0) = 4.0;
    const auto p = radial_profile(m, centered(n), 4);
    ASSERT_TRUE(p.front().mean_deg);
    EXPECT_EQ(*p.front().mean_deg, 2.0);
    ASSERT_TRUE(p.back().mean_deg);
    EXPECT_EQ(*p.back().mean_deg, 4.0);
    for (int b = 1; b < 3; ++b) {
        EXPECT_FALSE(p[b].mean_deg);
        EXPECT_EQ(p[b].count, 0u);
    }
    EXPECT_NE(profile_csv(p).find("\n1,"), std::string::npos);
    EXPECT_NE(profile_csv(p).find(",,0\n"), std::string::npos);
}

TEST(RadialProfile, CountWeightedMeansReconstructGlobalMean) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 12.0);
    std::bernoulli_distribution keep(0.7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 24 + trial;
        ErrorMap m{Image<double>(n, n), Mask(n, n)};
        for (int y = 0; y < n; ++y) {
            for (int x = 0; x < n; ++x) {
                m.valid(y, x) = keep(rng);
                m.deg(y, x) = u(rng);
            }
        }
        const auto p = radial_profile(m, centered(n), 2 + trial % 9);
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& b : p) {
            if (b.mean_deg) sum += *b.mean_deg * static_cast<double>(b.count);
            count += b.count;
        }
        const auto s = error_stats(m);
        EXPECT_EQ(count, s.n_valid);
        EXPECT_NEAR(sum / static_cast<double>(count), s.mean_deg, 1e-9);
    }
}

TEST(Report, SchemaAndOrdering) {
    const std::string one = report_csv({{"only", error_stats(filled(2, 2, 0.5)), {}, std::nullopt}});
    EXPECT_EQ(one, "method,mean_deg,median_deg,pct_lt1,pct_lt2,pct_lt3,n_valid\n"
                   "only,0.500000,0.500000,100.0000,100.0000,100.0000,4\n");
    const std::string two = report_csv({{"worse", error_stats(filled(2, 2, 4.0)), {}, std::nullopt},
                                        {"better", error_stats(filled(2, 2, 1.5)), {}, std::nullopt}});
    EXPECT_LT(two.find("better,"), two.find("worse,"));
    EXPECT_EQ(std::count(two.begin(), two.end(), '\n'), 3);
}

TEST(Report, GrayRamp) {
    ErrorMap m{Image<double>(1, 5), Mask(1, 5)};
    const double deg[] = {0.0, 5.0, 10.0, 25.0, 3.0};
    for (int x = 0; x < 5; ++x) {
        m.deg(0, x) = deg[x];
        m.valid(0, x) = x < 4;
    }
    const auto img = render_error_map(m);
    EXPECT_EQ(img(0, 0), 0);
    EXPECT_EQ(img(0, 1), 128);
    EXPECT_EQ(img(0, 2), 255);
    EXPECT_EQ(img(0, 3), 255);
    EXPECT_EQ(img(0, 4), 0);
}

// Baseline and ground truth on a fixed noise-free sphere, compared to frozen report files.
TEST(Report, FixedSceneGolden) {
    tutil::ScratchDir dir;
    const auto calib = default_calibration(64);
    const auto cs = render(Scene::make_sphere({Vec3(5.0, -4.0, 500.0), 110.0}), calib, default_pattern(calib.screen),
                           kNoNoise, 0);
    const auto sm = compute_stokes(cs.i0, cs.i45, cs.i90, cs.i135);
    const auto base = sfp::reconstruct(sm, 1.5, cs.gt_normal, cs.corr_mask);
    const auto base_map = angular_error_map(base, cs.gt_normal, cs.corr_mask);
    const auto gt_map = angular_error_map(cs.gt_normal, cs.gt_normal, cs.corr_mask);
    write_report({{"baseline", error_stats(base_map), radial_profile(base_map, calib.camera, 8), base_map},
                  {"gt", error_stats(gt_map), radial_profile(gt_map, calib.camera, 8), std::nullopt}},
                 dir.path());
    EXPECT_TRUE(std::filesystem::exists(dir / "error_baseline.pgm"));
    EXPECT_FALSE(std::filesystem::exists(dir / "error_gt.pgm"));
    for (const char* f : {"report.csv", "profile_baseline.csv"}) {
        if (tutil::update_golden()) std::filesystem::copy_file(dir / f, tutil::golden_path(std::string("sphere64_") + f),
                                                                std::filesystem::copy_options::overwrite_existing);
        EXPECT_EQ(tutil::read_file(dir / f), tutil::read_file(tutil::golden_path(std::string("sphere64_") + f))) << f;
    }
}
