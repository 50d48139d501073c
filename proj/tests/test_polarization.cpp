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

#include <array>
#include <random>

#include <gtest/gtest.h>

#include "polcast/polarization.hpp"

using namespace polcast;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double deg(double d) { return d * kPi / 180.0; }

// Frozen high-precision values, n = 1.5 (tan/sin Fresnel forms evaluated at 50 digits).
struct FresnelRow {
    double theta_deg, rs, rp, dolp;
};
constexpr std::array<FresnelRow, 5> kFresnelTable{{
    {10.0, 0.041659486668064296, 0.038371483360990773, 0.041084136627105992},
    {30.0, 0.057796105403213094, 0.025249146548429986, 0.3919183588453085},
    {45.0, 0.092013363045524405, 0.0084664589789474762, 0.83147941928309809},
    {60.0, 0.17657148808284053, 0.0018019375215850362, 0.97979589711327124},
    {80.0, 0.53859490574958052, 0.23681380363336485, 0.38918972467612208},
}};

// Snell + sin/tan amplitude forms, independent of the cosine form used in the library.
Reflectance fresnel_oracle(double ti, double n) {
    if (ti == 0.0) {
        const double r = (n - 1) / (n + 1);
        return {r * r, r * r};
    }
    const double tt = std::asin(std::sin(ti) / n);
    const double rs = -std::sin(ti - tt) / std::sin(ti + tt);
    const double rp = std::tan(ti - tt) / std::tan(ti + tt);
    return {rs * rs, rp * rp};
}

using Vec3d = std::array<double, 3>;
using Mat3d = std::array<std::array<double, 3>, 3>;

Vec3d mul(const Mat3d& m, const Vec3d& v) {
    Vec3d out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i] += m[i][j] * v[j];
    return out;
}

Mat3d rotator(double a) {
    const double c = std::cos(2 * a), s = std::sin(2 * a);
    return {{{1, 0, 0}, {0, c, s}, {0, -s, c}}};
}

// Reflection Mueller matrix in the frame whose first axis is the s direction.
Mat3d fresnel_mueller(const Reflectance& r) {
    const double a = 0.5 * (r.rs + r.rp), b = 0.5 * (r.rs - r.rp), c = std::sqrt(r.rs * r.rp);
    return {{{a, b, 0}, {b, a, 0}, {0, 0, c}}};
}

}  // namespace

TEST(Fresnel, NormalIncidence) {
    const auto r = fresnel_coeffs(0.0, 1.5);
    EXPECT_NEAR(r.rs, 0.04, 1e-15);
    EXPECT_NEAR(r.rp, 0.04, 1e-15);
    EXPECT_NEAR(specular_dolp(0.0, 1.5), 0.0, 1e-15);
}

TEST(Fresnel, FrozenTable) {
    for (const auto& row : kFresnelTable) {
        const auto r = fresnel_coeffs(deg(row.theta_deg), 1.5);
        EXPECT_NEAR(r.rs, row.rs, 1e-14) << row.theta_deg;
        EXPECT_NEAR(r.rp, row.rp, 1e-14) << row.theta_deg;
        EXPECT_NEAR(specular_dolp(deg(row.theta_deg), 1.5), row.dolp, 1e-12) << row.theta_deg;
    }
}

TEST(Fresnel, BrewsterAngle) {
    EXPECT_NEAR(brewster_angle(1.3), 0.915100700553360433, 1e-15);
    EXPECT_NEAR(brewster_angle(1.5), 0.982793723247329068, 1e-15);
    EXPECT_NEAR(brewster_angle(1.8), 1.063697822402559671, 1e-15);
    EXPECT_LT(fresnel_coeffs(brewster_angle(1.5), 1.5).rp, 1e-30);
    EXPECT_NEAR(specular_dolp(brewster_angle(1.5), 1.5), 1.0, 1e-15);
}

TEST(Fresnel, DomainErrors) {
    EXPECT_THROW(fresnel_coeffs(kPi / 2, 1.5), DomainError);
    EXPECT_THROW(fresnel_coeffs(-0.1, 1.5), DomainError);
    EXPECT_THROW(fresnel_coeffs(0.3, 1.0), DomainError);
    EXPECT_THROW(brewster_angle(0.9), DomainError);
}

TEST(Fresnel, MatchesSinTanOracleAndRsDominates) {
    for (double n : {1.3, 1.5, 1.8}) {
        for (int i = 0; i < 10000; ++i) {
            const double ti = (kPi / 2) * i / 10000.0;
            const auto r = fresnel_coeffs(ti, n);
            const auto o = fresnel_oracle(ti, n);
            ASSERT_NEAR(r.rs, o.rs, 1e-12);
            ASSERT_NEAR(r.rp, o.rp, 1e-12);
            ASSERT_GE(r.rs, r.rp);
            ASSERT_LE(r.rs, 1.0);
        }
    }
}

TEST(SpecularDolp, MonotoneBranches) {
    const double n = 1.5;
    const double b = brewster_angle(n);
    double prev = -1.0;
    for (int i = 0; i <= 10000; ++i) {
        const double t = b * i / 10000.0;
        const double d = specular_dolp(t, n);
        ASSERT_GT(d, prev) << t;
        prev = d;
    }
    prev = 2.0;
    for (int i = 0; i <= 10000; ++i) {
        const double t = b + (kGrazingLimit - b) * i / 10000.0;
        const double d = specular_dolp(t, n);
        ASSERT_LT(d, prev) << t;
        prev = d;
    }
}

TEST(InvertDolp, Examples) {
    EXPECT_EQ(invert_dolp(0.0, 1.5, Branch::below_brewster).theta, 0.0);
    const auto at_one = invert_dolp(1.0, 1.5, Branch::above_brewster);
    EXPECT_NEAR(at_one.theta, brewster_angle(1.5), 1e-12);
    EXPECT_FALSE(at_one.clamped);
    const auto high = invert_dolp(1.2, 1.5, Branch::below_brewster);
    EXPECT_TRUE(high.clamped);
    EXPECT_NEAR(high.theta, brewster_angle(1.5), 1e-12);
    EXPECT_THROW(invert_dolp(-0.1, 1.5, Branch::below_brewster), DomainError);
}

TEST(InvertDolp, RoundTripBothBranches) {
    for (double n : {1.3, 1.5, 1.8}) {
        const double b = brewster_angle(n);
        for (int i = 1; i < 500; ++i) {
            const double below = b * i / 500.0;
            const double above = b + (deg(89.0) - b) * i / 500.0;
            ASSERT_NEAR(invert_dolp(specular_dolp(below, n), n, Branch::below_brewster).theta, below, 1e-6);
            ASSERT_NEAR(invert_dolp(specular_dolp(above, n), n, Branch::above_brewster).theta, above, 1e-6);
        }
    }
}

TEST(StokesFromReflection, AolpIsPerpendicularToPlaneOfIncidence) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ut(1e-3, deg(88.0)), up(0.0, kPi), ul(0.0, 2.0);
    for (int i = 0; i < 5000; ++i) {
        const double ti = ut(rng), phi = up(rng), radiance = ul(rng);
        const Stokes s = stokes_from_reflection(ti, phi, radiance, 1.5);
        ASSERT_TRUE(s.realizable());

        const double alpha = phi + kPi / 2;  // s direction in the image plane
        const Vec3d oracle =
            mul(rotator(-alpha), mul(fresnel_mueller(fresnel_oracle(ti, 1.5)), mul(rotator(alpha), {radiance, 0, 0})));
        ASSERT_NEAR(s.s0, oracle[0], 1e-12);
        ASSERT_NEAR(s.s1, oracle[1], 1e-12);
        ASSERT_NEAR(s.s2, oracle[2], 1e-12);
        if (s.dolp() > 1e-6) {
            double diff = std::fmod(s.aolp() - alpha, kPi);
            if (diff < -kPi / 2) diff += kPi;
            if (diff > kPi / 2) diff -= kPi;
            ASSERT_NEAR(diff, 0.0, 1e-9);
        }
    }
}

TEST(StokesFromReflection, NegativeRadianceThrows) {
    EXPECT_THROW(stokes_from_reflection(0.1, 0.0, -1.0, 1.5), DomainError);
}

TEST(SamplePolarizer, Examples) {
    for (double phi : {0.0, 0.3, 1.2}) EXPECT_DOUBLE_EQ(sample_polarizer({1, 0, 0}, phi), 0.5);
    EXPECT_NEAR(sample_polarizer({1, 1, 0}, 0.0), 1.0, 1e-15);
    EXPECT_NEAR(sample_polarizer({1, 1, 0}, kPi / 2), 0.0, 1e-15);
    EXPECT_NEAR(sample_polarizer({1, 0.6, 0.8}, 0.5 * std::atan2(0.8, 0.6)), 1.0, 1e-15);
}

TEST(SamplePolarizer, NonNegativeForRealizableStokes) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20000; ++i) {
        const double s0 = 3 * u(rng), m = s0 * u(rng), a = 2 * kPi * u(rng);
        const Stokes s{s0, m * std::cos(a), m * std::sin(a)};
        ASSERT_GE(sample_polarizer(s, kPi * u(rng)), 0.0);
    }
}

TEST(ComputeStokes, Examples) {
    Image<double> one(1, 1, 1, 1.0), zero(1, 1, 1, 0.0), half(1, 1, 1, 0.5);
    const auto a = compute_stokes(one, one, one, one);
    EXPECT_EQ(a.s0(0, 0), 2.0);
    EXPECT_EQ(a.s1(0, 0), 0.0);
    EXPECT_EQ(a.s2(0, 0), 0.0);
    EXPECT_EQ(a.dolp(0, 0), 0.0);
    const auto b = compute_stokes(one, half, zero, half);
    EXPECT_EQ(b.s0(0, 0), 1.0);
    EXPECT_EQ(b.s1(0, 0), 1.0);
    EXPECT_EQ(b.s2(0, 0), 0.0);
    EXPECT_EQ(b.dolp(0, 0), 1.0);
    EXPECT_THROW(compute_stokes(one, one, Image<double>(2, 1), one), DomainError);
}

TEST(ComputeStokes, DarkPixelsInvalid) {
    Image<double> img(1, 2);
    img(0, 1) = 1.0;
    const auto sm = compute_stokes(img, img, img, img);
    EXPECT_FALSE(sm.valid(0, 0));
    EXPECT_TRUE(sm.valid(0, 1));
}

TEST(ComputeStokes, FourAngleRoundTripIsExact) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 100;
    Image<double> imgs[4] = {Image<double>(n, n), Image<double>(n, n), Image<double>(n, n), Image<double>(n, n)};
    std::vector<Stokes> truth;
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const double s0 = 0.1 + u(rng), m = s0 * u(rng), a = 2 * kPi * u(rng);
            const Stokes s{s0, m * std::cos(a), m * std::sin(a)};
            truth.push_back(s);
            for (int k = 0; k < 4; ++k) imgs[k](y, x) = sample_polarizer(s, kPolarizerAngles[k]);
        }
    }
    const auto sm = compute_stokes(imgs[0], imgs[1], imgs[2], imgs[3]);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const Stokes& s = truth[y * n + x];
            ASSERT_NEAR(sm.s0(y, x), s.s0, 1e-12);
            ASSERT_NEAR(sm.s1(y, x), s.s1, 1e-12);
            ASSERT_NEAR(sm.s2(y, x), s.s2, 1e-12);
        }
    }
}

TEST(ComputeAolp, Examples) {
    EXPECT_NEAR((Stokes{1, 1, 0}.aolp()), 0.0, 1e-15);
    EXPECT_NEAR((Stokes{1, 0, 1}.aolp()), kPi / 4, 1e-15);
    EXPECT_NEAR((Stokes{1, -1, 0}.aolp()), kPi / 2, 1e-15);
    Image<double> i0(1, 2, 1, 0.5), i45(1, 2, 1, 0.5), i90(1, 2, 1, 0.5), i135(1, 2, 1, 0.5);
    i0(0, 1) = 0.6;
    i90(0, 1) = 0.4;
    i45(0, 0) = 0.501;
    i135(0, 0) = 0.499;
    const auto sm = compute_stokes(i0, i45, i90, i135);
    EXPECT_FALSE(sm.aolp_reliable(0, 0));  // DoLP 0.002
    EXPECT_TRUE(sm.aolp_reliable(0, 1));   // DoLP 0.2
    EXPECT_NEAR(sm.aolp(0, 1), 0.0, 1e-15);
}

TEST(AddNoise, InfiniteSnrIsIdentity) {
    Image<double> img(4, 4, 1, 0.3);
    const auto out = add_noise(img, kNoNoise, 5);
    EXPECT_TRUE(std::equal(out.data().begin(), out.data().end(), img.data().begin()));
}

TEST(AddNoise, PolicyAndErrors) {
    Image<double> img(4, 4, 1, 0.3);
    EXPECT_THROW(add_noise(img, 30.0, 1), DomainError);
    EXPECT_NO_THROW(add_noise(img, 30.0, 1, SnrPolicy::any));
    EXPECT_THROW(add_noise(Image<double>(), 45.0, 1), DomainError);
}

TEST(AddNoise, DeterministicPerSeed) {
    Image<double> img(32, 32, 1, 0.4);
    const auto a = add_noise(img, 45.0, 99);
    const auto b = add_noise(img, 45.0, 99);
    const auto c = add_noise(img, 45.0, 100);
    EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
    EXPECT_FALSE(std::equal(a.data().begin(), a.data().end(), c.data().begin()));
}

TEST(AddNoise, EmpiricalSnrWithinOneDb) {
    const Image<double> img(1024, 1024, 1, 1.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto out = add_noise(img, 40.0, seed);
        double noise_power = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double e = out.data()[i] - 1.0;
            noise_power += e * e;
        }
        noise_power /= static_cast<double>(out.size());
        const double snr = 10.0 * std::log10(1.0 / noise_power);
        EXPECT_NEAR(snr, 40.0, 1.0) << "seed " << seed;
    }
}
