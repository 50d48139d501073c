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

// Fresnel reflection, specular Stokes synthesis, four-angle micro-polarizer
// sampling and Stokes/DoLP/AoLP analysis.
//
// Polarizer and AoLP angles are measured in the image plane from the +x
// (column) axis toward +y (row) axis. Only linear polarization is modeled:
// a single specular bounce of unpolarized light produces no S3.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "polcast/errors.hpp"
#include "polcast/image.hpp"

namespace polcast {

inline constexpr double kDefaultRefractiveIndex = 1.5;

struct Stokes {
    double s0 = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;

    double linear_magnitude() const { return std::hypot(s1, s2); }
    double dolp() const { return s0 > 0.0 ? linear_magnitude() / s0 : 0.0; }
    /// Angle of linear polarization in [0, pi).
    double aolp() const {
        double a = 0.5 * std::atan2(s2, s1);
        if (a < 0.0) a += std::numbers::pi;
        if (a >= std::numbers::pi) a -= std::numbers::pi;
        return a;
    }
    bool realizable(double tol = 1e-9) const { return s0 >= 0.0 && linear_magnitude() <= s0 * (1.0 + tol); }
};

struct Reflectance {
    double rs = 0.0;
    double rp = 0.0;
};

inline void check_refractive_index(double n) {
    if (!(n > 1.0) || !std::isfinite(n)) throw DomainError("refractive index must be > 1");
}

inline void check_incidence(double theta_i) {
    if (!(theta_i >= 0.0 && theta_i < 0.5 * std::numbers::pi)) {
        throw DomainError("incidence angle must lie in [0, pi/2)");
    }
}

inline double brewster_angle(double n) {
    check_refractive_index(n);
    return std::atan(n);
}

/// Air-to-dielectric Fresnel power reflectances for s and p polarization.
inline Reflectance fresnel_coeffs(double theta_i, double n) {
    check_incidence(theta_i);
    check_refractive_index(n);
    const double ci = std::cos(theta_i);
    const double si = std::sin(theta_i);
    const double ct = std::sqrt(std::max(0.0, 1.0 - (si * si) / (n * n)));
    const double rs = (ci - n * ct) / (ci + n * ct);
    const double rp = (n * ci - ct) / (n * ci + ct);
    return {rs * rs, rp * rp};
}

/// Degree of linear polarization of specularly reflected unpolarized light.
inline double specular_dolp(double theta_i, double n) {
    const auto [rs, rp] = fresnel_coeffs(theta_i, n);
    const double sum = rs + rp;
    return sum > 0.0 ? (rs - rp) / sum : 0.0;
}

enum class Branch { below_brewster, above_brewster };

struct ZenithEstimate {
    double theta = 0.0;    // radians
    bool clamped = false;  // rho unattainable on the branch; theta is the branch endpoint
};

/// Largest incidence angle the above-Brewster branch searches.
inline constexpr double kGrazingLimit = 0.5 * std::numbers::pi - 1e-6;

/// Inverts specular_dolp on one monotone branch by bisection.
inline ZenithEstimate invert_dolp(double rho, double n, Branch branch) {
    if (!(rho >= 0.0) || std::isnan(rho)) throw DomainError("invert_dolp: rho must be non-negative");
    const double brewster = brewster_angle(n);
    double lo = branch == Branch::below_brewster ? 0.0 : brewster;
    double hi = branch == Branch::below_brewster ? brewster : kGrazingLimit;
    // g(theta) = specular_dolp - rho is increasing on the chosen interval once
    // the above-Brewster branch is mirrored.
    const double sign = branch == Branch::below_brewster ? 1.0 : -1.0;
    auto g = [&](double theta) { return sign * (specular_dolp(theta, n) - rho); };

    if (rho >= 1.0) return {brewster, rho > 1.0};
    if (g(lo) >= 0.0) return {lo, g(lo) > 0.0};
    if (g(hi) <= 0.0) return {hi, g(hi) < 0.0};

    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {0.5 * (lo + hi), false};
}

/// Reflected Stokes triple for unpolarized radiance `radiance` hitting a
/// dielectric at incidence `theta_i`; `phi_inc` is the image-plane orientation
/// of the plane of incidence. The reflected AoLP is perpendicular to it.
inline Stokes stokes_from_reflection(double theta_i, double phi_inc, double radiance, double n) {
    if (radiance < 0.0) throw DomainError("stokes_from_reflection: negative radiance");
    const auto [rs, rp] = fresnel_coeffs(theta_i, n);
    const double s0 = 0.5 * (rs + rp) * radiance;
    const double degree = (rs + rp) > 0.0 ? (rs - rp) / (rs + rp) : 0.0;
    const double alpha = phi_inc + 0.5 * std::numbers::pi;
    return {s0, s0 * degree * std::cos(2.0 * alpha), s0 * degree * std::sin(2.0 * alpha)};
}

/// Intensity behind an ideal linear polarizer at angle `phi`.
inline double sample_polarizer(const Stokes& s, double phi) {
    const double i = 0.5 * (s.s0 + s.s1 * std::cos(2.0 * phi) + s.s2 * std::sin(2.0 * phi));
    return std::max(0.0, i);
}

/// The four micro-polarizer orientations of the sensor, radians.
inline constexpr double kPolarizerAngles[4] = {0.0, 0.25 * std::numbers::pi, 0.5 * std::numbers::pi,
                                               0.75 * std::numbers::pi};

/// Stokes estimate from the four polarizer intensities.
inline Stokes stokes_from_intensities(double i0, double i45, double i90, double i135) {
    return {0.5 * (i0 + i45 + i90 + i135), i0 - i90, i45 - i135};
}

/// AoLP is unreliable below this DoLP.
inline constexpr double kAolpMinDolp = 0.01;
/// Pixels with S0 <= kS0RelativeFloor * max(S0) are invalid.
inline constexpr double kS0RelativeFloor = 1e-6;

struct StokesMap {
    Image<double> s0, s1, s2;
    Image<double> dolp;  // unclamped; noise can push it above 1
    Image<double> aolp;  // [0, pi)
    Mask valid;
    Mask aolp_reliable;

    int height() const noexcept { return s0.height(); }
    int width() const noexcept { return s0.width(); }
    Stokes at(int y, int x) const { return {s0(y, x), s1(y, x), s2(y, x)}; }
};

/// Per-pixel AoLP, 0.5 * atan2(S2, S1) wrapped into [0, pi). Pixels with
/// DoLP below kAolpMinDolp are flagged in `reliable`.
inline Image<double> compute_aolp(const StokesMap& sm, Mask* reliable = nullptr) {
    Image<double> out(sm.height(), sm.width());
    if (reliable) *reliable = Mask(sm.height(), sm.width());
    for (int y = 0; y < sm.height(); ++y) {
        for (int x = 0; x < sm.width(); ++x) {
            if (!sm.valid(y, x)) continue;
            out(y, x) = sm.at(y, x).aolp();
            if (reliable) (*reliable)(y, x) = sm.dolp(y, x) >= kAolpMinDolp ? 1 : 0;
        }
    }
    return out;
}

inline StokesMap compute_stokes(const Image<double>& i0, const Image<double>& i45, const Image<double>& i90,
                                const Image<double>& i135) {
    require_same_shape(i0, i45, "compute_stokes");
    require_same_shape(i0, i90, "compute_stokes");
    require_same_shape(i0, i135, "compute_stokes");
    const int h = i0.height();
    const int w = i0.width();
    StokesMap sm{Image<double>(h, w), Image<double>(h, w), Image<double>(h, w),
                 Image<double>(h, w), Image<double>(h, w), Mask(h, w), Mask(h, w)};
    double max_s0 = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Stokes s = stokes_from_intensities(i0(y, x), i45(y, x), i90(y, x), i135(y, x));
            sm.s0(y, x) = s.s0;
            sm.s1(y, x) = s.s1;
            sm.s2(y, x) = s.s2;
            max_s0 = std::max(max_s0, s.s0);
        }
    }
    const double eps = kS0RelativeFloor * max_s0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!(sm.s0(y, x) > eps)) continue;
            sm.valid(y, x) = 1;
            sm.dolp(y, x) = std::hypot(sm.s1(y, x), sm.s2(y, x)) / sm.s0(y, x);
        }
    }
    sm.aolp = compute_aolp(sm, &sm.aolp_reliable);
    return sm;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Standard normal deviate that depends only on (seed, counter), so pixels can
/// be drawn in any order or in parallel with identical results.
inline double counter_normal(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t a = splitmix64(seed ^ splitmix64(2 * counter));
    const std::uint64_t b = splitmix64(seed ^ splitmix64(2 * counter + 1));
    constexpr double inv = 1.0 / 9007199254740992.0;  // 2^-53
    const double u1 = (static_cast<double>(a >> 11) + 0.5) * inv;
    const double u2 = static_cast<double>(b >> 11) * inv;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace detail

/// Derives an independent child seed, e.g. one per polarizer channel.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return detail::splitmix64(seed ^ detail::splitmix64(stream + 0x5851f42d4c957f2dULL));
}

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

enum class SnrPolicy { capture_range, any };

/// Additive zero-mean Gaussian noise with variance mean(img^2) / 10^(snr/10),
/// clamped at zero. `snr_db = kNoNoise` returns the input unchanged.
inline Image<double> add_noise(const Image<double>& img, double snr_db, std::uint64_t seed,
                               SnrPolicy policy = SnrPolicy::capture_range) {
    if (img.empty()) throw DomainError("add_noise: empty image");
    if (std::isinf(snr_db) && snr_db > 0.0) return img;
    if (std::isnan(snr_db)) throw DomainError("add_noise: SNR is NaN");
    if (policy == SnrPolicy::capture_range && (snr_db < 40.0 || snr_db > 50.0)) {
        throw DomainError("add_noise: SNR outside the 40-50 dB capture range");
    }
    double power = 0.0;
    for (double v : img.data()) power += v * v;
    power /= static_cast<double>(img.size());
    const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));

    Image<double> out = img;
    auto data = out.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = std::max(0.0, data[i] + sigma * detail::counter_normal(seed, i));
    }
    return out;
}

}  // namespace polcast
