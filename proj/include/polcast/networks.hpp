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

// Stage-1 U-Nets and the stage-2 dual-encoder FiLM network.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "polcast/nn/ops.hpp"
#include "polcast/nn/optim.hpp"

namespace polcast::nets {

using nn::Parameter;
using nn::ParameterList;
using nn::Tensor;

template <class T>
struct Conv {
    Tensor<T> w, b;
    int stride = 1;
    int pad = 0;

    Tensor<T> operator()(const Tensor<T>& x) const { return nn::conv2d(x, w, b, stride, pad); }
};

enum class Init { he, zero };

template <class T>
class ParamFactory {
public:
    ParamFactory(ParameterList<T>& params, std::mt19937_64& rng) : params_(params), rng_(rng) {}

    Conv<T> conv(const std::string& name, int ci, int co, int k, int stride = 1, Init init = Init::he) {
        Conv<T> c;
        c.w = Tensor<T>::zeros({co, ci, k, k}, true);
        c.b = Tensor<T>::zeros({1, co, 1, 1}, true);
        c.stride = stride;
        c.pad = k / 2;
        if (init == Init::he) nn::he_normal(c.w, ci * k * k, rng_);
        params_.push_back({name + ".w", c.w});
        params_.push_back({name + ".b", c.b});
        return c;
    }

private:
    ParameterList<T>& params_;
    std::mt19937_64& rng_;
};

/// Channel width at encoder level `l`.
inline int level_width(int base, int l) { return base << l; }

/// Level 0 keeps full resolution; each further level halves it with a
/// stride-2 convolution. Two 3x3 conv + ReLU per level.
template <class T>
class Encoder {
public:
    Encoder() = default;
    Encoder(ParamFactory<T>& f, const std::string& name, int in_ch, int levels, int width) {
        int ci = in_ch;
        for (int l = 0; l < levels; ++l) {
            const int co = level_width(width, l);
            const std::string p = name + ".l" + std::to_string(l);
            first_.push_back(f.conv(p + ".a", ci, co, 3, l == 0 ? 1 : 2));
            second_.push_back(f.conv(p + ".b", co, co, 3));
            ci = co;
        }
    }

    int levels() const { return static_cast<int>(first_.size()); }

    Tensor<T> block(int l, const Tensor<T>& x) const { return nn::relu(second_[l](nn::relu(first_[l](x)))); }

    std::vector<Tensor<T>> operator()(const Tensor<T>& x) const {
        std::vector<Tensor<T>> feats;
        Tensor<T> h = x;
        for (int l = 0; l < levels(); ++l) {
            h = block(l, h);
            feats.push_back(h);
        }
        return feats;
    }

private:
    std::vector<Conv<T>> first_, second_;
};

/// Upsample, concatenate the level's skip tensors, 3x3 conv + ReLU.
template <class T>
class Decoder {
public:
    Decoder() = default;
    /// skip_widths[l] is the total channel count of the skips joined at level l.
    Decoder(ParamFactory<T>& f, const std::string& name, int levels, int width, const std::vector<int>& skip_widths) {
        for (int l = levels - 2; l >= 0; --l) {
            const int ci = level_width(width, l + 1) + skip_widths[l];
            convs_.push_back(f.conv(name + ".up" + std::to_string(l), ci, level_width(width, l), 3));
        }
    }

    Tensor<T> operator()(Tensor<T> h, const std::vector<std::vector<Tensor<T>>>& skips) const {
        const int levels = static_cast<int>(convs_.size()) + 1;
        for (int l = levels - 2, k = 0; l >= 0; --l, ++k) {
            std::vector<Tensor<T>> parts{nn::upsample_nearest(h)};
            parts.insert(parts.end(), skips[l].begin(), skips[l].end());
            h = nn::relu(convs_[k](nn::concat(parts)));
        }
        return h;
    }

private:
    std::vector<Conv<T>> convs_;
};

template <class T>
class UNet {
public:
    UNet() = default;
    UNet(ParamFactory<T>& f, const std::string& name, int in_ch, int levels, int width)
        : encoder_(f, name + ".enc", in_ch, levels, width) {
        std::vector<int> skips;
        for (int l = 0; l < levels; ++l) skips.push_back(level_width(width, l));
        decoder_ = Decoder<T>(f, name + ".dec", levels, width, skips);
    }

    /// Full-resolution decoder features (width channels).
    Tensor<T> operator()(const Tensor<T>& x) const {
        auto feats = encoder_(x);
        std::vector<std::vector<Tensor<T>>> skips;
        for (const auto& s : feats) skips.push_back({s});
        return decoder_(feats.back(), skips);
    }

private:
    Encoder<T> encoder_;
    Decoder<T> decoder_;
};

struct ArchSpec {
    int levels = 3;
    int width = 16;
    int polar_channels = 6;  // stack + ray channels
    int corr_channels = 5;   // (u', v', validity) + ray channels
    bool film_every_level = true;
};

inline void check_arch(const ArchSpec& a) {
    if (a.levels < 1 || a.levels > 6) throw DomainError("network: levels must be in [1, 6]");
    if (a.width < 1) throw DomainError("network: width must be positive");
}

/// Minimum input divisibility for the encoder/decoder round trip.
inline int resolution_multiple(const ArchSpec& a) { return 1 << (a.levels - 1); }

/// Two U-Nets with separate weights: depth in (0, 1) via sigmoid and
/// l2-normalized normals.
template <class T>
class StageOne {
public:
    StageOne() = default;
    StageOne(const ArchSpec& a, std::mt19937_64& rng) {
        check_arch(a);
        ParamFactory<T> f(params_, rng);
        depth_net_ = UNet<T>(f, "s1.depth", a.polar_channels, a.levels, a.width);
        depth_head_ = f.conv("s1.depth.head", a.width, 1, 1, 1, Init::zero);
        normal_net_ = UNet<T>(f, "s1.normal", a.polar_channels, a.levels, a.width);
        normal_head_ = f.conv("s1.normal.head", a.width, 3, 1, 1, Init::zero);
        normal_head_.b.values()[2] = T(-1);
    }

    struct Output {
        Tensor<T> depth01;  // (N, 1, H, W)
        Tensor<T> normal;   // (N, 3, H, W), unit
    };

    Output operator()(const Tensor<T>& x) const {
        return {nn::sigmoid(depth_head_(depth_net_(x))), nn::l2_normalize(normal_head_(normal_net_(x)))};
    }

    ParameterList<T>& params() { return params_; }
    const ParameterList<T>& params() const { return params_; }

private:
    ParameterList<T> params_;
    UNet<T> depth_net_, normal_net_;
    Conv<T> depth_head_, normal_head_;
};

/// Polarization encoder and correspondence encoder; at FiLM levels a 1x1
/// head maps polarization features to per-pixel (gamma, beta) that modulate
/// the correspondence features. The decoder joins modulated correspondence
/// features with polarization skips.
template <class T>
class StageTwo {
public:
    StageTwo() = default;
    StageTwo(const ArchSpec& a, std::mt19937_64& rng) : arch_(a) {
        check_arch(a);
        ParamFactory<T> f(params_, rng);
        polar_ = Encoder<T>(f, "s2.polar", a.polar_channels, a.levels, a.width);
        corr_ = Encoder<T>(f, "s2.corr", a.corr_channels, a.levels, a.width);
        for (int l = 0; l < a.levels; ++l) {
            const bool on = a.film_every_level || l == a.levels - 1;
            film_on_.push_back(on);
            if (!on) {
                gamma_.emplace_back();
                beta_.emplace_back();
                continue;
            }
            const int c = level_width(a.width, l);
            const std::string p = "s2.film" + std::to_string(l);
            gamma_.push_back(f.conv(p + ".gamma", c, c, 1, 1, Init::zero));
            std::fill(gamma_.back().b.values().begin(), gamma_.back().b.values().end(), T(1));
            beta_.push_back(f.conv(p + ".beta", c, c, 1, 1, Init::zero));
        }
        std::vector<int> skips;
        for (int l = 0; l < a.levels; ++l) skips.push_back(2 * level_width(a.width, l));
        bottleneck_ = f.conv("s2.bottleneck", 2 * level_width(a.width, a.levels - 1), level_width(a.width, a.levels - 1), 1);
        decoder_ = Decoder<T>(f, "s2.dec", a.levels, a.width, skips);
        head_ = f.conv("s2.head", a.width, 3, 1, 1, Init::zero);
        head_.b.values()[2] = T(-1);
    }

    /// `identity_film` replaces every (gamma, beta) with (1, 0).
    Tensor<T> operator()(const Tensor<T>& polar_in, const Tensor<T>& corr_in, bool identity_film = false) const {
        if (polar_in.n() != corr_in.n() || polar_in.h() != corr_in.h() || polar_in.w() != corr_in.w()) {
            throw DomainError("stage two: polarization and correspondence inputs are misaligned");
        }
        const auto pf = polar_(polar_in);
        std::vector<Tensor<T>> cf;
        Tensor<T> h = corr_in;
        for (int l = 0; l < arch_.levels; ++l) {
            h = corr_.block(l, h);
            if (film_on_[l] && !identity_film) h = nn::film(h, gamma_[l](pf[l]), beta_[l](pf[l]));
            cf.push_back(h);
        }
        const int last = arch_.levels - 1;
        Tensor<T> x = nn::relu(bottleneck_(nn::concat<T>({cf[last], pf[last]})));
        std::vector<std::vector<Tensor<T>>> skips;
        for (int l = 0; l < arch_.levels; ++l) skips.push_back({cf[l], pf[l]});
        return nn::l2_normalize(head_(decoder_(x, skips)));
    }

    ParameterList<T>& params() { return params_; }
    const ParameterList<T>& params() const { return params_; }

private:
    ArchSpec arch_;
    ParameterList<T> params_;
    Encoder<T> polar_, corr_;
    std::vector<Conv<T>> gamma_, beta_;
    std::vector<bool> film_on_;
    Conv<T> bottleneck_;
    Decoder<T> decoder_;
    Conv<T> head_;
};

}  // namespace polcast::nets
