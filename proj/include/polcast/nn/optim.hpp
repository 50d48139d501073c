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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "polcast/nn/tensor.hpp"

namespace polcast::nn {

#ifdef POLCAST_TRAIN_DOUBLE
using Real = double;
#else
using Real = float;
#endif

template <class T>
struct Parameter {
    std::string name;
    Tensor<T> tensor;
};

template <class T>
using ParameterList = std::vector<Parameter<T>>;

/// He-normal initialization: N(0, 2 / fan_in).
template <class T>
void he_normal(Tensor<T>& w, int fan_in, std::mt19937_64& rng) {
    if (fan_in <= 0) throw DomainError("he_normal: fan_in must be positive");
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    for (T& v : w.values()) v = static_cast<T>(dist(rng));
}

/// lr0 * (1 + cos(pi t / T)) / 2; t beyond T yields the final value 0.
inline double cosine_anneal(double lr0, double t, double total) {
    if (!(total > 0.0)) throw DomainError("cosine_anneal: horizon must be positive");
    if (t < 0.0) throw DomainError("cosine_anneal: negative step");
    if (t >= total) return 0.0;
    return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * t / total));
}

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <class T>
class Adam {
public:
    Adam(ParameterList<T> params, AdamConfig cfg = {}) : params_(std::move(params)), cfg_(cfg) {
        for (const auto& p : params_) {
            m_.emplace_back(p.tensor.size(), 0.0);
            v_.emplace_back(p.tensor.size(), 0.0);
        }
    }

    double lr() const noexcept { return cfg_.lr; }
    void set_lr(double lr) { cfg_.lr = lr; }
    const AdamConfig& config() const noexcept { return cfg_; }
    std::uint64_t steps() const noexcept { return step_; }
    std::uint64_t skipped() const noexcept { return skipped_; }

    void zero_grad() {
        for (auto& p : params_) p.tensor.zero_grad();
    }

    /// One update from the accumulated gradients. The step counter advances
    /// on every call; a non-finite gradient anywhere skips the update.
    bool step() {
        ++step_;
        for (const auto& p : params_) {
            if (p.tensor.has_grad() && !all_finite<T>(p.tensor.node()->grad)) {
                ++skipped_;
                spdlog::warn("adam: non-finite gradient in '{}' at step {}; update skipped", p.name, step_);
                return false;
            }
        }
        ++updates_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(updates_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(updates_));
        for (std::size_t k = 0; k < params_.size(); ++k) {
            auto& p = params_[k].tensor;
            if (!p.has_grad()) continue;
            auto values = p.values();
            const auto& grad = p.node()->grad;
            auto& m = m_[k];
            auto& v = v_[k];
            for (std::size_t i = 0; i < values.size(); ++i) {
                const double g = grad[i];
                m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
                v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                values[i] = static_cast<T>(values[i] - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
            }
        }
        return true;
    }

    const std::vector<double>& first_moment(std::size_t k) const { return m_.at(k); }
    const std::vector<double>& second_moment(std::size_t k) const { return v_.at(k); }

private:
    ParameterList<T> params_;
    AdamConfig cfg_;
    std::vector<std::vector<double>> m_, v_;
    std::uint64_t step_ = 0;
    std::uint64_t updates_ = 0;  // bias correction counts applied updates only
    std::uint64_t skipped_ = 0;
};

}  // namespace polcast::nn
