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

// Central finite-difference gradient verification at fp64.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "polcast/nn/tensor.hpp"

namespace polcast::nn {

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t checked = 0;
    bool passed(double tol) const { return max_relative_error < tol; }
};

using GradFn = std::function<Tensor<double>(const std::vector<Tensor<double>>&)>;

/// Compares analytic gradients of L = sum(r * f(inputs)) with central
/// differences, r a fixed random weighting. Each input's error is the
/// norm-wise relative error ||g_a - g_n|| / max(||g_a||, ||g_n||, floor).
inline GradCheckResult gradcheck(const GradFn& f, std::vector<Tensor<double>> inputs, std::uint64_t seed,
                                 double h = 1e-5, double floor = 1e-10) {
    for (auto& t : inputs) {
        t.set_requires_grad(true);
        t.zero_grad();
    }
    Tensor<double> out = f(inputs);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> weights(out.size());
    for (double& w : weights) w = u(rng);

    auto objective = [&]() {
        NoGradGuard guard;
        Tensor<double> o = f(inputs);
        double s = 0.0;
        for (std::size_t i = 0; i < o.size(); ++i) s += weights[i] * o.values()[i];
        return s;
    };

    backward<double>(out, weights);

    GradCheckResult result;
    for (auto& t : inputs) {
        std::vector<double> analytic(t.grad().begin(), t.grad().end());
        double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
        auto values = t.values();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + h;
            const double plus = objective();
            values[i] = saved - h;
            const double minus = objective();
            values[i] = saved;
            const double numeric = (plus - minus) / (2.0 * h);
            diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
            a2 += analytic[i] * analytic[i];
            n2 += numeric * numeric;
            ++result.checked;
        }
        const double denom = std::max({std::sqrt(a2), std::sqrt(n2), floor});
        result.max_relative_error = std::max(result.max_relative_error, std::sqrt(diff2) / denom);
    }
    return result;
}

}  // namespace polcast::nn
