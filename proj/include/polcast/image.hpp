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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "polcast/errors.hpp"

namespace polcast {

/// Row-major H x W x C image, channels interleaved per pixel.
template <class T>
class Image {
public:
    using value_type = T;

    Image() = default;
    Image(int height, int width, int channels = 1, T fill = T{})
        : height_(height), width_(width), channels_(channels) {
        if (height < 0 || width < 0 || channels < 1) {
            throw DomainError("Image: invalid dimensions");
        }
        data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
    }

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    int channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(height_) * width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int y, int x, int c = 0) noexcept { return data_[index(y, x, c)]; }
    const T& operator()(int y, int x, int c = 0) const noexcept { return data_[index(y, x, c)]; }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }

    bool same_shape(int height, int width) const noexcept { return height_ == height && width_ == width; }
    template <class U>
    bool same_shape(const Image<U>& other) const noexcept {
        return height_ == other.height() && width_ == other.width();
    }

    bool operator==(const Image&) const = default;

private:
    std::size_t index(int y, int x, int c) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 1;
    std::vector<T> data_;
};

/// Per-pixel validity; nonzero means valid.
using Mask = Image<std::uint8_t>;

/// Range along the per-pixel view ray, mm.
using DepthMap = Image<double>;

template <class A, class B>
void require_same_shape(const Image<A>& a, const Image<B>& b, const char* what) {
    if (!a.same_shape(b)) {
        throw DomainError(std::string(what) + ": image shape mismatch");
    }
}

}  // namespace polcast
