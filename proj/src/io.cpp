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

#include "polcast/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace polcast::io {

namespace {

static_assert(std::endian::native == std::endian::little, "PFM writer assumes a little-endian host");

std::string next_token(std::istream& in) {
    std::string tok;
    while (in >> std::ws && in.peek() == '#') {
        std::string comment;
        std::getline(in, comment);
    }
    in >> tok;
    return tok;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const Image<double>& img) {
    const int src_channels = img.channels();
    if (src_channels < 1 || src_channels > 3) throw DomainError("write_pfm: 1 to 3 channels supported");
    const int channels = src_channels == 1 ? 1 : 3;
    auto out = open_out(path);
    out << (channels == 1 ? "Pf" : "PF") << '\n' << img.width() << ' ' << img.height() << '\n' << "-1.0\n";
    std::vector<float> row(static_cast<std::size_t>(img.width()) * channels, 0.0f);
    for (int y = img.height() - 1; y >= 0; --y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < channels; ++c) {
                row[static_cast<std::size_t>(x) * channels + c] = c < src_channels ? static_cast<float>(img(y, x, c)) : 0.0f;
            }
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Image<double> read_pfm(const std::filesystem::path& path) {
    auto in = open_in(path);
    const std::string magic = next_token(in);
    int channels = 0;
    if (magic == "Pf") {
        channels = 1;
    } else if (magic == "PF") {
        channels = 3;
    } else {
        throw DataError("'" + path.string() + "' is not a PFM file");
    }
    int width = 0, height = 0;
    double scale = 0.0;
    try {
        width = std::stoi(next_token(in));
        height = std::stoi(next_token(in));
        scale = std::stod(next_token(in));
    } catch (const std::exception&) {
        throw DataError("'" + path.string() + "': malformed PFM header");
    }
    if (width <= 0 || height <= 0 || scale == 0.0) throw DataError("'" + path.string() + "': malformed PFM header");
    in.get();  // single whitespace before the raster
    const bool big_endian = scale > 0.0;

    Image<double> img(height, width, channels);
    std::vector<float> row(static_cast<std::size_t>(width) * channels);
    for (int y = height - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!in) throw DataError("'" + path.string() + "': truncated PFM raster");
        for (std::size_t i = 0; i < row.size(); ++i) {
            float v = row[i];
            if (big_endian) {
                std::uint32_t bits;
                std::memcpy(&bits, &v, sizeof bits);
                bits = __builtin_bswap32(bits);
                std::memcpy(&v, &bits, sizeof bits);
            }
            img(y, static_cast<int>(i) / channels, static_cast<int>(i) % channels) = v;
        }
    }
    return img;
}

void write_pgm(const std::filesystem::path& path, const Image<std::uint8_t>& img) {
    if (img.channels() != 1) throw DomainError("write_pgm: single channel only");
    auto out = open_out(path);
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data().data()), static_cast<std::streamsize>(img.size()));
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Image<std::uint8_t> read_pgm(const std::filesystem::path& path) {
    auto in = open_in(path);
    if (next_token(in) != "P5") throw DataError("'" + path.string() + "' is not a binary PGM file");
    int width = 0, height = 0, maxval = 0;
    try {
        width = std::stoi(next_token(in));
        height = std::stoi(next_token(in));
        maxval = std::stoi(next_token(in));
    } catch (const std::exception&) {
        throw DataError("'" + path.string() + "': malformed PGM header");
    }
    if (width <= 0 || height <= 0 || maxval != 255) throw DataError("'" + path.string() + "': unsupported PGM header");
    in.get();
    Image<std::uint8_t> img(height, width);
    in.read(reinterpret_cast<char*>(img.data().data()), static_cast<std::streamsize>(img.size()));
    if (!in) throw DataError("'" + path.string() + "': truncated PGM raster");
    return img;
}

Image<double> take_channels(const Image<double>& img, int channels) {
    if (channels > img.channels()) throw DomainError("take_channels: not enough channels");
    Image<double> out(img.height(), img.width(), channels);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < channels; ++c) out(y, x, c) = img(y, x, c);
        }
    }
    return out;
}

}  // namespace polcast::io
