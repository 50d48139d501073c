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
#include <cstring>

#include <gtest/gtest.h>

#include "polcast/dataset.hpp"
#include "polcast/io.hpp"
#include "test_util.hpp"

using namespace polcast;
using polcast::tutil::ScratchDir;

TEST(Pfm, RoundTripAllChannelCounts) {
    ScratchDir dir;
    for (int c : {1, 2, 3}) {
        Image<double> img(5, 7, c);
        for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = 0.25 * static_cast<double>(i) - 3.0;
        const auto path = dir / ("img" + std::to_string(c) + ".pfm");
        io::write_pfm(path, img);
        auto back = io::read_pfm(path);
        ASSERT_EQ(back.height(), 5);
        ASSERT_EQ(back.width(), 7);
        if (c == 2) {
            ASSERT_EQ(back.channels(), 3);
            for (int y = 0; y < 5; ++y)
                for (int x = 0; x < 7; ++x) EXPECT_EQ(back(y, x, 2), 0.0);
            back = io::take_channels(back, 2);
        }
        ASSERT_EQ(back.channels(), c);
        for (std::size_t i = 0; i < img.size(); ++i) EXPECT_EQ(back.data()[i], img.data()[i]);
    }
}

TEST(Pfm, LayoutIsLittleEndianBottomUp) {
    ScratchDir dir;
    Image<double> img(2, 3);
    img(1, 0) = 7.5;
    io::write_pfm(dir / "a.pfm", img);
    const std::string bytes = tutil::read_file(dir / "a.pfm");
    const std::string header = "Pf\n3 2\n-1.0\n";
    ASSERT_EQ(bytes.substr(0, header.size()), header);
    ASSERT_EQ(bytes.size(), header.size() + 6 * 4);
    float first;
    std::memcpy(&first, bytes.data() + header.size(), 4);
    EXPECT_EQ(first, 7.5f);
}

TEST(Pfm, RejectsGarbage) {
    ScratchDir dir;
    {
        std::ofstream f(dir / "bad.pfm");
        f << "P6\n1 1\n255\n";
    }
    EXPECT_THROW(io::read_pfm(dir / "bad.pfm"), DataError);
    {
        std::ofstream f(dir / "short.pfm");
        f << "Pf\n4 4\n-1.0\n";
    }
    EXPECT_THROW(io::read_pfm(dir / "short.pfm"), DataError);
    EXPECT_THROW(io::read_pfm(dir / "missing.pfm"), IoError);
}

TEST(Pgm, RoundTrip) {
    ScratchDir dir;
    Image<std::uint8_t> img(3, 4);
    for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = static_cast<std::uint8_t>(20 * i);
    io::write_pgm(dir / "m.pgm", img);
    const auto back = io::read_pgm(dir / "m.pgm");
    ASSERT_EQ(back.height(), 3);
    ASSERT_EQ(back.width(), 4);
    EXPECT_TRUE(std::equal(img.data().begin(), img.data().end(), back.data().begin()));
}

TEST(Mask, EncodingLevels) {
    Mask gt(1, 3), corr(1, 3);
    gt(0, 1) = gt(0, 2) = 1;
    corr(0, 2) = 1;
    const Mask m = encode_mask(gt, corr);
    EXPECT_EQ(m(0, 0), kMaskBackground);
    EXPECT_EQ(m(0, 1), kMaskSurfaceOnly);
    EXPECT_EQ(m(0, 2), kMaskValid);
}

TEST(DatasetConfig, JsonRoundTripAndValidation) {
    DatasetConfig c;
    c.count = 9;
    c.seed = 1234567890123ULL;
    c.hf_amplitude_max = 2.5;
    const auto back = DatasetConfig::from_json(c.to_json());
    EXPECT_EQ(back.to_json(), c.to_json());
    DatasetConfig bad;
    bad.snr_min_db = 51.0;
    EXPECT_THROW(bad.validate(), DomainError);
    bad = DatasetConfig{};
    bad.count = -1;
    EXPECT_THROW(bad.validate(), DomainError);
}

TEST(Dataset, GenerationIsByteIdentical) {
    ScratchDir dir;
    DatasetConfig c;
    c.count = 3;
    c.resolution = 32;
    c.seed = 42;
    generate_dataset(c, dir / "a");
    generate_dataset(c, dir / "b");
    const auto a = tutil::snapshot_tree(dir / "a");
    const auto b = tutil::snapshot_tree(dir / "b");
    ASSERT_EQ(a.size(), 1u + 3u * 8u);
    EXPECT_TRUE(a == b);
    c.seed = 43;
    generate_dataset(c, dir / "c");
    EXPECT_FALSE(tutil::snapshot_tree(dir / "c") == a);
}

TEST(Dataset, LoadMatchesRender) {
    ScratchDir dir;
    DatasetConfig c;
    c.count = 2;
    c.resolution = 24;
    c.seed = 5;
    c.noise = false;
    generate_dataset(c, dir.path());
    const auto ds = Dataset::open(dir.path());
    ASSERT_EQ(ds.size(), 2u);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto cs = ds.load(i);
        const auto fresh = render(scene_from_json(ds.entries()[i].record.at("scene")), ds.calibration(),
                                  default_pattern(ds.calibration().screen), kNoNoise, 0);
        for (int y = 0; y < cs.height(); ++y) {
            for (int x = 0; x < cs.width(); ++x) {
                ASSERT_EQ(cs.gt_mask(y, x), fresh.gt_mask(y, x));
                ASSERT_EQ(cs.corr_mask(y, x), fresh.corr_mask(y, x));
                ASSERT_EQ(cs.i45(y, x), static_cast<double>(static_cast<float>(fresh.i45(y, x))));
            }
        }
    }
    EXPECT_EQ(ds.find(ds.entries()[1].id), 1u);
    EXPECT_THROW(ds.find("nope"), DataError);
}

TEST(Dataset, OpenRejectsMissingOrBadManifest) {
    ScratchDir dir;
    EXPECT_THROW(Dataset::open(dir / "none"), IoError);
    {
        std::ofstream f(dir / "manifest.json");
        f << R"({"version": 99, "samples": []})";
    }
    EXPECT_THROW(Dataset::open(dir.path()), DataError);
}

// Kolmogorov-Smirnov against U(40, 50); 1.628 / sqrt(n) is the p = 0.01 critical value.
TEST(Dataset, InventoryAndSnrUniformity) {
    ScratchDir dir;
    DatasetConfig c;
    c.count = 200;
    c.resolution = 64;
    c.seed = 2024;
    const auto manifest = generate_dataset(c, dir.path());
    const auto ds = Dataset::open(dir.path());
    ASSERT_EQ(ds.size(), 200u);
    std::vector<double> snr;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& rec = ds.entries()[i].record;
        for (const auto& [key, rel] : rec.at("paths").items()) {
            ASSERT_TRUE(std::filesystem::is_regular_file(dir / rel.get<std::string>())) << rel;
        }
        const auto cs = ds.load(i);
        ASSERT_EQ(cs.height(), 64);
        snr.push_back(rec.at("snr_db").get<double>());
    }
    std::sort(snr.begin(), snr.end());
    double d = 0.0;
    const double n = static_cast<double>(snr.size());
    for (std::size_t i = 0; i < snr.size(); ++i) {
        ASSERT_GE(snr[i], 40.0);
        ASSERT_LE(snr[i], 50.0);
        const double cdf = (snr[i] - 40.0) / 10.0;
        d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
    }
    EXPECT_LT(d, 1.628 / std::sqrt(n));
}
