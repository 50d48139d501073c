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

#include "polcast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "polcast/io.hpp"

namespace polcast::eval {

std::vector<double> ErrorMap::values() const {
    std::vector<double> v;
    for (int y = 0; y < height(); ++y) {
        for (int x = 0; x < width(); ++x) {
            if (valid(y, x)) v.push_back(deg(y, x));
        }
    }
    return v;
}

ErrorMap angular_error_map(const NormalMap& pred, const NormalMap& gt, const Mask& mask) {
    require_same_shape(pred.mask, gt.mask, "angular_error_map");
    require_same_shape(pred.mask, mask, "angular_error_map");
    const int h = mask.height();
    const int w = mask.width();
    ErrorMap m{Image<double>(h, w), Mask(h, w)};
    bool any = false;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask(y, x) || !pred.valid(y, x) || !gt.valid(y, x)) continue;
            m.deg(y, x) = angle_between(pred.at(y, x), gt.at(y, x));
            m.valid(y, x) = 1;
            any = true;
        }
    }
    if (!any) throw DomainError("angular_error_map: empty mask");
    return m;
}

double ErrorStats::pct(double threshold) const {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (thresholds[i] == threshold) return pct_below[i];
    }
    throw DomainError("ErrorStats: threshold not computed");
}

ErrorStats error_stats(std::span<const double> errors_deg, const std::vector<double>& thresholds) {
    ErrorStats s;
    s.thresholds = thresholds;
    s.n_valid = errors_deg.size();
    s.pct_below.assign(thresholds.size(), 0.0);
    if (errors_deg.empty()) {
        s.mean_deg = s.median_deg = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    std::vector<double> sorted(errors_deg.begin(), errors_deg.end());
    std::sort(sorted.begin(), sorted.end());
    // Summing in sorted order makes the mean independent of pixel order.
    s.mean_deg = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    const std::size_t n = sorted.size();
    s.median_deg = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        const auto below = std::lower_bound(sorted.begin(), sorted.end(), thresholds[i]) - sorted.begin();
        s.pct_below[i] = 100.0 * static_cast<double>(below) / static_cast<double>(n);
    }
    return s;
}

ErrorStats error_stats(const ErrorMap& map, const std::vector<double>& thresholds) {
    const auto v = map.values();
    return error_stats(v, thresholds);
}

std::vector<ProfileBin> radial_profile(const ErrorMap& map, const Intrinsics& k, int n_bins) {
    if (n_bins < 2) throw DomainError("radial_profile: need at least 2 bins");
    double r_max = 0.0;
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            if (map.valid(y, x)) r_max = std::max(r_max, std::hypot(x - k.cx, y - k.cy));
        }
    }
    std::vector<ProfileBin> bins(n_bins);
    std::vector<double> sums(n_bins, 0.0);
    for (int b = 0; b < n_bins; ++b) {
        bins[b].index = b;
        bins[b].r_min_px = r_max * b / n_bins;
        bins[b].r_max_px = r_max * (b + 1) / n_bins;
    }
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            if (!map.valid(y, x)) continue;
            const double r = std::hypot(x - k.cx, y - k.cy);
            const int b = r_max > 0.0 ? std::min(n_bins - 1, static_cast<int>(r / r_max * n_bins)) : 0;
            sums[b] += map.deg(y, x);
            ++bins[b].count;
        }
    }
    for (int b = 0; b < n_bins; ++b) {
        if (bins[b].count) bins[b].mean_deg = sums[b] / static_cast<double>(bins[b].count);
    }
    return bins;
}

std::string report_csv(std::vector<MethodResult> results) {
    std::stable_sort(results.begin(), results.end(),
                     [](const MethodResult& a, const MethodResult& b) { return a.stats.mean_deg < b.stats.mean_deg; });
    std::string out = "method,mean_deg,median_deg,pct_lt1,pct_lt2,pct_lt3,n_valid\n";
    for (const auto& r : results) {
        char line[256];
        std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.4f,%.4f,%.4f,%zu\n", r.method.c_str(), r.stats.mean_deg,
                      r.stats.median_deg, r.stats.pct(1.0), r.stats.pct(2.0), r.stats.pct(3.0), r.stats.n_valid);
        out += line;
    }
    return out;
}

std::string profile_csv(const std::vector<ProfileBin>& profile) {
    std::string out = "bin_index,r_min_px,r_max_px,mean_deg,count\n";
    for (const auto& b : profile) {
        char line[160];
        if (b.mean_deg) {
            std::snprintf(line, sizeof line, "%d,%.4f,%.4f,%.6f,%zu\n", b.index, b.r_min_px, b.r_max_px, *b.mean_deg,
                          b.count);
        } else {
            std::snprintf(line, sizeof line, "%d,%.4f,%.4f,,%zu\n", b.index, b.r_min_px, b.r_max_px, b.count);
        }
        out += line;
    }
    return out;
}

Image<std::uint8_t> render_error_map(const ErrorMap& map) {
    Image<std::uint8_t> img(map.height(), map.width());
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            if (!map.valid(y, x)) continue;
            const double t = std::clamp(map.deg(y, x) / 10.0, 0.0, 1.0);
            img(y, x) = static_cast<std::uint8_t>(std::lround(255.0 * t));
        }
    }
    return img;
}

namespace {
void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << text;
}
}  // namespace

void write_report(const std::vector<MethodResult>& results, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text(dir / "report.csv", report_csv(results));
    for (const auto& r : results) {
        write_text(dir / ("profile_" + r.method + ".csv"), profile_csv(r.profile));
        if (r.map) io::write_pgm(dir / ("error_" + r.method + ".pgm"), render_error_map(*r.map));
    }
}

}  // namespace polcast::eval
