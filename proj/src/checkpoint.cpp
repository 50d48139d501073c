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

#include "polcast/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

namespace polcast::nn {

namespace {

constexpr char kMagic[4] = {'P', 'N', 'N', 'C'};

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out.insert(out.end(), b, b + n);
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }

    std::vector<std::uint8_t> out;
};

class Reader {
public:
    Reader(const std::vector<std::uint8_t>& b, std::size_t end) : buf(b), limit(end) {}

    void need(std::size_t n) const {
        if (pos + n > limit) throw DataError("checkpoint: truncated file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(buf.data() + pos), n);
        pos += n;
        return s;
    }

    const std::vector<std::uint8_t>& buf;
    std::size_t limit;
    std::size_t pos = 0;
};

std::uint32_t crc_of(const std::uint8_t* data, std::size_t n) {
    return static_cast<std::uint32_t>(crc32(crc32(0L, Z_NULL, 0), data, static_cast<uInt>(n)));
}

}  // namespace

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::uint8_t> encode_checkpoint(std::uint64_t arch_hash, const std::vector<NamedArray>& arrays) {
    Writer w;
    w.bytes(kMagic, 4);
    w.u32(kCheckpointVersion);
    w.u64(arch_hash);
    w.u32(static_cast<std::uint32_t>(arrays.size()));
    for (const auto& a : arrays) {
        if (a.data.size() != numel(a.shape)) throw DomainError("checkpoint: '" + a.name + "' size/shape mismatch");
        w.u32(static_cast<std::uint32_t>(a.name.size()));
        w.bytes(a.name.data(), a.name.size());
        for (int d : a.shape) w.u32(static_cast<std::uint32_t>(d));
        for (float f : a.data) w.f32(f);
    }
    w.u32(crc_of(w.out.data(), w.out.size()));
    return std::move(w.out);
}

std::vector<NamedArray> decode_checkpoint(const std::vector<std::uint8_t>& bytes, std::uint64_t expected_hash) {
    if (bytes.size() < 24 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw DataError("checkpoint: bad magic");
    }
    const std::size_t body = bytes.size() - 4;
    Reader tail(bytes, bytes.size());
    tail.pos = body;
    if (tail.u32() != crc_of(bytes.data(), body)) throw DataError("checkpoint: CRC mismatch");

    Reader r(bytes, body);
    r.pos = 4;
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw DataError("checkpoint: unsupported version " + std::to_string(version));
    }
    const std::uint64_t hash = r.u64();
    if (hash != expected_hash) {
        throw ArchitectureMismatch("checkpoint: architecture hash mismatch (file " + std::to_string(hash) +
                                   ", expected " + std::to_string(expected_hash) + ")");
    }
    const std::uint32_t count = r.u32();
    std::vector<NamedArray> arrays;
    arrays.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        NamedArray a;
        a.name = r.str(r.u32());
        for (int& d : a.shape) {
            d = static_cast<int>(r.u32());
            if (d <= 0) throw DataError("checkpoint: bad dimension in '" + a.name + "'");
        }
        const std::size_t n = numel(a.shape);
        r.need(4 * n);
        a.data.resize(n);
        for (float& f : a.data) f = r.f32();
        arrays.push_back(std::move(a));
    }
    if (r.pos != body) throw DataError("checkpoint: trailing bytes before CRC");
    return arrays;
}

void save_checkpoint(const std::filesystem::path& path, std::uint64_t arch_hash,
                     const std::vector<NamedArray>& arrays) {
    const auto bytes = encode_checkpoint(arch_hash, arrays);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("checkpoint: cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("checkpoint: write failed for " + path.string());
}

namespace {
std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("checkpoint: cannot open " + path.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}
}  // namespace

std::vector<NamedArray> load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_hash) {
    return decode_checkpoint(slurp(path), expected_hash);
}

std::uint64_t peek_checkpoint_hash(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw DataError("checkpoint: bad magic");
    Reader r(bytes, bytes.size());
    r.pos = 8;
    return r.u64();
}

}  // namespace polcast::nn
