// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnsl/tensor_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "bnsl/error.hpp"

namespace bnsl {

namespace {

constexpr std::array<char, 16> kMagic = {'B', 'N', 'S', 'L', '-', 'T', 'E', 'N',
                                         'S', 'O', 'R', 0,   0,   0,   0,   0};
constexpr std::size_t kHeaderSize = kMagic.size() + 5 * 4;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
    }
}

std::uint32_t get_u32(const std::string& in, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
    }
    return v;
}

std::uint32_t checked_dim(std::size_t d) {
    require(d <= std::numeric_limits<std::uint32_t>::max(), ErrorKind::invalid_shape,
            "dimension does not fit in 32 bits");
    return static_cast<std::uint32_t>(d);
}

}  // namespace

std::string encode_tensor(const LatentTensor& tensor) {
    const Shape& s = tensor.shape();
    std::string out(kMagic.begin(), kMagic.end());
    out.reserve(kHeaderSize + 4 * tensor.size());
    for (std::size_t d : {s.batch, s.channels, s.frame_count(), s.height, s.width}) {
        put_u32(out, checked_dim(d));
    }
    for (double v : tensor.data()) {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
    return out;
}

LatentTensor decode_tensor(const std::string& bytes) {
    require(bytes.size() >= kHeaderSize &&
                std::equal(kMagic.begin(), kMagic.end(), bytes.begin()),
            ErrorKind::io, "not a BNSL tensor (bad magic)");
    Shape shape;
    shape.batch = get_u32(bytes, 16);
    shape.channels = get_u32(bytes, 20);
    const std::uint32_t frames = get_u32(bytes, 24);
    if (frames != 1) {
        shape.frames = frames;
    }
    shape.height = get_u32(bytes, 28);
    shape.width = get_u32(bytes, 32);
    validate_shape(shape);
    require(bytes.size() == kHeaderSize + 4 * shape.numel(), ErrorKind::io,
            "tensor payload length does not match header " + shape.to_string());
    std::vector<double> data(shape.numel());
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = std::bit_cast<float>(get_u32(bytes, kHeaderSize + 4 * i));
    }
    return LatentTensor(shape, std::move(data));
}

void write_tensor(const std::filesystem::path& path, const LatentTensor& tensor) {
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), ErrorKind::io, "cannot open " + path.string() + " for writing");
    const std::string bytes = encode_tensor(tensor);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(os), ErrorKind::io, "failed writing " + path.string());
}

LatentTensor read_tensor(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), ErrorKind::io, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return decode_tensor(bytes);
}

std::pair<double, double> write_pgm(const std::filesystem::path& path, const LatentTensor& tensor,
                                    std::size_t plane_index) {
    require(plane_index < tensor.shape().planes(), ErrorKind::invalid_argument,
            "plane index out of range");
    const auto plane = tensor.plane(plane_index);
    const auto [lo_it, hi_it] = std::minmax_element(plane.begin(), plane.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double span = hi - lo;

    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), ErrorKind::io, "cannot open " + path.string() + " for writing");
    os << "P5\n" << tensor.shape().width << " " << tensor.shape().height << "\n255\n";
    for (double v : plane) {
        const double unit = span > 0.0 ? (v - lo) / span : 0.0;
        os.put(static_cast<char>(static_cast<unsigned char>(std::lround(unit * 255.0))));
    }
    require(static_cast<bool>(os), ErrorKind::io, "failed writing " + path.string());
    return {lo, hi};
}

}  // namespace bnsl
