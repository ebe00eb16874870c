// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"

#include "bnsl/error.hpp"
#include "bnsl/latent.hpp"
#include "bnsl/rng.hpp"
#include "bnsl/tensor_io.hpp"

using namespace bnsl;

namespace {

Shape image(std::size_t b, std::size_t c, std::size_t h, std::size_t w) {
    Shape s;
    s.batch = b;
    s.channels = c;
    s.height = h;
    s.width = w;
    return s;
}

}  // namespace

TEST_CASE("philox matches the Random123 known-answer vectors") {
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) ==
          std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                     {0xffffffffu, 0xffffffffu}) ==
          std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                     {0xa4093822u, 0x299f31d0u}) ==
          std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("rng streams are addressable and independent of draw order") {
    const RngStream s{7, 0};
    const double late = s.normal(1001);
    for (std::uint64_t i = 0; i < 1000; ++i) {
        (void)s.normal(i);
    }
    CHECK(s.normal(1001) == late);
    CHECK(s.derive(1) == s.derive(1));
    CHECK(s.derive(1).stream_id != s.derive(2).stream_id);
    CHECK(s.derive(1).derive(2).stream_id != s.derive(2).derive(1).stream_id);
    CHECK(RngStream{7, 0}.normal(0) != RngStream{8, 0}.normal(0));
}

TEST_CASE("sample_noise is deterministic") {
    const Shape shape = image(1, 1, 4, 4);
    const LatentTensor a = sample_noise(shape, RngStream{7, 0});
    const LatentTensor b = sample_noise(shape, RngStream{7, 0});
    CHECK(a == b);
    CHECK(a.shape() == shape);
    CHECK(a.size() == 16);
    CHECK(sample_noise(shape, RngStream{7, 1}) != a);
}

TEST_CASE("sample_noise moments within CLT bounds") {
    const std::size_t n = 100000;
    const LatentTensor x = sample_noise(image(1, 1, 1, n), RngStream{2024, 3});
    double mean = 0.0;
    for (double v : x.data()) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x.data()) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n - 1);
    CHECK(std::abs(mean) <= 3.3 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) <= 0.05);
}

TEST_CASE("zero-sized shapes are rejected") {
    try {
        (void)sample_noise(image(1, 1, 0, 4), RngStream{});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_shape);
    }
    CHECK_THROWS_AS(LatentTensor(image(0, 1, 2, 2)), Error);
}

TEST_CASE("lerp endpoints and hand value") {
    const LatentTensor a = sample_noise(image(2, 3, 4, 5), RngStream{1, 0});
    const LatentTensor b = sample_noise(image(2, 3, 4, 5), RngStream{1, 1});
    CHECK(lerp(a, b, 0.0) == a);
    CHECK(lerp(a, b, 1.0) == b);

    const LatentTensor zero(image(1, 1, 1, 1), std::vector<double>{0.0});
    const LatentTensor four(image(1, 1, 1, 1), std::vector<double>{4.0});
    CHECK(lerp(zero, four, 0.25)[0] == 1.0);

    CHECK_THROWS_AS(lerp(a, zero, 0.5), Error);
}

TEST_CASE("property: lerp(a, a, t) = a and stays finite") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> dim(1, 6);
    for (int trial = 0; trial < 200; ++trial) {
        const Shape s = image(dim(gen), dim(gen), dim(gen), dim(gen));
        const LatentTensor a = sample_noise(s, RngStream{static_cast<std::uint64_t>(trial), 9});
        const LatentTensor b = sample_noise(s, RngStream{static_cast<std::uint64_t>(trial), 10});
        const double t = unit(gen);
        CHECK(lerp(a, a, t) == a);
        const LatentTensor m = lerp(a, b, t);
        CHECK(m.all_finite());
        for (std::size_t i = 0; i < m.size(); ++i) {
            CHECK(m[i] >= std::min(a[i], b[i]));
            CHECK(m[i] <= std::max(a[i], b[i]));
        }
    }
}

TEST_CASE("frames act as extra planes") {
    Shape s = image(2, 3, 4, 5);
    s.frames = 7;
    CHECK(s.planes() == 42);
    CHECK(s.numel() == 42 * 20);
    CHECK(s.with_spatial(2, 2).frames == 7);
}

TEST_CASE("tensor files round-trip bit-exactly at 32-bit precision") {
    Shape s = image(2, 3, 5, 4);
    s.frames = 2;
    LatentTensor x = sample_noise(s, RngStream{5, 5});
    for (double& v : x.data()) v = static_cast<float>(v);

    const std::string bytes = encode_tensor(x);
    CHECK(bytes.size() == 16 + 20 + 4 * x.size());
    CHECK(bytes.substr(0, 16) == std::string("BNSL-TENSOR\0\0\0\0\0", 16));
    // b = 2 little-endian
    CHECK(bytes[16] == 2);
    CHECK(bytes[17] == 0);
    CHECK(decode_tensor(bytes) == x);

    const auto path = std::filesystem::temp_directory_path() / "bnsl_test_tensor.bnt";
    write_tensor(path, x);
    CHECK(read_tensor(path) == x);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(decode_tensor("not a tensor"), Error);
    CHECK_THROWS_AS(decode_tensor(bytes.substr(0, bytes.size() - 1)), Error);
}

TEST_CASE("images are stored with f = 1 and read back without frames") {
    LatentTensor x(image(1, 1, 2, 2), std::vector<double>{1, 2, 3, 4});
    const std::string bytes = encode_tensor(x);
    CHECK(bytes[24] == 1);
    CHECK_FALSE(decode_tensor(bytes).shape().frames.has_value());
}
