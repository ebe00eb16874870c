// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnsl/rng.hpp"

namespace bnsl {

/// b x c x (f x) h x w. Frames are optional and behave as extra batch for
/// every spatial operation.
struct Shape {
    std::size_t batch = 1;
    std::size_t channels = 1;
    std::optional<std::size_t> frames;
    std::size_t height = 1;
    std::size_t width = 1;

    std::size_t frame_count() const { return frames.value_or(1); }
    /// Number of independent h x w planes.
    std::size_t planes() const { return batch * channels * frame_count(); }
    std::size_t plane_size() const { return height * width; }
    std::size_t numel() const { return planes() * plane_size(); }

    /// Same leading dims, new spatial size.
    Shape with_spatial(std::size_t h, std::size_t w) const;

    std::string to_string() const;

    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Throws invalid_shape when any dimension is zero.
void validate_shape(const Shape& shape);

/// Dense row-major tensor of doubles. Value type: copies are deep.
class LatentTensor {
public:
    LatentTensor() = default;
    explicit LatentTensor(const Shape& shape, double fill = 0.0);
    LatentTensor(const Shape& shape, std::vector<double> data);

    const Shape& shape() const { return m_shape; }
    std::size_t size() const { return m_data.size(); }

    std::span<double> data() { return m_data; }
    std::span<const double> data() const { return m_data; }

    std::span<double> plane(std::size_t index);
    std::span<const double> plane(std::size_t index) const;

    double& operator[](std::size_t i) { return m_data[i]; }
    double operator[](std::size_t i) const { return m_data[i]; }

    bool all_finite() const;

    friend bool operator==(const LatentTensor&, const LatentTensor&) = default;

private:
    Shape m_shape;
    std::vector<double> m_data;
};

void require_same_shape(const LatentTensor& a, const LatentTensor& b, const char* what);

/// I.i.d. standard normal entries; entry i is draw i of `rng`.
LatentTensor sample_noise(const Shape& shape, const RngStream& rng);

/// (1 - t) a + t b, elementwise.
LatentTensor lerp(const LatentTensor& a, const LatentTensor& b, double t);

/// a + scale * b.
LatentTensor axpy(const LatentTensor& a, double scale, const LatentTensor& b);

}  // namespace bnsl
