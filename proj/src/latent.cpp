// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnsl/latent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bnsl/error.hpp"

namespace bnsl {

Shape Shape::with_spatial(std::size_t h, std::size_t w) const {
    Shape out = *this;
    out.height = h;
    out.width = w;
    return out;
}

std::string Shape::to_string() const {
    std::ostringstream os;
    os << "(" << batch << "," << channels << ",";
    if (frames) {
        os << *frames << ",";
    }
    os << height << "," << width << ")";
    return os.str();
}

void validate_shape(const Shape& shape) {
    const bool ok = shape.batch > 0 && shape.channels > 0 && shape.height > 0 && shape.width > 0 &&
                    (!shape.frames || *shape.frames > 0);
    require(ok, ErrorKind::invalid_shape, "zero-sized dimension in " + shape.to_string());
}

LatentTensor::LatentTensor(const Shape& shape, double fill) : m_shape(shape) {
    validate_shape(shape);
    m_data.assign(shape.numel(), fill);
}

LatentTensor::LatentTensor(const Shape& shape, std::vector<double> data)
    : m_shape(shape), m_data(std::move(data)) {
    validate_shape(shape);
    require(m_data.size() == shape.numel(), ErrorKind::shape_mismatch,
            "data length " + std::to_string(m_data.size()) + " does not match " + shape.to_string());
}

std::span<double> LatentTensor::plane(std::size_t index) {
    return std::span<double>(m_data).subspan(index * m_shape.plane_size(), m_shape.plane_size());
}

std::span<const double> LatentTensor::plane(std::size_t index) const {
    return std::span<const double>(m_data).subspan(index * m_shape.plane_size(),
                                                   m_shape.plane_size());
}

bool LatentTensor::all_finite() const {
    return std::all_of(m_data.begin(), m_data.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const LatentTensor& a, const LatentTensor& b, const char* what) {
    require(a.shape() == b.shape(), ErrorKind::shape_mismatch,
            std::string(what) + ": " + a.shape().to_string() + " vs " + b.shape().to_string());
}

LatentTensor sample_noise(const Shape& shape, const RngStream& rng) {
    LatentTensor out(shape);
    auto values = out.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = rng.normal(i);
    }
    return out;
}

LatentTensor lerp(const LatentTensor& a, const LatentTensor& b, double t) {
    require_same_shape(a, b, "lerp");
    require(t >= 0.0 && t <= 1.0, ErrorKind::invalid_argument, "lerp weight outside [0,1]");
    LatentTensor out = a;
    auto dst = out.data();
    const auto src = b.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = std::lerp(dst[i], src[i], t);
    }
    return out;
}

LatentTensor axpy(const LatentTensor& a, double scale, const LatentTensor& b) {
    require_same_shape(a, b, "axpy");
    LatentTensor out = a;
    auto dst = out.data();
    const auto src = b.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] += scale * src[i];
    }
    return out;
}

}  // namespace bnsl
