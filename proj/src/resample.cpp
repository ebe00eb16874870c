// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnsl/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "bnsl/error.hpp"

namespace bnsl {

namespace {

double sinc(double x) {
    if (x == 0.0) {
        return 1.0;
    }
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

// Keys cubic convolution kernel with free coefficient a.
double keys_cubic(double x, double a) {
    x = std::abs(x);
    if (x <= 1.0) {
        return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    }
    if (x < 2.0) {
        return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    }
    return 0.0;
}

struct Tap {
    std::size_t index;
    double weight;
};

// taps[j] lists the clamped source samples and normalized weights for output j.
std::vector<std::vector<Tap>> build_taps(std::size_t src, std::size_t dst,
                                         const ResampleKernel& kernel) {
    std::vector<std::vector<Tap>> taps(dst);
    const double scale = static_cast<double>(src) / static_cast<double>(dst);
    const auto last = static_cast<long>(src) - 1;
    for (std::size_t j = 0; j < dst; ++j) {
        const double center = (static_cast<double>(j) + 0.5) * scale - 0.5;
        if (kernel.kind == KernelKind::nearest) {
            const auto k = static_cast<long>(std::floor((static_cast<double>(j) + 0.5) * scale));
            taps[j].push_back({static_cast<std::size_t>(std::clamp(k, 0L, last)), 1.0});
            continue;
        }
        const double stretch = std::max(scale, 1.0);
        const double radius = kernel.support() * stretch;
        const auto lo = static_cast<long>(std::floor(center - radius));
        const auto hi = static_cast<long>(std::ceil(center + radius));
        double total = 0.0;
        for (long k = lo; k <= hi; ++k) {
            const double w = kernel_weight(kernel, (static_cast<double>(k) - center) / stretch);
            if (w == 0.0) {
                continue;
            }
            const auto idx = static_cast<std::size_t>(std::clamp(k, 0L, last));
            auto it = std::find_if(taps[j].begin(), taps[j].end(),
                                   [idx](const Tap& t) { return t.index == idx; });
            if (it == taps[j].end()) {
                taps[j].push_back({idx, w});
            } else {
                it->weight += w;
            }
            total += w;
        }
        require(total != 0.0, ErrorKind::invalid_argument, "degenerate resample kernel");
        for (auto& t : taps[j]) {
            t.weight /= total;
        }
    }
    return taps;
}

}  // namespace

double ResampleKernel::support() const {
    switch (kind) {
    case KernelKind::nearest:
        return 0.5;
    case KernelKind::bilinear:
        return 1.0;
    case KernelKind::bicubic:
        return 2.0;
    case KernelKind::lanczos:
        return static_cast<double>(lanczos_window);
    }
    return 1.0;
}

KernelKind parse_kernel_kind(std::string_view name) {
    if (name == "nearest") return KernelKind::nearest;
    if (name == "bilinear") return KernelKind::bilinear;
    if (name == "bicubic") return KernelKind::bicubic;
    if (name == "lanczos") return KernelKind::lanczos;
    fail(ErrorKind::invalid_argument, "unknown resample kernel '" + std::string(name) +
                                          "' (expected nearest|bilinear|bicubic|lanczos)");
}

std::string to_string(KernelKind kind) {
    switch (kind) {
    case KernelKind::nearest:
        return "nearest";
    case KernelKind::bilinear:
        return "bilinear";
    case KernelKind::bicubic:
        return "bicubic";
    case KernelKind::lanczos:
        return "lanczos";
    }
    return "lanczos";
}

double kernel_weight(const ResampleKernel& kernel, double x) {
    const double ax = std::abs(x);
    switch (kernel.kind) {
    case KernelKind::nearest:
        return ax < 0.5 ? 1.0 : (ax == 0.5 ? 0.5 : 0.0);
    case KernelKind::bilinear:
        return std::max(0.0, 1.0 - ax);
    case KernelKind::bicubic:
        return keys_cubic(ax, kernel.bicubic_coefficient);
    case KernelKind::lanczos: {
        const double a = static_cast<double>(kernel.lanczos_window);
        return ax < a ? sinc(ax) * sinc(ax / a) : 0.0;
    }
    }
    return 0.0;
}

LatentTensor resize(const LatentTensor& x, std::size_t height, std::size_t width,
                    const ResampleKernel& kernel) {
    require(height >= 1 && width >= 1, ErrorKind::invalid_shape, "resize target must be >= 1x1");
    require(kernel.lanczos_window >= 1, ErrorKind::invalid_argument, "lanczos window must be >= 1");
    const Shape& src = x.shape();
    if (src.height == height && src.width == width) {
        return x;
    }

    // Width pass.
    LatentTensor rows = x;
    if (src.width != width) {
        const auto taps = build_taps(src.width, width, kernel);
        rows = LatentTensor(src.with_spatial(src.height, width));
        for (std::size_t p = 0; p < src.planes(); ++p) {
            const auto in = x.plane(p);
            auto out = rows.plane(p);
            for (std::size_t r = 0; r < src.height; ++r) {
                for (std::size_t j = 0; j < width; ++j) {
                    double acc = 0.0;
                    for (const Tap& t : taps[j]) {
                        acc += t.weight * in[r * src.width + t.index];
                    }
                    out[r * width + j] = acc;
                }
            }
        }
    }
    if (src.height == height) {
        return rows;
    }

    // Height pass.
    const auto taps = build_taps(src.height, height, kernel);
    LatentTensor out(src.with_spatial(height, width));
    for (std::size_t p = 0; p < src.planes(); ++p) {
        const auto in = rows.plane(p);
        auto dst = out.plane(p);
        for (std::size_t i = 0; i < height; ++i) {
            for (std::size_t c = 0; c < width; ++c) {
                double acc = 0.0;
                for (const Tap& t : taps[i]) {
                    acc += t.weight * in[t.index * width + c];
                }
                dst[i * width + c] = acc;
            }
        }
    }
    return out;
}

}  // namespace bnsl
