// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "bnsl/latent.hpp"

namespace bnsl {

enum class KernelKind { nearest, bilinear, bicubic, lanczos };

struct ResampleKernel {
    KernelKind kind = KernelKind::lanczos;
    int lanczos_window = 3;
    double bicubic_coefficient = -0.5;

    /// Half-width of the kernel's support at scale 1.
    double support() const;

    friend bool operator==(const ResampleKernel&, const ResampleKernel&) = default;
};

KernelKind parse_kernel_kind(std::string_view name);
std::string to_string(KernelKind kind);

/// Unnormalized kernel profile at offset x (in source pixels at scale 1).
/// Symmetric with weight(0) = 1.
double kernel_weight(const ResampleKernel& kernel, double x);

/// Separable resize of every h x w plane to (height, width): width axis first,
/// then height. Half-pixel centers, clamp-to-edge, normalized weights, and
/// support widened by the scale factor when shrinking. Nearest picks source
/// samples directly. A size-preserving axis is copied untouched.
LatentTensor resize(const LatentTensor& x, std::size_t height, std::size_t width,
                    const ResampleKernel& kernel);

}  // namespace bnsl
