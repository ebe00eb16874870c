// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "bnsl/latent.hpp"

namespace bnsl {

// Raw tensor file: 16-byte magic "BNSL-TENSOR" padded with NULs, five u32 LE
// dims (b, c, f, h, w; f = 1 for images), then f32 LE values in row-major
// order. Values are downcast to 32-bit on write.

std::string encode_tensor(const LatentTensor& tensor);
LatentTensor decode_tensor(const std::string& bytes);

void write_tensor(const std::filesystem::path& path, const LatentTensor& tensor);
LatentTensor read_tensor(const std::filesystem::path& path);

/// 8-bit binary PGM (P5) of one plane, min-max normalized. Returns the
/// (min, max) used so callers can record it.
std::pair<double, double> write_pgm(const std::filesystem::path& path, const LatentTensor& tensor,
                                    std::size_t plane_index);

}  // namespace bnsl
