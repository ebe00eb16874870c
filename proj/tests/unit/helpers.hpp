// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "bnsl/error.hpp"
#include "bnsl/latent.hpp"

namespace bnsl::testing {

/// Kind of the bnsl::Error thrown by `fn`, or nullopt if nothing is thrown.
template <typename Fn>
std::optional<ErrorKind> error_kind(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

inline Shape planes_of(std::size_t planes, std::size_t h, std::size_t w) {
    Shape s;
    s.batch = planes;
    s.height = h;
    s.width = w;
    return s;
}

inline LatentTensor scalar(double v) { return LatentTensor(planes_of(1, 1, 1), std::vector<double>{v}); }

}  // namespace bnsl::testing
