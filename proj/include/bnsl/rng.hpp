// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

namespace bnsl {

/// Philox4x32-10 block function: maps a 128-bit counter under a 64-bit key to
/// 128 pseudorandom bits. Stateless, so any draw can be computed directly from
/// its index.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer, used to derive child stream ids.
std::uint64_t mix64(std::uint64_t value);

/// A counter-based random stream identified by (seed, stream_id).
///
/// Draw `i` of a stream depends only on (seed, stream_id, i). Streams are
/// namespaced by derivation: run -> stage -> draw, e.g.
/// `RngStream{seed}.derive(run).derive(stage)`.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    RngStream derive(std::uint64_t tag) const;

    /// Two independent uniforms in the open interval (0, 1) for block `index`.
    std::array<double, 2> uniform_pair(std::uint64_t index) const;

    /// Standard normal draw number `index` (Box-Muller on block index / 2).
    double normal(std::uint64_t index) const;

    friend bool operator==(const RngStream&, const RngStream&) = default;
};

}  // namespace bnsl
