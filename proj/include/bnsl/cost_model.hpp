// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bnsl/sampler.hpp"

namespace bnsl {

/// Transformer dimensions that determine self-attention cost.
struct ArchSpec {
    std::size_t hidden_dim = 3072;
    std::size_t num_heads = 24;
    std::size_t num_layers = 57;
    std::size_t vae_ratio = 8;
    std::size_t patch_size = 2;
    std::size_t text_tokens = 512;
    /// Latent frames = (frames - 1) / temporal_ratio + 1 for video.
    std::size_t temporal_ratio = 1;

    friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

/// FLUX-like MM-DiT: 57 blocks, D = 3072, 24 heads, 512 text tokens.
ArchSpec flux_arch();
/// HunyuanVideo-like: 60 blocks, D = 3072, 24 heads, 256 text tokens, 4x
/// temporal compression.
ArchSpec hunyuan_arch();
/// Desk-scale arch for 32x32 latents: one token per latent pixel, D = 64.
ArchSpec desk_arch();

void validate(const ArchSpec& arch);

/// (h / (vae * patch)) * (w / (vae * patch)) * latent_frames + text tokens.
std::uint64_t sequence_length(std::size_t height, std::size_t width, const ArchSpec& arch,
                              std::optional<std::size_t> frames = std::nullopt);

struct AttentionFlops {
    /// 6SD^2 + 4S^2D + 2S^2n + 2SD^2 + 16SD^2
    double exact = 0.0;
    /// 24SD^2 + 4S^2D
    double simplified = 0.0;
};

AttentionFlops attention_flops_per_layer(std::uint64_t sequence, const ArchSpec& arch);

struct StageCost {
    std::size_t stage = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t steps = 0;
    std::uint64_t sequence = 0;
    double flops = 0.0;
};

/// Attention FLOPs of a pipeline. Each stage costs
/// steps_run * layers * simplified per-layer FLOPs.
struct CostReport {
    std::string method;
    std::vector<StageCost> stages;
    double total_flops = 0.0;
    std::optional<double> baseline_flops;

    std::optional<double> speedup() const;
};

CostReport pipeline_flops(const PipelineConfig& config, const ArchSpec& arch,
                          std::string method = "pipeline");
CostReport pipeline_flops(const PipelineConfig& config, const ArchSpec& arch,
                          const PipelineConfig& baseline, std::string method = "pipeline");

/// Per-evaluation simplified FLOPs ratio between two resolutions.
double resolution_speedup(std::size_t h_hi, std::size_t w_hi, std::size_t h_lo, std::size_t w_lo,
                          const ArchSpec& arch);

}  // namespace bnsl
