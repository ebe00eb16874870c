// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnsl/cost_model.hpp"

#include "bnsl/error.hpp"

namespace bnsl {

ArchSpec flux_arch() {
    return ArchSpec{};
}

ArchSpec hunyuan_arch() {
    ArchSpec arch;
    arch.num_layers = 60;
    arch.text_tokens = 256;
    arch.temporal_ratio = 4;
    return arch;
}

ArchSpec desk_arch() {
    ArchSpec arch;
    arch.hidden_dim = 64;
    arch.num_heads = 4;
    arch.num_layers = 8;
    arch.vae_ratio = 1;
    arch.patch_size = 1;
    arch.text_tokens = 0;
    return arch;
}

void validate(const ArchSpec& arch) {
    require(arch.hidden_dim > 0 && arch.num_heads > 0 && arch.num_layers > 0 &&
                arch.vae_ratio > 0 && arch.patch_size > 0 && arch.temporal_ratio > 0,
            ErrorKind::config, "arch dimensions must be positive");
}

std::uint64_t sequence_length(std::size_t height, std::size_t width, const ArchSpec& arch,
                              std::optional<std::size_t> frames) {
    validate(arch);
    const std::size_t stride = arch.vae_ratio * arch.patch_size;
    require(height % stride == 0 && width % stride == 0, ErrorKind::invalid_argument,
            std::to_string(height) + "x" + std::to_string(width) + " is not divisible by " +
                std::to_string(stride) + " (vae_ratio * patch_size)");
    std::uint64_t latent_frames = 1;
    if (frames) {
        require(*frames >= 1, ErrorKind::invalid_argument, "frames must be >= 1");
        latent_frames = (*frames - 1) / arch.temporal_ratio + 1;
    }
    return static_cast<std::uint64_t>(height / stride) * (width / stride) * latent_frames +
           arch.text_tokens;
}

AttentionFlops attention_flops_per_layer(std::uint64_t sequence, const ArchSpec& arch) {
    require(sequence >= 1, ErrorKind::invalid_argument, "sequence length must be >= 1");
    const double s = static_cast<double>(sequence);
    const double d = static_cast<double>(arch.hidden_dim);
    const double n = static_cast<double>(arch.num_heads);
    AttentionFlops out;
    out.exact = 6.0 * s * d * d + 4.0 * s * s * d + 2.0 * s * s * n + 2.0 * s * d * d +
                16.0 * s * d * d;
    out.simplified = 24.0 * s * d * d + 4.0 * s * s * d;
    return out;
}

std::optional<double> CostReport::speedup() const {
    if (!baseline_flops || total_flops <= 0.0) {
        return std::nullopt;
    }
    return *baseline_flops / total_flops;
}

CostReport pipeline_flops(const PipelineConfig& config, const ArchSpec& arch, std::string method) {
    validate(config);
    validate(arch);
    CostReport report;
    report.method = std::move(method);
    for (std::size_t i = 0; i < config.stages.size(); ++i) {
        const StageConfig& stage = config.stages[i];
        StageCost cost;
        cost.stage = i;
        cost.height = stage.height;
        cost.width = stage.width;
        cost.steps = stage_schedule_for(config, i).steps_to_run();
        cost.sequence = sequence_length(stage.height, stage.width, arch, config.frames);
        cost.flops = static_cast<double>(cost.steps) * static_cast<double>(arch.num_layers) *
                     attention_flops_per_layer(cost.sequence, arch).simplified;
        report.total_flops += cost.flops;
        report.stages.push_back(cost);
    }
    return report;
}

CostReport pipeline_flops(const PipelineConfig& config, const ArchSpec& arch,
                          const PipelineConfig& baseline, std::string method) {
    CostReport report = pipeline_flops(config, arch, std::move(method));
    report.baseline_flops = pipeline_flops(baseline, arch).total_flops;
    return report;
}

double resolution_speedup(std::size_t h_hi, std::size_t w_hi, std::size_t h_lo, std::size_t w_lo,
                          const ArchSpec& arch) {
    const double hi = attention_flops_per_layer(sequence_length(h_hi, w_hi, arch), arch).simplified;
    const double lo = attention_flops_per_layer(sequence_length(h_lo, w_lo, arch), arch).simplified;
    return hi / lo;
}

}  // namespace bnsl
