// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bnsl/latent.hpp"
#include "bnsl/resample.hpp"
#include "bnsl/rng.hpp"
#include "bnsl/schedule.hpp"
#include "bnsl/velocity.hpp"

namespace bnsl {

struct StageConfig {
    std::size_t height = 1;
    std::size_t width = 1;
    std::size_t steps = 1;
    double strength = 1.0;
    double shift = 1.0;

    friend bool operator==(const StageConfig&, const StageConfig&) = default;
};

struct PipelineConfig {
    std::vector<StageConfig> stages;
    ResampleKernel kernel;
    std::size_t batch = 1;
    std::size_t channels = 1;
    std::optional<std::size_t> frames;
    std::uint64_t seed = 0;
    /// Every stage reuses the first stage's shift.
    bool disable_reshift = false;
    /// Later stages start from the resized latent at their start index
    /// without re-noising it.
    bool disable_noise_reintroduction = false;

    std::size_t total_steps() const;
    Shape shape_at(std::size_t stage) const;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Throws config errors: no stages, zero dims or steps, first strength != 1,
/// strengths outside (0,1], non-positive shifts.
void validate(const PipelineConfig& config);

/// True for high-low-high shapes: resolution falls then rises at least once.
/// Monotone configs are legal but get a lint warning from the CLI.
bool is_bottleneck_shaped(const PipelineConfig& config);

/// The shift stage `index` actually uses after applying the ablation flag.
double effective_shift(const PipelineConfig& config, std::size_t index);

/// The schedule stage `index` denoises on.
StageSchedule stage_schedule_for(const PipelineConfig& config, std::size_t index);

struct StageLog {
    std::size_t stage = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t evaluations = 0;
    double start_sigma = 1.0;
    double shift = 1.0;
    std::uint64_t noise_stream = 0;
};

struct RunResult {
    LatentTensor final_latent;
    std::vector<LatentTensor> stage_latents;
    std::vector<StageLog> log;
    std::uint64_t seed = 0;
    std::uint64_t run_stream = 0;

    std::size_t total_evaluations() const;
};

/// x + u (sigma_to - sigma_from); requires sigma_to < sigma_from.
LatentTensor euler_step(const LatentTensor& x, const LatentTensor& u, double sigma_from,
                        double sigma_to);

/// (1 - tau) x + tau eta with eta ~ N(0, I) drawn from `rng`.
LatentTensor reintroduce_noise(const LatentTensor& x, double tau, const RngStream& rng);
/// Same with a caller-supplied eta.
LatentTensor reintroduce_noise(const LatentTensor& x, double tau, const LatentTensor& eta);

/// Runs Euler steps from schedule.start_index to the end. Returns the count
/// of velocity evaluations through `evaluations`.
LatentTensor denoise_stage(LatentTensor x, const VelocityField& field,
                           const StageSchedule& schedule, std::size_t* evaluations = nullptr);

/// The stream for one run; stages derive from it by index.
RngStream run_stream(std::uint64_t seed, std::uint64_t run_index = 0);

/// Multi-stage sampling: pure noise at stage 0, then for each later stage
/// resize, re-noise to the stage's start sigma and denoise the remaining
/// steps. The field must be prepared at every stage resolution.
RunResult bottleneck_sample(const PipelineConfig& config, const VelocityField& field,
                            std::uint64_t run_index = 0);

/// Single-stage sampling over the full schedule. `config` must have exactly
/// one stage with strength 1.
RunResult standard_sample(const PipelineConfig& config, const VelocityField& field,
                          std::uint64_t run_index = 0);

/// Low-to-high pipeline; stage resolutions must be nondecreasing.
RunResult cascaded_sample(const PipelineConfig& config, const VelocityField& field,
                          std::uint64_t run_index = 0);

}  // namespace bnsl
