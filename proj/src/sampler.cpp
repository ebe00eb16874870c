// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnsl/sampler.hpp"

#include <cmath>
#include <string>

#include "bnsl/error.hpp"

namespace bnsl {

namespace {

std::string stage_field(std::size_t index, const char* name) {
    return "stages[" + std::to_string(index) + "]." + name;
}

}  // namespace

std::size_t PipelineConfig::total_steps() const {
    std::size_t total = 0;
    for (const auto& s : stages) {
        total += s.steps;
    }
    return total;
}

Shape PipelineConfig::shape_at(std::size_t stage) const {
    Shape shape;
    shape.batch = batch;
    shape.channels = channels;
    shape.frames = frames;
    shape.height = stages.at(stage).height;
    shape.width = stages.at(stage).width;
    return shape;
}

void validate(const PipelineConfig& config) {
    require(!config.stages.empty(), ErrorKind::config, "pipeline needs at least one stage");
    require(config.batch >= 1 && config.channels >= 1 && (!config.frames || *config.frames >= 1),
            ErrorKind::config, "batch, channels and frames must be >= 1");
    for (std::size_t i = 0; i < config.stages.size(); ++i) {
        const StageConfig& s = config.stages[i];
        require(s.height >= 1 && s.width >= 1, ErrorKind::config,
                stage_field(i, "height/width") + " must be >= 1");
        require(s.steps >= 1, ErrorKind::config, stage_field(i, "steps") + " must be >= 1");
        require(s.strength > 0.0 && s.strength <= 1.0, ErrorKind::config,
                stage_field(i, "strength") + " must lie in (0,1]");
        require(s.shift > 0.0 && std::isfinite(s.shift), ErrorKind::config,
                stage_field(i, "shift") + " must be positive");
    }
    require(config.stages.front().strength == 1.0, ErrorKind::config,
            "stages[0].strength must be 1 (the first stage starts from pure noise)");
    require(config.kernel.lanczos_window >= 1, ErrorKind::config, "lanczos_window must be >= 1");
}

bool is_bottleneck_shaped(const PipelineConfig& config) {
    bool fell = false;
    for (std::size_t i = 1; i < config.stages.size(); ++i) {
        const auto prev = config.stages[i - 1].height * config.stages[i - 1].width;
        const auto cur = config.stages[i].height * config.stages[i].width;
        if (cur < prev) {
            fell = true;
        } else if (cur > prev && fell) {
            return true;
        }
    }
    return false;
}

double effective_shift(const PipelineConfig& config, std::size_t index) {
    return config.disable_reshift ? config.stages.front().shift : config.stages.at(index).shift;
}

StageSchedule stage_schedule_for(const PipelineConfig& config, std::size_t index) {
    const StageConfig& s = config.stages.at(index);
    return stage_schedule(s.steps, effective_shift(config, index), s.strength);
}

std::size_t RunResult::total_evaluations() const {
    std::size_t total = 0;
    for (const auto& entry : log) {
        total += entry.evaluations;
    }
    return total;
}

LatentTensor euler_step(const LatentTensor& x, const LatentTensor& u, double sigma_from,
                        double sigma_to) {
    require(sigma_to < sigma_from, ErrorKind::invalid_argument,
            "Euler steps must decrease sigma");
    require(sigma_to >= 0.0 && sigma_from <= 1.0, ErrorKind::invalid_argument,
            "Euler step sigmas outside [0,1]");
    return axpy(x, sigma_to - sigma_from, u);
}

LatentTensor reintroduce_noise(const LatentTensor& x, double tau, const LatentTensor& eta) {
    return lerp(x, eta, tau);
}

LatentTensor reintroduce_noise(const LatentTensor& x, double tau, const RngStream& rng) {
    require(tau >= 0.0 && tau <= 1.0, ErrorKind::invalid_argument, "noise level outside [0,1]");
    return reintroduce_noise(x, tau, sample_noise(x.shape(), rng));
}

LatentTensor denoise_stage(LatentTensor x, const VelocityField& field,
                           const StageSchedule& schedule, std::size_t* evaluations) {
    const auto& sigmas = schedule.schedule.sigmas;
    std::size_t count = 0;
    for (std::size_t j = schedule.start_index; j + 1 < sigmas.size(); ++j) {
        const LatentTensor u = field.velocity(x, sigmas[j]);
        ++count;
        x = euler_step(x, u, sigmas[j], sigmas[j + 1]);
    }
    if (evaluations != nullptr) {
        *evaluations = count;
    }
    return x;
}

RngStream run_stream(std::uint64_t seed, std::uint64_t run_index) {
    return RngStream{seed, 0}.derive(run_index);
}

RunResult bottleneck_sample(const PipelineConfig& config, const VelocityField& field,
                            std::uint64_t run_index) {
    validate(config);
    const RngStream run = run_stream(config.seed, run_index);

    RunResult result;
    result.seed = config.seed;
    result.run_stream = run.stream_id;

    LatentTensor x;
    for (std::size_t i = 0; i < config.stages.size(); ++i) {
        const StageConfig& stage = config.stages[i];
        const RngStream noise = run.derive(i);
        const StageSchedule schedule = stage_schedule_for(config, i);

        if (i == 0) {
            // Strength 1: re-noising at tau = 1 would return the draw itself.
            x = sample_noise(config.shape_at(0), noise);
        } else {
            x = resize(x, stage.height, stage.width, config.kernel);
            if (!config.disable_noise_reintroduction) {
                x = reintroduce_noise(x, schedule.start_sigma, noise);
            }
        }

        StageLog entry;
        entry.stage = i;
        entry.height = stage.height;
        entry.width = stage.width;
        entry.start_sigma = schedule.start_sigma;
        entry.shift = effective_shift(config, i);
        entry.noise_stream = noise.stream_id;
        x = denoise_stage(std::move(x), field, schedule, &entry.evaluations);
        require(x.all_finite(), ErrorKind::invalid_argument,
                "non-finite latent after stage " + std::to_string(i));
        result.log.push_back(entry);
        result.stage_latents.push_back(x);
    }
    result.final_latent = x;
    return result;
}

RunResult standard_sample(const PipelineConfig& config, const VelocityField& field,
                          std::uint64_t run_index) {
    validate(config);
    require(config.stages.size() == 1, ErrorKind::config,
            "standard sampling takes exactly one stage");
    const StageConfig& stage = config.stages.front();
    const RngStream run = run_stream(config.seed, run_index);
    const RngStream noise = run.derive(0);
    const SigmaSchedule schedule = shift_schedule(build_base_sigmas(stage.steps), stage.shift);

    LatentTensor x = sample_noise(config.shape_at(0), noise);
    for (std::size_t j = 0; j < stage.steps; ++j) {
        x = euler_step(x, field.velocity(x, schedule.sigmas[j]), schedule.sigmas[j],
                       schedule.sigmas[j + 1]);
    }

    RunResult result;
    result.seed = config.seed;
    result.run_stream = run.stream_id;
    result.log.push_back(
        StageLog{0, stage.height, stage.width, stage.steps, 1.0, stage.shift, noise.stream_id});
    result.stage_latents.push_back(x);
    result.final_latent = std::move(x);
    return result;
}

RunResult cascaded_sample(const PipelineConfig& config, const VelocityField& field,
                          std::uint64_t run_index) {
    validate(config);
    for (std::size_t i = 1; i < config.stages.size(); ++i) {
        const auto& a = config.stages[i - 1];
        const auto& b = config.stages[i];
        require(b.height >= a.height && b.width >= a.width, ErrorKind::config,
                "cascaded stages must not decrease in resolution (" + stage_field(i, "height") +
                    ")");
    }
    return bottleneck_sample(config, field, run_index);
}

}  // namespace bnsl
