// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bnsl/cost_model.hpp"
#include "bnsl/sampler.hpp"
#include "bnsl/velocity.hpp"

namespace bnsl {

struct MixtureComponentSpec {
    double weight = 1.0;
    double mean = 0.0;
    double amplitude = 1.0;
    double length_scale = 0.35;

    friend bool operator==(const MixtureComponentSpec&, const MixtureComponentSpec&) = default;
};

/// Target distribution. A non-empty mixture replaces the single field.
struct ModelSpec {
    double mean = 0.0;
    double amplitude = 1.0;
    double length_scale = 0.35;
    std::optional<double> jitter;
    std::vector<MixtureComponentSpec> mixture;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct ExperimentConfig {
    std::string name = "custom";
    PipelineConfig pipeline;
    ArchSpec arch;
    ModelSpec model;
    std::size_t runs = 1;
    std::string output_dir = "out";
    /// Preset compared against for speedup and PSNR.
    std::optional<std::string> baseline;
    /// Data range used for PSNR between latents.
    double psnr_range = 6.0;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

nlohmann::json to_json(const ExperimentConfig& config);

/// Strict parse: unknown keys, wrong types and inconsistent stage arrays are
/// config errors whose message starts with the offending field path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::vector<std::string> preset_names();
/// Throws a config error for unknown names.
ExperimentConfig preset(const std::string& name);

/// Owns the velocity field described by a ModelSpec.
class FieldModel {
public:
    explicit FieldModel(const ModelSpec& spec);

    void prepare(std::size_t height, std::size_t width);
    void prepare_for(const PipelineConfig& pipeline);

    const VelocityField& field() const;
    /// The Gaussian field when the model is not a mixture.
    const GaussianFieldModel* gaussian() const;

private:
    std::optional<GaussianFieldModel> m_gaussian;
    std::optional<MixtureModel> m_mixture;
};

}  // namespace bnsl
