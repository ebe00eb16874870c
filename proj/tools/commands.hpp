// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bnsl/config.hpp"
#include "bnsl/cost_model.hpp"
#include "bnsl/sampler.hpp"

namespace bnsl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by the binary and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

enum class AblationMode { standard, bottleneck, cascaded, reduced_steps, no_reshift, no_noise_reintro };

std::vector<AblationMode> all_ablation_modes();
AblationMode parse_ablation_mode(const std::string& name);
std::string to_string(AblationMode mode);

/// The single-stage pipeline `config` is compared against: its baseline
/// preset, or the final stage run for as many evaluations as `config` uses.
PipelineConfig baseline_pipeline(const ExperimentConfig& config);

/// Pipeline run by one ablation mode. Cascaded drops every stage before the
/// lowest resolution and gives the new first stage enough steps to match the
/// bottleneck's attention FLOPs; reduced-steps shortens the baseline to the
/// same FLOPs.
PipelineConfig ablation_pipeline(const ExperimentConfig& config, AblationMode mode);

struct MetricsRow {
    std::string method;
    std::uint64_t seed = 0;
    std::optional<double> mean_err;
    std::optional<double> cov_err;
    std::optional<double> psnr_vs_baseline;
    double flops_T = 0.0;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);

struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

/// The oracle suite behind `verify`. `velocity_scale` multiplies the
/// velocity under test (1 = unperturbed).
std::vector<CheckResult> run_oracle_checks(double velocity_scale, std::uint64_t seed);

/// Worker count from BNSL_THREADS, capped by `jobs`.
std::size_t worker_count(std::size_t jobs);

}  // namespace bnsl::cli
