// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace bnsl {

// Sigma convention throughout: sigma = 1 is pure noise, sigma = 0 is data.

/// N + 1 noise levels, strictly decreasing from exactly 1 to exactly 0.
struct SigmaSchedule {
    std::vector<double> sigmas;
    double shift = 1.0;

    std::size_t steps() const { return sigmas.size() - 1; }
};

/// A stage's shifted schedule together with where denoising starts after
/// noise reintroduction at strength `strength`.
struct StageSchedule {
    SigmaSchedule schedule;
    std::size_t start_index = 0;
    double start_sigma = 1.0;
    double strength = 1.0;

    std::size_t steps_to_run() const { return schedule.steps() - start_index; }
};

/// Uniform grid sigma_j = 1 - j / N.
SigmaSchedule build_base_sigmas(std::size_t steps);

/// s * sigma / (1 + (s - 1) * sigma). Maps [0,1] onto itself, fixing both
/// endpoints; s > 1 pushes levels toward the noisy end.
double shift_sigma(double sigma, double shift);

/// Pointwise shift. Shifts compose multiplicatively, so the result records
/// base.shift * shift.
SigmaSchedule shift_schedule(const SigmaSchedule& base, double shift);

/// floor(N (1 - w)), tolerant of representation error in w.
std::size_t start_index_for(std::size_t steps, double strength);

StageSchedule stage_schedule(std::size_t steps, double shift, double strength);

/// Header `step,s=<v1>,...`, one row per step index, LF endings, 9
/// significant digits. All schedules must have the same length.
std::string export_schedule_csv(const std::vector<SigmaSchedule>& schedules);

}  // namespace bnsl
