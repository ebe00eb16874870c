// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnsl/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bnsl/error.hpp"

namespace bnsl {

namespace {

std::string format_g9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

SigmaSchedule build_base_sigmas(std::size_t steps) {
    require(steps >= 1, ErrorKind::invalid_argument, "schedule needs at least one step");
    SigmaSchedule out;
    out.sigmas.resize(steps + 1);
    const double n = static_cast<double>(steps);
    for (std::size_t j = 0; j <= steps; ++j) {
        out.sigmas[j] = 1.0 - static_cast<double>(j) / n;
    }
    out.sigmas.front() = 1.0;
    out.sigmas.back() = 0.0;
    return out;
}

double shift_sigma(double sigma, double shift) {
    require(shift > 0.0 && std::isfinite(shift), ErrorKind::invalid_argument,
            "shift factor must be positive, got " + format_g9(shift));
    require(sigma >= 0.0 && sigma <= 1.0, ErrorKind::invalid_argument,
            "sigma outside [0,1]: " + format_g9(sigma));
    if (shift == 1.0) {
        return sigma;
    }
    // Written as a / (a + b) with b = 1 - sigma >= 0: exact at both ends and
    // never rounds past 1.
    const double scaled = shift * sigma;
    return scaled / (scaled + (1.0 - sigma));
}

SigmaSchedule shift_schedule(const SigmaSchedule& base, double shift) {
    SigmaSchedule out;
    out.shift = base.shift * shift;
    out.sigmas.reserve(base.sigmas.size());
    for (double sigma : base.sigmas) {
        out.sigmas.push_back(shift_sigma(sigma, shift));
    }
    return out;
}

std::size_t start_index_for(std::size_t steps, double strength) {
    require(strength > 0.0 && strength <= 1.0, ErrorKind::invalid_argument,
            "strength must lie in (0,1], got " + format_g9(strength));
    // 20 * (1 - 0.8) evaluates to 3.9999999999999996.
    const double exact = static_cast<double>(steps) * (1.0 - strength);
    const auto index = static_cast<std::size_t>(std::floor(exact + 1e-9));
    return std::min(index, steps - 1);
}

StageSchedule stage_schedule(std::size_t steps, double shift, double strength) {
    StageSchedule out;
    out.schedule = shift_schedule(build_base_sigmas(steps), shift);
    out.start_index = start_index_for(steps, strength);
    out.start_sigma = out.schedule.sigmas[out.start_index];
    out.strength = strength;
    return out;
}

std::string export_schedule_csv(const std::vector<SigmaSchedule>& schedules) {
    require(!schedules.empty(), ErrorKind::invalid_argument, "no schedules to export");
    const std::size_t rows = schedules.front().sigmas.size();
    for (const auto& s : schedules) {
        require(s.sigmas.size() == rows, ErrorKind::invalid_argument,
                "schedules must share a step count");
    }
    std::string out = "step";
    for (const auto& s : schedules) {
        out += ",s=" + format_g9(s.shift);
    }
    out += '\n';
    for (std::size_t j = 0; j < rows; ++j) {
        out += std::to_string(j);
        for (const auto& s : schedules) {
            out += ',' + format_g9(s.sigmas[j]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace bnsl
