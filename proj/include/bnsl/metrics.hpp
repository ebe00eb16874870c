// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bnsl/latent.hpp"
#include "bnsl/velocity.hpp"

namespace bnsl {

struct MomentErrors {
    /// |m - mu| / |mu|, or |m| when mu = 0.
    double mean_error = 0.0;
    /// |C - Sigma|_F / |Sigma|_F with the unbiased sample covariance C.
    double covariance_error = 0.0;
};

/// Samples are the batch entries of `population`; each is flattened over
/// (c, f, h, w). The target covariance is the field's covariance on every
/// plane, independent across channels and frames.
MomentErrors moment_errors(const LatentTensor& population, const GaussianFieldModel& model);

/// Unbiased sample covariance of the batch entries of `population`.
Eigen::MatrixXd sample_covariance(const LatentTensor& population);

/// 10 log10(range^2 / MSE); +infinity when the inputs are identical.
double psnr(const LatentTensor& a, const LatentTensor& b, double data_range);

struct RadialProfile {
    /// Mean |F|^2 per integer radius, DC first, orthonormal DFT.
    std::vector<double> power;
    std::vector<std::size_t> counts;

    /// Sum over bins of power * count.
    double total_energy() const;
};

RadialProfile radial_power_spectrum(std::span<const double> image, std::size_t height,
                                    std::size_t width);
/// `x` must hold exactly one plane.
RadialProfile radial_power_spectrum(const LatentTensor& x);

/// Mean of log2(err(N) / err(2N)) over consecutive doublings.
double convergence_order(std::vector<std::pair<std::size_t, double>> errors);

}  // namespace bnsl
