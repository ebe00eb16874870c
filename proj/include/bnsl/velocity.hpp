// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "bnsl/latent.hpp"
#include "bnsl/rng.hpp"

namespace bnsl {

/// Largest h * w for which dense covariances are built.
inline constexpr std::size_t kMaxFieldPixels = 4096;

/// A velocity field u(x, sigma) = E[noise - data | X_sigma = x], i.e. the
/// derivative of the interpolation (1 - sigma) data + sigma noise with respect
/// to increasing sigma. Every h x w plane of `x` is an independent sample.
class VelocityField {
public:
    virtual ~VelocityField() = default;
    virtual LatentTensor velocity(const LatentTensor& x, double sigma) const = 0;
};

/// Spectral data for one resolution: cov = Q diag(lambda) Q^T.
struct FieldCache {
    std::size_t height = 0;
    std::size_t width = 0;
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd eigenvectors;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd sqrt_covariance;
};

/// Gaussian random field over [0,1]^2 with constant mean and a squared
/// exponential kernel amp^2 exp(-d^2 / (2 l^2)) plus diagonal jitter. The
/// covariance at any resolution is that kernel sampled on the half-pixel
/// grid, so all resolutions describe the same continuous field.
///
/// `prepare()` must be called for each resolution before evaluating there;
/// after that the model is read-only and safe to share across threads.
class GaussianFieldModel : public VelocityField {
public:
    GaussianFieldModel(double mean, double amplitude, double length_scale,
                       std::optional<double> jitter = std::nullopt);

    double mean() const { return m_mean; }
    double amplitude() const { return m_amplitude; }
    double length_scale() const { return m_length_scale; }
    double jitter() const { return m_jitter; }

    void prepare(std::size_t height, std::size_t width);
    bool is_prepared(std::size_t height, std::size_t width) const;
    const FieldCache& cache(std::size_t height, std::size_t width) const;

    LatentTensor velocity(const LatentTensor& x, double sigma) const override;

    /// mean + cov^{1/2} z: where the probability-flow ODE started at
    /// X(sigma = 1) = z ends at sigma = 0.
    LatentTensor exact_flow_endpoint(const LatentTensor& z) const;

    /// Exact draws from the field (each plane independent).
    LatentTensor sample(const Shape& shape, const RngStream& rng) const;

    /// Log density of each plane of x under N((1 - sigma) mean, A) with
    /// A = (1 - sigma)^2 cov + sigma^2 I, the marginal of X_sigma.
    std::vector<double> marginal_log_density(const LatentTensor& x, double sigma) const;

private:
    double m_mean;
    double m_amplitude;
    double m_length_scale;
    double m_jitter;
    std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const FieldCache>> m_caches;
};

/// Dense kernel matrix on the h x w half-pixel grid, pixels in row-major
/// order. Throws budget_exceeded past kMaxFieldPixels.
Eigen::MatrixXd covariance_at(const GaussianFieldModel& model, std::size_t height,
                              std::size_t width);

/// Finite mixture of Gaussian fields. The velocity is the posterior-weighted
/// sum of component velocities.
class MixtureModel : public VelocityField {
public:
    MixtureModel(std::vector<GaussianFieldModel> components, std::vector<double> weights);

    const std::vector<GaussianFieldModel>& components() const { return m_components; }
    const std::vector<double>& weights() const { return m_weights; }

    void prepare(std::size_t height, std::size_t width);

    /// Posterior component weights per plane: [plane][component].
    std::vector<std::vector<double>> posterior_weights(const LatentTensor& x, double sigma) const;

    LatentTensor velocity(const LatentTensor& x, double sigma) const override;

private:
    std::vector<GaussianFieldModel> m_components;
    std::vector<double> m_weights;
};

/// Multiplies another field's output by a constant. Used to check that
/// verification notices a wrong velocity.
class ScaledVelocity : public VelocityField {
public:
    ScaledVelocity(const VelocityField& inner, double factor) : m_inner(inner), m_factor(factor) {}
    LatentTensor velocity(const LatentTensor& x, double sigma) const override;

private:
    const VelocityField& m_inner;
    double m_factor;
};

struct McVelocityEstimate {
    std::vector<double> estimate;
    std::vector<double> standard_error;
    double effective_samples = 0.0;
};

/// Brute-force estimate of E[X_0 - X_1 | X_sigma = probe] by Nadaraya-Watson
/// regression with a Gaussian kernel of the given bandwidth over n simulated
/// (noise, data) pairs. Only for fields with at most 2 pixels. sigma must be
/// in (0, 1]: at sigma = 0 the noise is unobservable from X_sigma.
McVelocityEstimate mc_velocity_oracle(const GaussianFieldModel& model, std::size_t height,
                                      std::size_t width, std::span<const double> probe,
                                      double sigma, std::size_t n_samples, double bandwidth,
                                      const RngStream& rng);

}  // namespace bnsl
