// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnsl/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bnsl/error.hpp"

namespace bnsl {

namespace {

using ConstPlanes = Eigen::Map<const Eigen::MatrixXd>;
using Planes = Eigen::Map<Eigen::MatrixXd>;

ConstPlanes as_planes(const LatentTensor& x) {
    const Shape& s = x.shape();
    return ConstPlanes(x.data().data(), static_cast<Eigen::Index>(s.plane_size()),
                       static_cast<Eigen::Index>(s.planes()));
}

Planes as_planes(LatentTensor& x) {
    const Shape& s = x.shape();
    return Planes(x.data().data(), static_cast<Eigen::Index>(s.plane_size()),
                  static_cast<Eigen::Index>(s.planes()));
}

std::string res_string(std::size_t h, std::size_t w) {
    return std::to_string(h) + "x" + std::to_string(w);
}

void require_sigma(double sigma) {
    require(sigma >= 0.0 && sigma <= 1.0, ErrorKind::invalid_argument, "sigma outside [0,1]");
}

// Eigenvalues of A = (1 - sigma)^2 cov + sigma^2 I.
Eigen::VectorXd marginal_spectrum(const FieldCache& c, double sigma) {
    const double keep = 1.0 - sigma;
    return (keep * keep) * c.eigenvalues.array() + sigma * sigma;
}

}  // namespace

GaussianFieldModel::GaussianFieldModel(double mean, double amplitude, double length_scale,
                                       std::optional<double> jitter)
    : m_mean(mean),
      m_amplitude(amplitude),
      m_length_scale(length_scale),
      m_jitter(jitter.value_or(1e-6 * amplitude * amplitude)) {
    require(std::isfinite(mean), ErrorKind::invalid_argument, "field mean must be finite");
    require(amplitude > 0.0 && std::isfinite(amplitude), ErrorKind::invalid_argument,
            "field amplitude must be positive");
    require(length_scale > 0.0 && std::isfinite(length_scale), ErrorKind::invalid_argument,
            "field length scale must be positive");
    require(m_jitter > 0.0, ErrorKind::invalid_argument, "field jitter must be positive");
}

Eigen::MatrixXd covariance_at(const GaussianFieldModel& model, std::size_t height,
                              std::size_t width) {
    require(height >= 1 && width >= 1, ErrorKind::invalid_shape, "field resolution must be >= 1x1");
    const std::size_t n = height * width;
    require(n <= kMaxFieldPixels, ErrorKind::budget_exceeded,
            "field at " + res_string(height, width) + " exceeds the dense budget of " +
                std::to_string(kMaxFieldPixels) + " pixels; use a smaller resolution (<= 64x64)");

    std::vector<double> ys(n), xs(n);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            ys[r * width + c] = (static_cast<double>(r) + 0.5) / static_cast<double>(height);
            xs[r * width + c] = (static_cast<double>(c) + 0.5) / static_cast<double>(width);
        }
    }
    const double amp2 = model.amplitude() * model.amplitude();
    const double inv_two_l2 = 1.0 / (2.0 * model.length_scale() * model.length_scale());
    const auto dim = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd cov(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        cov(i, i) = amp2 + model.jitter();
        for (Eigen::Index j = 0; j < i; ++j) {
            const double dy = ys[i] - ys[j];
            const double dx = xs[i] - xs[j];
            const double k = amp2 * std::exp(-(dy * dy + dx * dx) * inv_two_l2);
            cov(i, j) = k;
            cov(j, i) = k;
        }
    }
    return cov;
}

void GaussianFieldModel::prepare(std::size_t height, std::size_t width) {
    if (is_prepared(height, width)) {
        return;
    }
    auto cache = std::make_shared<FieldCache>();
    cache->height = height;
    cache->width = width;
    cache->covariance = covariance_at(*this, height, width);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cache->covariance);
    require(solver.info() == Eigen::Success, ErrorKind::invalid_argument,
            "covariance eigendecomposition failed at " + res_string(height, width));
    cache->eigenvectors = solver.eigenvectors();
    cache->eigenvalues = solver.eigenvalues().cwiseMax(0.0);
    cache->sqrt_covariance = cache->eigenvectors *
                             cache->eigenvalues.cwiseSqrt().asDiagonal() *
                             cache->eigenvectors.transpose();
    m_caches.emplace(std::make_pair(height, width), std::move(cache));
}

bool GaussianFieldModel::is_prepared(std::size_t height, std::size_t width) const {
    return m_caches.count({height, width}) != 0;
}

const FieldCache& GaussianFieldModel::cache(std::size_t height, std::size_t width) const {
    const auto it = m_caches.find({height, width});
    require(it != m_caches.end(), ErrorKind::not_cached,
            "field not prepared at " + res_string(height, width));
    return *it->second;
}

LatentTensor GaussianFieldModel::velocity(const LatentTensor& x, double sigma) const {
    require_sigma(sigma);
    const FieldCache& c = cache(x.shape().height, x.shape().width);
    const double keep = 1.0 - sigma;

    // u = Q diag((sigma - keep lambda) / (keep^2 lambda + sigma^2)) Q^T (x - keep mu) - mu
    const Eigen::VectorXd gain =
        (sigma - keep * c.eigenvalues.array()) / marginal_spectrum(c, sigma).array();
    Eigen::MatrixXd centered = as_planes(x).array() - keep * m_mean;
    Eigen::MatrixXd coeffs;
    coeffs.noalias() = c.eigenvectors.transpose() * centered;
    coeffs = gain.asDiagonal() * coeffs;

    LatentTensor out(x.shape());
    auto u = as_planes(out);
    u.noalias() = c.eigenvectors * coeffs;
    u.array() -= m_mean;
    return out;
}

LatentTensor GaussianFieldModel::exact_flow_endpoint(const LatentTensor& z) const {
    const FieldCache& c = cache(z.shape().height, z.shape().width);
    LatentTensor out(z.shape());
    auto x = as_planes(out);
    x.noalias() = c.sqrt_covariance * as_planes(z);
    x.array() += m_mean;
    return out;
}

LatentTensor GaussianFieldModel::sample(const Shape& shape, const RngStream& rng) const {
    return exact_flow_endpoint(sample_noise(shape, rng));
}

std::vector<double> GaussianFieldModel::marginal_log_density(const LatentTensor& x,
                                                             double sigma) const {
    require_sigma(sigma);
    const FieldCache& c = cache(x.shape().height, x.shape().width);
    const Eigen::VectorXd spectrum = marginal_spectrum(c, sigma);
    const double log_det = spectrum.array().log().sum();
    const double d = static_cast<double>(spectrum.size());
    const Eigen::MatrixXd centered = as_planes(x).array() - (1.0 - sigma) * m_mean;
    const Eigen::MatrixXd coeffs = c.eigenvectors.transpose() * centered;
    const Eigen::VectorXd quad =
        (spectrum.cwiseInverse().asDiagonal() * coeffs.cwiseAbs2()).colwise().sum();
    std::vector<double> out(static_cast<std::size_t>(quad.size()));
    const double log_two_pi = std::log(2.0 * std::numbers::pi);
    for (Eigen::Index p = 0; p < quad.size(); ++p) {
        out[static_cast<std::size_t>(p)] = -0.5 * (quad[p] + log_det + d * log_two_pi);
    }
    return out;
}

MixtureModel::MixtureModel(std::vector<GaussianFieldModel> components, std::vector<double> weights)
    : m_components(std::move(components)), m_weights(std::move(weights)) {
    require(!m_components.empty(), ErrorKind::invalid_argument, "mixture needs a component");
    require(m_components.size() == m_weights.size(), ErrorKind::invalid_argument,
            "mixture weights and components differ in length");
    double total = 0.0;
    for (double w : m_weights) {
        require(w > 0.0, ErrorKind::invalid_argument, "mixture weights must be positive");
        total += w;
    }
    require(std::abs(total - 1.0) <= 1e-9, ErrorKind::invalid_argument,
            "mixture weights must sum to 1");
}

void MixtureModel::prepare(std::size_t height, std::size_t width) {
    for (auto& c : m_components) {
        c.prepare(height, width);
    }
}

std::vector<std::vector<double>> MixtureModel::posterior_weights(const LatentTensor& x,
                                                                 double sigma) const {
    const std::size_t planes = x.shape().planes();
    std::vector<std::vector<double>> out(planes, std::vector<double>(m_components.size()));
    std::vector<std::vector<double>> log_dens;
    log_dens.reserve(m_components.size());
    for (const auto& c : m_components) {
        log_dens.push_back(c.marginal_log_density(x, sigma));
    }
    for (std::size_t p = 0; p < planes; ++p) {
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < m_components.size(); ++k) {
            peak = std::max(peak, std::log(m_weights[k]) + log_dens[k][p]);
        }
        double total = 0.0;
        for (std::size_t k = 0; k < m_components.size(); ++k) {
            out[p][k] = std::exp(std::log(m_weights[k]) + log_dens[k][p] - peak);
            total += out[p][k];
        }
        for (double& w : out[p]) {
            w /= total;
        }
    }
    return out;
}

LatentTensor MixtureModel::velocity(const LatentTensor& x, double sigma) const {
    if (m_components.size() == 1) {
        return m_components.front().velocity(x, sigma);
    }
    const auto weights = posterior_weights(x, sigma);
    LatentTensor out(x.shape());
    for (std::size_t k = 0; k < m_components.size(); ++k) {
        const LatentTensor u = m_components[k].velocity(x, sigma);
        for (std::size_t p = 0; p < x.shape().planes(); ++p) {
            auto dst = out.plane(p);
            const auto src = u.plane(p);
            for (std::size_t i = 0; i < dst.size(); ++i) {
                dst[i] += weights[p][k] * src[i];
            }
        }
    }
    return out;
}

LatentTensor ScaledVelocity::velocity(const LatentTensor& x, double sigma) const {
    LatentTensor u = m_inner.velocity(x, sigma);
    for (double& v : u.data()) {
        v *= m_factor;
    }
    return u;
}

McVelocityEstimate mc_velocity_oracle(const GaussianFieldModel& model, std::size_t height,
                                      std::size_t width, std::span<const double> probe,
                                      double sigma, std::size_t n_samples, double bandwidth,
                                      const RngStream& rng) {
    const std::size_t dim = height * width;
    require(dim >= 1 && dim <= 2, ErrorKind::unsupported,
            "Monte Carlo velocity oracle supports at most 2 dimensions, got " +
                std::to_string(dim));
    require(probe.size() == dim, ErrorKind::shape_mismatch, "probe length does not match field");
    require(sigma > 0.0 && sigma <= 1.0, ErrorKind::invalid_argument,
            "Monte Carlo oracle needs sigma in (0,1]: at sigma = 0 the noise is not identified");
    require(n_samples >= 100000, ErrorKind::invalid_argument,
            "Monte Carlo oracle needs at least 1e5 samples");
    require(bandwidth > 0.0, ErrorKind::invalid_argument, "bandwidth must be positive");

    const FieldCache& c = model.cache(height, width);
    const RngStream noise_rng = rng.derive(0);
    const RngStream data_rng = rng.derive(1);
    const double keep = 1.0 - sigma;

    // Pass 1: targets and squared distances.
    std::vector<double> targets(n_samples * dim);
    std::vector<double> dist2(n_samples);
    std::vector<double> noise(dim), z(dim);
    double min_dist2 = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (std::size_t i = 0; i < dim; ++i) {
            noise[i] = noise_rng.normal(s * dim + i);
            z[i] = data_rng.normal(s * dim + i);
        }
        double d2 = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            double data = model.mean();
            for (std::size_t j = 0; j < dim; ++j) {
                data += c.sqrt_covariance(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(j)) * z[j];
            }
            const double mixed = keep * data + sigma * noise[i];
            targets[s * dim + i] = noise[i] - data;
            d2 += (mixed - probe[i]) * (mixed - probe[i]);
        }
        dist2[s] = d2;
        min_dist2 = std::min(min_dist2, d2);
    }

    // Pass 2: kernel weights (shifted by the nearest distance to avoid underflow).
    const double inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);
    std::vector<double> kw(n_samples);
    double sum_w = 0.0, sum_w2 = 0.0;
    std::vector<double> mean(dim, 0.0);
    for (std::size_t s = 0; s < n_samples; ++s) {
        kw[s] = std::exp(-(dist2[s] - min_dist2) * inv_two_h2);
        sum_w += kw[s];
        sum_w2 += kw[s] * kw[s];
        for (std::size_t i = 0; i < dim; ++i) {
            mean[i] += kw[s] * targets[s * dim + i];
        }
    }
    for (double& m : mean) {
        m /= sum_w;
    }

    McVelocityEstimate out;
    out.estimate = mean;
    out.standard_error.assign(dim, 0.0);
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (std::size_t i = 0; i < dim; ++i) {
            const double r = targets[s * dim + i] - mean[i];
            out.standard_error[i] += kw[s] * kw[s] * r * r;
        }
    }
    for (double& se : out.standard_error) {
        se = std::sqrt(se) / sum_w;
    }
    out.effective_samples = sum_w * sum_w / sum_w2;
    return out;
}

}  // namespace bnsl
