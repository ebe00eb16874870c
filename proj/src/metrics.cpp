// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnsl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "bnsl/error.hpp"

namespace bnsl {

namespace {

Eigen::Map<const Eigen::MatrixXd> samples_as_columns(const LatentTensor& population) {
    const Shape& s = population.shape();
    const auto dim = static_cast<Eigen::Index>(population.size() / s.batch);
    return Eigen::Map<const Eigen::MatrixXd>(population.data().data(), dim,
                                             static_cast<Eigen::Index>(s.batch));
}

// 1-D orthonormal DFT matrix entries exp(-2 pi i j k / n) / sqrt(n).
std::vector<std::complex<double>> dft_matrix(std::size_t n) {
    std::vector<std::complex<double>> m(n * n);
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) /
                                 static_cast<double>(n);
            m[k * n + j] = std::polar(norm, angle);
        }
    }
    return m;
}

long signed_frequency(std::size_t k, std::size_t n) {
    return 2 * k <= n ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

}  // namespace

Eigen::MatrixXd sample_covariance(const LatentTensor& population) {
    const std::size_t n = population.shape().batch;
    require(n >= 2, ErrorKind::invalid_argument, "need at least 2 samples for a covariance");
    const auto x = samples_as_columns(population);
    const Eigen::VectorXd mean = x.rowwise().mean();
    const Eigen::MatrixXd centered = x.colwise() - mean;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(x.rows(), x.rows());
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / static_cast<double>(n - 1));
    return cov.selfadjointView<Eigen::Lower>();
}

MomentErrors moment_errors(const LatentTensor& population, const GaussianFieldModel& model) {
    const Shape& s = population.shape();
    require(s.batch >= 2, ErrorKind::invalid_argument,
            "moment errors need at least 2 samples, got " + std::to_string(s.batch));
    require(population.all_finite(), ErrorKind::invalid_argument, "population has non-finite values");
    const FieldCache& c = model.cache(s.height, s.width);
    const auto x = samples_as_columns(population);
    const Eigen::Index plane = static_cast<Eigen::Index>(s.plane_size());
    const Eigen::Index blocks = x.rows() / plane;

    MomentErrors out;
    const Eigen::VectorXd mean = x.rowwise().mean();
    const double target_norm = std::abs(model.mean()) * std::sqrt(static_cast<double>(x.rows()));
    const double mean_diff = (mean.array() - model.mean()).matrix().norm();
    out.mean_error = target_norm > 0.0 ? mean_diff / target_norm : mean_diff;

    const Eigen::MatrixXd cov = sample_covariance(population);
    Eigen::MatrixXd diff = cov;
    for (Eigen::Index b = 0; b < blocks; ++b) {
        diff.block(b * plane, b * plane, plane, plane) -= c.covariance;
    }
    const double target = std::sqrt(static_cast<double>(blocks)) * c.covariance.norm();
    out.covariance_error = diff.norm() / target;
    return out;
}

double psnr(const LatentTensor& a, const LatentTensor& b, double data_range) {
    require_same_shape(a, b, "psnr");
    require(data_range > 0.0, ErrorKind::invalid_argument, "psnr data range must be positive");
    double sse = 0.0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double d = da[i] - db[i];
        sse += d * d;
    }
    if (sse == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double mse = sse / static_cast<double>(da.size());
    return 10.0 * std::log10(data_range * data_range / mse);
}

double RadialProfile::total_energy() const {
    double total = 0.0;
    for (std::size_t i = 0; i < power.size(); ++i) {
        total += power[i] * static_cast<double>(counts[i]);
    }
    return total;
}

RadialProfile radial_power_spectrum(std::span<const double> image, std::size_t height,
                                    std::size_t width) {
    require(height >= 1 && width >= 1 && image.size() == height * width, ErrorKind::shape_mismatch,
            "image length does not match its dimensions");
    // Separable DFT: rows, then columns.
    const auto row_dft = dft_matrix(width);
    const auto col_dft = dft_matrix(height);
    std::vector<std::complex<double>> rows(height * width);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t k = 0; k < width; ++k) {
            std::complex<double> acc = 0.0;
            for (std::size_t j = 0; j < width; ++j) {
                acc += row_dft[k * width + j] * image[r * width + j];
            }
            rows[r * width + k] = acc;
        }
    }

    RadialProfile out;
    for (std::size_t ky = 0; ky < height; ++ky) {
        const long fy = signed_frequency(ky, height);
        for (std::size_t kx = 0; kx < width; ++kx) {
            std::complex<double> acc = 0.0;
            for (std::size_t r = 0; r < height; ++r) {
                acc += col_dft[ky * height + r] * rows[r * width + kx];
            }
            const long fx = signed_frequency(kx, width);
            const auto bin = static_cast<std::size_t>(
                std::lround(std::sqrt(static_cast<double>(fy * fy + fx * fx))));
            if (bin >= out.power.size()) {
                out.power.resize(bin + 1, 0.0);
                out.counts.resize(bin + 1, 0);
            }
            out.power[bin] += std::norm(acc);
            out.counts[bin] += 1;
        }
    }
    for (std::size_t i = 0; i < out.power.size(); ++i) {
        if (out.counts[i] > 0) {
            out.power[i] /= static_cast<double>(out.counts[i]);
        }
    }
    return out;
}

RadialProfile radial_power_spectrum(const LatentTensor& x) {
    require(x.shape().planes() == 1, ErrorKind::invalid_argument,
            "radial spectrum expects a single 2-D plane");
    return radial_power_spectrum(x.data(), x.shape().height, x.shape().width);
}

double convergence_order(std::vector<std::pair<std::size_t, double>> errors) {
    require(errors.size() >= 2, ErrorKind::invalid_argument,
            "convergence order needs at least two (N, error) entries");
    std::sort(errors.begin(), errors.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        const auto [n, err] = errors[i];
        const auto [n2, err2] = errors[i + 1];
        require(n2 == 2 * n, ErrorKind::invalid_argument,
                "convergence order expects doubling step counts");
        require(err > 0.0 && err2 > 0.0 && std::isfinite(err) && std::isfinite(err2),
                ErrorKind::invalid_argument, "convergence order undefined for zero errors");
        total += std::log2(err / err2);
    }
    return total / static_cast<double>(errors.size() - 1);
}

}  // namespace bnsl
