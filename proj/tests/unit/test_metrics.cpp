// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "bnsl/metrics.hpp"
#include "bnsl/sampler.hpp"

using namespace bnsl;
using bnsl::testing::error_kind;
using bnsl::testing::planes_of;

namespace {

// Expected Frobenius sampling error of an unbiased Gaussian covariance
// estimate, relative to |Sigma|_F.
double covariance_floor(const Eigen::MatrixXd& cov, std::size_t n) {
    const double tr = cov.trace();
    return std::sqrt((tr * tr + cov.squaredNorm()) / static_cast<double>(n - 1)) / cov.norm();
}

}  // namespace

TEST_CASE("moment errors of exact draws sit at the sampling floor") {
    GaussianFieldModel field(0.5, 1.0, 0.35);
    field.prepare(8, 8);
    const std::size_t n = 2000;
    const LatentTensor pop = field.sample(planes_of(n, 8, 8), RngStream{42, 3});
    const MomentErrors e = moment_errors(pop, field);
    const double floor = covariance_floor(field.cache(8, 8).covariance, n);
    MESSAGE("cov err " << e.covariance_error << ", floor " << floor << ", mean err " << e.mean_error);
    CHECK(e.covariance_error <= 3.0 * floor);
    CHECK(e.covariance_error >= floor / 3.0);
    CHECK(e.mean_error < 0.1);
}

TEST_CASE("moment errors of a degenerate population") {
    GaussianFieldModel field(0.7, 1.0, 0.35);
    field.prepare(4, 4);
    const LatentTensor pop(planes_of(10, 4, 4), 0.7);
    const MomentErrors e = moment_errors(pop, field);
    CHECK(e.mean_error == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(e.covariance_error == doctest::Approx(1.0).epsilon(1e-15));

    GaussianFieldModel centred(0.0, 1.0, 0.35);
    centred.prepare(4, 4);
    // Zero target mean: absolute error, here |0.5 * 1| over 16 pixels = 2.
    CHECK(moment_errors(LatentTensor(planes_of(3, 4, 4), 0.5), centred).mean_error ==
          doctest::Approx(2.0).epsilon(1e-14));

    CHECK(error_kind([&] { moment_errors(LatentTensor(planes_of(1, 4, 4), 0.7), field); }) ==
          ErrorKind::invalid_argument);
    CHECK(error_kind([&] { moment_errors(LatentTensor(planes_of(3, 5, 5)), field); }) == ErrorKind::not_cached);
}

TEST_CASE("moment errors treat channels as independent blocks") {
    GaussianFieldModel field(0.0, 1.0, 0.35);
    field.prepare(4, 4);
    Shape s = planes_of(3000, 4, 4);
    s.channels = 2;
    const LatentTensor pop = field.sample(s, RngStream{5, 5});
    const MomentErrors e = moment_errors(pop, field);
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(32, 32);
    block.topLeftCorner(16, 16) = field.cache(4, 4).covariance;
    block.bottomRightCorner(16, 16) = field.cache(4, 4).covariance;
    CHECK(e.covariance_error <= 3.0 * covariance_floor(block, 3000));
}

TEST_CASE("sample covariance matches a direct two-pass computation") {
    const LatentTensor pop = sample_noise(planes_of(7, 2, 2), RngStream{8, 1});
    const Eigen::MatrixXd c = sample_covariance(pop);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            double mi = 0.0, mj = 0.0;
            for (int s = 0; s < 7; ++s) {
                mi += pop[static_cast<std::size_t>(s * 4 + i)] / 7.0;
                mj += pop[static_cast<std::size_t>(s * 4 + j)] / 7.0;
            }
            double acc = 0.0;
            for (int s = 0; s < 7; ++s) {
                acc += (pop[static_cast<std::size_t>(s * 4 + i)] - mi) * (pop[static_cast<std::size_t>(s * 4 + j)] - mj);
            }
            CHECK(c(i, j) == doctest::Approx(acc / 6.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("property: moment errors ignore sample order") {
    GaussianFieldModel field(0.3, 1.0, 0.35);
    field.prepare(3, 3);
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 20 + static_cast<std::size_t>(trial) * 7;
        const LatentTensor pop = field.sample(planes_of(n, 3, 3), RngStream{static_cast<std::uint64_t>(trial), 2});
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), gen);
        LatentTensor shuffled(pop.shape());
        for (std::size_t s = 0; s < n; ++s) {
            std::copy(pop.plane(order[s]).begin(), pop.plane(order[s]).end(), shuffled.plane(s).begin());
        }
        const MomentErrors a = moment_errors(pop, field);
        const MomentErrors b = moment_errors(shuffled, field);
        CHECK(a.mean_error == doctest::Approx(b.mean_error).epsilon(1e-12));
        CHECK(a.covariance_error == doctest::Approx(b.covariance_error).epsilon(1e-12));
    }
}

TEST_CASE("psnr") {
    const LatentTensor a = sample_noise(planes_of(2, 4, 4), RngStream{1, 1});
    CHECK(psnr(a, a, 1.0) == std::numeric_limits<double>::infinity());

    LatentTensor b = a;
    for (double& v : b.data()) v += 1.0;
    CHECK(psnr(a, b, 1.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    for (double& v : b.data()) v -= 0.5;
    CHECK(psnr(a, b, 1.0) == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));
    CHECK(psnr(a, b, 1.0) == doctest::Approx(6.0206).epsilon(1e-5));

    const LatentTensor c = sample_noise(planes_of(2, 4, 4), RngStream{1, 2});
    CHECK(psnr(a, c, 6.0) == psnr(c, a, 6.0));
    CHECK(error_kind([&] { psnr(a, LatentTensor(planes_of(1, 4, 4)), 1.0); }) == ErrorKind::shape_mismatch);
    CHECK(error_kind([&] { psnr(a, c, 0.0); }) == ErrorKind::invalid_argument);
}

TEST_CASE("radial power spectrum") {
    SUBCASE("constant image") {
        const LatentTensor x(planes_of(1, 8, 8), 2.0);
        const RadialProfile p = radial_power_spectrum(x);
        CHECK(p.power[0] == doctest::Approx(4.0 * 64.0));
        CHECK(p.counts[0] == 1);
        for (std::size_t i = 1; i < p.power.size(); ++i) CHECK(p.power[i] < 1e-20);
    }
    SUBCASE("horizontal cosine") {
        for (std::size_t k = 1; k <= 4; ++k) {
            LatentTensor x(planes_of(1, 8, 12));
            for (std::size_t r = 0; r < 8; ++r)
                for (std::size_t c = 0; c < 12; ++c)
                    x[r * 12 + c] = std::cos(2.0 * std::numbers::pi * static_cast<double>(k * c) / 12.0);
            const RadialProfile p = radial_power_spectrum(x);
            const auto peak = std::max_element(p.power.begin(), p.power.end()) - p.power.begin();
            CHECK(static_cast<std::size_t>(peak) == k);
        }
    }
    SUBCASE("Parseval") {
        for (auto [h, w] : {std::pair<std::size_t, std::size_t>{8, 8}, {5, 7}, {16, 9}, {1, 6}}) {
            const LatentTensor x = sample_noise(planes_of(1, h, w), RngStream{h, w});
            double energy = 0.0;
            for (double v : x.data()) energy += v * v;
            CHECK(radial_power_spectrum(x).total_energy() == doctest::Approx(energy).epsilon(1e-9));
        }
    }
    SUBCASE("smooth field decays with radius") {
        GaussianFieldModel field(0.0, 1.0, 0.1);
        field.prepare(16, 16);
        const LatentTensor pop = field.sample(planes_of(400, 16, 16), RngStream{3, 3});
        std::vector<double> mean_power;
        for (std::size_t s = 0; s < 400; ++s) {
            const RadialProfile p = radial_power_spectrum(pop.plane(s), 16, 16);
            if (mean_power.empty()) mean_power.assign(p.power.size(), 0.0);
            for (std::size_t i = 0; i < p.power.size(); ++i) mean_power[i] += p.power[i] / 400.0;
        }
        for (std::size_t i = 1; i + 1 <= 8; ++i) {
            CHECK(mean_power[i + 1] < mean_power[i]);
        }
    }
    CHECK(error_kind([] { radial_power_spectrum(LatentTensor(planes_of(2, 4, 4))); }) ==
          ErrorKind::invalid_argument);
}

TEST_CASE("convergence order") {
    CHECK(convergence_order({{64, 0.8}, {128, 0.4}, {256, 0.2}}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(convergence_order({{256, 0.2}, {64, 0.8}, {128, 0.4}}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(convergence_order({{10, 1.0}, {20, 0.25}}) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(error_kind([] { convergence_order({{64, 0.8}}); }) == ErrorKind::invalid_argument);
    CHECK(error_kind([] { convergence_order({{64, 0.8}, {128, 0.0}}); }) == ErrorKind::invalid_argument);
    CHECK(error_kind([] { convergence_order({{64, 0.8}, {100, 0.4}}); }) == ErrorKind::invalid_argument);

    GaussianFieldModel field(0.2, 1.0, 0.35);
    field.prepare(8, 8);
    const LatentTensor z = sample_noise(planes_of(10, 8, 8), RngStream{2, 2});
    const LatentTensor exact = field.exact_flow_endpoint(z);
    std::vector<std::pair<std::size_t, double>> errors;
    for (std::size_t n : {64u, 128u, 256u}) {
        const LatentTensor x = denoise_stage(z, field, stage_schedule(n, 1.0, 1.0));
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            num += (x[i] - exact[i]) * (x[i] - exact[i]);
            den += exact[i] * exact[i];
        }
        errors.emplace_back(n, std::sqrt(num / den));
    }
    const double order = convergence_order(errors);
    MESSAGE("Euler order " << order);
    CHECK(order >= 0.8);
    CHECK(order <= 1.2);
}
