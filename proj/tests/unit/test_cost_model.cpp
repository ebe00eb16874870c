// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "bnsl/config.hpp"
#include "bnsl/cost_model.hpp"

using namespace bnsl;
using bnsl::testing::error_kind;

namespace {

double simplified(double s, double d) { return 24.0 * s * d * d + 4.0 * s * s * d; }

ArchSpec no_text(ArchSpec a) {
    a.text_tokens = 0;
    return a;
}

PipelineConfig one_stage(std::size_t h, std::size_t w, std::size_t steps) {
    PipelineConfig c;
    c.stages = {StageConfig{h, w, steps, 1.0, 3.0}};
    return c;
}

}  // namespace

TEST_CASE("sequence length") {
    CHECK(sequence_length(1024, 1024, no_text(flux_arch())) == 4096);
    CHECK(sequence_length(512, 512, flux_arch()) == 1536);
    CHECK(sequence_length(1024, 512, flux_arch()) == 2048 + 512);
    CHECK(error_kind([] { sequence_length(1000, 1000, flux_arch()); }) == ErrorKind::invalid_argument);
    // 129 frames at 4x temporal compression -> 33 latent frames.
    CHECK(sequence_length(720, 1280, hunyuan_arch(), 129) == 45u * 80u * 33u + 256u);
    CHECK(sequence_length(32, 32, desk_arch()) == 1024);
}

TEST_CASE("per-layer attention FLOPs") {
    const ArchSpec flux = flux_arch();
    CHECK(attention_flops_per_layer(4608, flux).simplified == doctest::Approx(1.3046e12).epsilon(1e-4));
    CHECK(attention_flops_per_layer(1536, flux).simplified == doctest::Approx(3.7688e11).epsilon(1e-4));
    CHECK(attention_flops_per_layer(4608, flux).simplified == simplified(4608, 3072));

    ArchSpec unit;
    unit.hidden_dim = 1;
    unit.num_heads = 1;
    CHECK(attention_flops_per_layer(1, unit).simplified == 28.0);
    CHECK(attention_flops_per_layer(1, unit).exact == 30.0);

    for (std::uint64_t s = 1; s <= 8192; s = s * 3 + 1) {
        const AttentionFlops f = attention_flops_per_layer(s, flux);
        const double sd = static_cast<double>(s);
        CHECK(f.exact == doctest::Approx(6 * sd * 3072.0 * 3072 + 4 * sd * sd * 3072 + 2 * sd * sd * 24 +
                                         2 * sd * 3072.0 * 3072 + 16 * sd * 3072.0 * 3072)
                             .epsilon(1e-15));
        CHECK(f.simplified <= f.exact);
        CHECK((f.exact - f.simplified) / f.exact <= 0.002);
    }
}

TEST_CASE("pipeline totals against the published table") {
    const ExperimentConfig base = preset("flux-baseline");
    const CostReport b = pipeline_flops(base.pipeline, base.arch, "standard");
    CHECK(b.total_flops == doctest::Approx(50.0 * 57.0 * simplified(4608, 3072)).epsilon(1e-12));
    MESSAGE("flux baseline " << b.total_flops / 1e12 << " T");
    CHECK(std::abs(b.total_flops / 1e12 - 3719.50) / 3719.50 <= 0.001);

    const ExperimentConfig x3 = preset("flux-x3");
    const CostReport r = pipeline_flops(x3.pipeline, x3.arch, base.pipeline, "bottleneck");
    const double expected = 57.0 * (11.0 * simplified(4608, 3072) + 16.0 * simplified(1536, 3072));
    CHECK(r.total_flops == doctest::Approx(expected).epsilon(1e-12));
    MESSAGE("flux x3 " << r.total_flops / 1e12 << " T, speedup " << *r.speedup());
    CHECK(std::abs(r.total_flops / 1e12 - 1234.39) / 1234.39 <= 0.10);
    REQUIRE(r.speedup());
    CHECK(*r.speedup() == doctest::Approx(b.total_flops / r.total_flops));
    REQUIRE(r.stages.size() == 3);
    CHECK(r.stages[0].steps == 6);
    CHECK(r.stages[1].steps == 16);
    CHECK(r.stages[2].steps == 5);
    CHECK_FALSE(b.speedup());

    PipelineConfig empty;
    CHECK(error_kind([&] { pipeline_flops(empty, flux_arch()); }) == ErrorKind::config);
}

TEST_CASE("resolution speedup") {
    CHECK(resolution_speedup(1024, 1024, 1024, 1024, flux_arch()) == 1.0);
    CHECK(resolution_speedup(1024, 1024, 512, 512, no_text(flux_arch())) == doctest::Approx(4.63).epsilon(0.002));
    CHECK(resolution_speedup(1024, 1024, 512, 512, flux_arch()) == doctest::Approx(3.46).epsilon(0.002));
}

TEST_CASE("desk preset halves the attention cost") {
    const ExperimentConfig base = preset("desk-baseline");
    const ExperimentConfig x3 = preset("paper-x3-desk");
    const CostReport r = pipeline_flops(x3.pipeline, x3.arch, base.pipeline);
    MESSAGE("desk speedup " << *r.speedup());
    CHECK(*r.speedup() >= 2.0);
}

TEST_CASE("property: additive, linear and monotone") {
    std::mt19937_64 gen(17);
    std::uniform_int_distribution<std::size_t> tiles(1, 8), steps(1, 30), layers(1, 60), stages(1, 4);
    for (int trial = 0; trial < 100; ++trial) {
        ArchSpec arch = flux_arch();
        arch.num_layers = layers(gen);
        PipelineConfig c;
        const std::size_t k = stages(gen);
        for (std::size_t i = 0; i < k; ++i) {
            c.stages.push_back(StageConfig{16 * tiles(gen), 16 * tiles(gen), steps(gen), i == 0 ? 1.0 : 0.5, 3.0});
        }
        const CostReport all = pipeline_flops(c, arch);
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            PipelineConfig alone;
            alone.stages = {c.stages[i]};
            alone.stages[0].strength = 1.0;
            const double single = pipeline_flops(alone, arch).total_flops;
            const double per_eval = single / static_cast<double>(c.stages[i].steps);
            CHECK(all.stages[i].flops == doctest::Approx(per_eval * static_cast<double>(all.stages[i].steps)).epsilon(1e-12));
            sum += all.stages[i].flops;
        }
        CHECK(all.total_flops == doctest::Approx(sum).epsilon(1e-12));

        ArchSpec doubled = arch;
        doubled.num_layers *= 2;
        CHECK(pipeline_flops(c, doubled).total_flops == doctest::Approx(2.0 * all.total_flops).epsilon(1e-12));

        PipelineConfig bigger = c;
        bigger.stages[0].height += 16;
        CHECK(pipeline_flops(bigger, arch).total_flops >= all.total_flops);
        PipelineConfig longer = c;
        longer.stages[0].steps += 1;
        CHECK(pipeline_flops(longer, arch).total_flops >= all.total_flops);
        ArchSpec wider = arch;
        wider.hidden_dim += 64;
        CHECK(pipeline_flops(c, wider).total_flops >= all.total_flops);
    }
}

TEST_CASE("arch validation") {
    ArchSpec a = flux_arch();
    a.hidden_dim = 0;
    CHECK(error_kind([&] { validate(a); }) == ErrorKind::config);
    CHECK(error_kind([] { pipeline_flops(one_stage(100, 100, 3), flux_arch()); }) == ErrorKind::invalid_argument);
}
