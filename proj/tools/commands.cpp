// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "bnsl/error.hpp"
#include "bnsl/metrics.hpp"
#include "bnsl/schedule.hpp"
#include "bnsl/tensor_io.hpp"
#include "bnsl/velocity.hpp"

namespace bnsl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_g(double v, int digits = 9) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) {
    return v ? fmt_g(*v) : "";
}

double per_eval_flops(std::size_t h, std::size_t w, const PipelineConfig& p, const ArchSpec& arch) {
    return static_cast<double>(arch.num_layers) *
           attention_flops_per_layer(sequence_length(h, w, arch, p.frames), arch).simplified;
}

std::size_t rounded_steps(double value) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(value)));
}

// Options shared by every subcommand that reads an experiment.
struct CommonOptions {
    std::string config_path;
    std::string preset_name;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "Experiment config (JSON)");
        app->add_option("--preset", preset_name, "Named preset");
        app->add_option("--out", out_dir, "Output directory");
        app->add_option("--seed", seed, "Base seed (u64)");
        app->add_option("--runs", runs, "Number of seeded runs")->check(CLI::PositiveNumber);
    }

    ExperimentConfig load() const {
        if (!config_path.empty() && !preset_name.empty()) {
            fail(ErrorKind::config, "pass either --config or --preset, not both");
        }
        if (config_path.empty() && preset_name.empty()) {
            fail(ErrorKind::config, "one of --config or --preset is required");
        }
        ExperimentConfig c = config_path.empty() ? preset(preset_name) : load_config(config_path);
        if (seed) c.pipeline.seed = *seed;
        if (runs) c.runs = *runs;
        if (!out_dir.empty()) c.output_dir = out_dir;
        return c;
    }
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), ErrorKind::io, "cannot open " + path.string());
    os << text;
    require(static_cast<bool>(os), ErrorKind::io, "failed writing " + path.string());
}

template <typename Fn>
void parallel_for(std::size_t jobs, Fn&& fn) {
    const std::size_t workers = worker_count(jobs);
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < jobs; i = next++) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

json run_manifest(const ExperimentConfig& cfg, const PipelineConfig& pipeline, std::size_t run,
                  const RunResult& result, const CostReport& cost, const json& previews) {
    json stages = json::array();
    for (const auto& s : result.log) {
        stages.push_back({{"stage", s.stage},
                          {"height", s.height},
                          {"width", s.width},
                          {"evaluations", s.evaluations},
                          {"start_sigma", s.start_sigma},
                          {"shift", s.shift},
                          {"noise_stream", s.noise_stream}});
    }
    ExperimentConfig echo = cfg;
    echo.pipeline = pipeline;
    return {{"config", to_json(echo)},
            {"seed", result.seed},
            {"run_index", run},
            {"run_stream", result.run_stream},
            {"stages", stages},
            {"total_evaluations", result.total_evaluations()},
            {"attention_flops_T", cost.total_flops / 1e12},
            {"tensor_format", "BNSL-TENSOR f32 little-endian"},
            {"previews", previews}};
}

int cmd_sample(const CommonOptions& opts, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = opts.load();
    validate(cfg.pipeline);
    if (cfg.pipeline.stages.size() > 1 && !is_bottleneck_shaped(cfg.pipeline)) {
        err << "warning: stage resolutions are monotone; this is not a high-low-high schedule\n";
    }
    FieldModel model(cfg.model);
    model.prepare_for(cfg.pipeline);
    std::optional<PipelineConfig> baseline;
    if (cfg.baseline) {
        baseline = baseline_pipeline(cfg);
        model.prepare_for(*baseline);
    }
    const CostReport cost = pipeline_flops(cfg.pipeline, cfg.arch, cfg.name);
    const fs::path root(cfg.output_dir);
    fs::create_directories(root);

    std::vector<MetricsRow> rows(cfg.runs);
    parallel_for(cfg.runs, [&](std::size_t r) {
        PipelineConfig p = cfg.pipeline;
        p.seed = cfg.pipeline.seed + r;
        const RunResult result = bottleneck_sample(p, model.field());
        const fs::path dir = root / ("run" + std::to_string(r) + "_seed" + std::to_string(p.seed));
        fs::create_directories(dir);
        write_tensor(dir / "final.bnt", result.final_latent);
        for (std::size_t i = 0; i < result.stage_latents.size(); ++i) {
            write_tensor(dir / ("stage" + std::to_string(i) + ".bnt"), result.stage_latents[i]);
        }
        json previews = json::array();
        const Shape& shape = result.final_latent.shape();
        for (std::size_t c = 0; c < shape.channels; ++c) {
            // First sample, first frame of each channel.
            const std::size_t plane = c * shape.frame_count();
            const std::string name = "preview_c" + std::to_string(c) + ".pgm";
            const auto [lo, hi] = write_pgm(dir / name, result.final_latent, plane);
            previews.push_back({{"file", name}, {"channel", c}, {"min", lo}, {"max", hi}});
        }
        write_text(dir / "manifest.json",
                   run_manifest(cfg, p, r, result, cost, previews).dump(2) + "\n");

        MetricsRow row;
        row.method = cfg.name;
        row.seed = p.seed;
        row.flops_T = cost.total_flops / 1e12;
        if (model.gaussian() != nullptr && shape.batch >= 2) {
            const MomentErrors m = moment_errors(result.final_latent, *model.gaussian());
            row.mean_err = m.mean_error;
            row.cov_err = m.covariance_error;
        }
        if (baseline) {
            PipelineConfig b = *baseline;
            b.seed = p.seed;
            const RunResult base = standard_sample(b, model.field());
            row.psnr_vs_baseline = psnr(result.final_latent, base.final_latent, cfg.psnr_range);
        }
        rows[r] = row;
    });

    std::string csv = metrics_csv_header();
    for (const auto& row : rows) {
        csv += metrics_csv_row(row);
        out << "run seed=" << row.seed << " cov_err=" << fmt_opt(row.cov_err)
            << " psnr_vs_baseline=" << fmt_opt(row.psnr_vs_baseline) << "\n";
    }
    write_text(root / "metrics.csv", csv);
    out << "wrote " << cfg.runs << " run(s) to " << root.string() << "\n";
    return kExitOk;
}

int cmd_ablate(const CommonOptions& opts, const std::vector<std::string>& mode_names,
               std::ostream& out) {
    const ExperimentConfig cfg = opts.load();
    std::vector<AblationMode> modes;
    if (mode_names.empty() ||
        (mode_names.size() == 1 && mode_names.front() == "all")) {
        modes = all_ablation_modes();
    } else {
        for (const auto& n : mode_names) modes.push_back(parse_ablation_mode(n));
    }

    FieldModel model(cfg.model);
    std::vector<PipelineConfig> pipelines;
    std::vector<double> flops;
    for (AblationMode m : modes) {
        pipelines.push_back(ablation_pipeline(cfg, m));
        model.prepare_for(pipelines.back());
        flops.push_back(pipeline_flops(pipelines.back(), cfg.arch).total_flops / 1e12);
    }
    const PipelineConfig reference = baseline_pipeline(cfg);
    model.prepare_for(reference);

    std::vector<std::vector<MetricsRow>> per_seed(cfg.runs);
    parallel_for(cfg.runs, [&](std::size_t r) {
        const std::uint64_t seed = cfg.pipeline.seed + r;
        PipelineConfig ref = reference;
        ref.seed = seed;
        const RunResult base = standard_sample(ref, model.field());
        for (std::size_t k = 0; k < modes.size(); ++k) {
            PipelineConfig p = pipelines[k];
            p.seed = seed;
            const RunResult result = p.stages.size() == 1 ? standard_sample(p, model.field())
                                                          : bottleneck_sample(p, model.field());
            MetricsRow row;
            row.method = to_string(modes[k]);
            row.seed = seed;
            row.flops_T = flops[k];
            if (model.gaussian() != nullptr && result.final_latent.shape().batch >= 2) {
                const MomentErrors m = moment_errors(result.final_latent, *model.gaussian());
                row.mean_err = m.mean_error;
                row.cov_err = m.covariance_error;
            }
            if (result.final_latent.shape() == base.final_latent.shape()) {
                row.psnr_vs_baseline = psnr(result.final_latent, base.final_latent, cfg.psnr_range);
            }
            per_seed[r].push_back(row);
        }
    });

    std::string csv = metrics_csv_header();
    for (const auto& rows : per_seed) {
        for (const auto& row : rows) csv += metrics_csv_row(row);
    }
    if (!opts.out_dir.empty()) {
        fs::create_directories(opts.out_dir);
        write_text(fs::path(opts.out_dir) / "ablation.csv", csv);
    }
    out << csv;
    return kExitOk;
}

int cmd_cost(const CommonOptions& opts, const std::string& baseline_name, std::ostream& out) {
    const ExperimentConfig cfg = opts.load();
    std::vector<CostReport> reports;
    std::optional<PipelineConfig> baseline;
    std::string label;
    if (!baseline_name.empty()) {
        baseline = preset(baseline_name).pipeline;
        label = baseline_name;
    } else if (cfg.baseline) {
        baseline = preset(*cfg.baseline).pipeline;
        label = *cfg.baseline;
    }
    if (baseline) {
        reports.push_back(pipeline_flops(*baseline, cfg.arch, *baseline, label));
        reports.push_back(pipeline_flops(cfg.pipeline, cfg.arch, *baseline, cfg.name));
    } else {
        reports.push_back(pipeline_flops(cfg.pipeline, cfg.arch, cfg.name));
    }

    out << "attention FLOPs (D=" << cfg.arch.hidden_dim << ", layers=" << cfg.arch.num_layers
        << ", text tokens=" << cfg.arch.text_tokens << ")\n";
    out << std::left << std::setw(20) << "method" << std::right << std::setw(8) << "evals"
        << std::setw(14) << "flops_T" << std::setw(10) << "speedup" << "\n";
    std::string csv = "method,flops_T,speedup\n";
    for (const auto& r : reports) {
        std::size_t evals = 0;
        for (const auto& s : r.stages) evals += s.steps;
        const auto speed = r.speedup();
        out << std::left << std::setw(20) << r.method << std::right << std::setw(8) << evals
            << std::setw(14) << fmt_fixed(r.total_flops / 1e12, 2) << std::setw(10)
            << (speed ? fmt_fixed(*speed, 2) + "x" : std::string("-")) << "\n";
        csv += r.method + "," + fmt_g(r.total_flops / 1e12) + "," + (speed ? fmt_g(*speed) : "") +
               "\n";
    }
    out << "\n" << csv;
    if (!opts.out_dir.empty()) {
        fs::create_directories(opts.out_dir);
        write_text(fs::path(opts.out_dir) / "cost.csv", csv);
    }
    return kExitOk;
}

int cmd_schedule(const std::vector<double>& shifts, std::size_t steps, const std::string& out_path,
                 std::ostream& out) {
    std::vector<SigmaSchedule> schedules;
    const SigmaSchedule base = build_base_sigmas(steps);
    for (double s : shifts) schedules.push_back(shift_schedule(base, s));
    const std::string csv = export_schedule_csv(schedules);
    if (out_path.empty()) {
        out << csv;
    } else {
        const fs::path path(out_path);
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        write_text(path, csv);
        out << "wrote " << path.string() << "\n";
    }
    return kExitOk;
}

int cmd_verify(double perturb, std::uint64_t seed, const std::string& out_dir, std::ostream& out) {
    const auto checks = run_oracle_checks(perturb, seed);
    std::ostringstream report;
    bool ok = true;
    for (const auto& c : checks) {
        ok = ok && c.passed;
        report << (c.passed ? "PASS " : "FAIL ") << c.name << " measured=" << fmt_g(c.measured, 6)
               << " threshold=" << fmt_g(c.threshold, 6) << " " << c.detail << "\n";
    }
    report << (ok ? "all checks passed" : "verification FAILED") << "\n";
    out << report.str();
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text(fs::path(out_dir) / "verify.txt", report.str());
    }
    return ok ? kExitOk : kExitFailed;
}

}  // namespace

std::vector<AblationMode> all_ablation_modes() {
    return {AblationMode::standard,      AblationMode::bottleneck, AblationMode::cascaded,
            AblationMode::reduced_steps, AblationMode::no_reshift, AblationMode::no_noise_reintro};
}

AblationMode parse_ablation_mode(const std::string& name) {
    for (AblationMode m : all_ablation_modes()) {
        if (to_string(m) == name) return m;
    }
    fail(ErrorKind::config,
         "unknown ablation mode '" + name +
             "' (expected standard|bottleneck|cascaded|reduced-steps|no-reshift|no-noise-reintro)");
}

std::string to_string(AblationMode mode) {
    switch (mode) {
    case AblationMode::standard: return "standard";
    case AblationMode::bottleneck: return "bottleneck";
    case AblationMode::cascaded: return "cascaded";
    case AblationMode::reduced_steps: return "reduced-steps";
    case AblationMode::no_reshift: return "no-reshift";
    case AblationMode::no_noise_reintro: return "no-noise-reintro";
    }
    return "bottleneck";
}

PipelineConfig baseline_pipeline(const ExperimentConfig& config) {
    const PipelineConfig& target = config.pipeline;
    PipelineConfig p;
    if (config.baseline) {
        p = preset(*config.baseline).pipeline;
    } else {
        std::size_t evals = 0;
        for (std::size_t i = 0; i < target.stages.size(); ++i) {
            evals += stage_schedule_for(target, i).steps_to_run();
        }
        const StageConfig& last = target.stages.back();
        p.stages = {{last.height, last.width, evals, 1.0, target.stages.front().shift}};
    }
    p.seed = target.seed;
    p.batch = target.batch;
    p.channels = target.channels;
    p.frames = target.frames;
    p.kernel = target.kernel;
    p.disable_reshift = false;
    p.disable_noise_reintroduction = false;
    return p;
}

PipelineConfig ablation_pipeline(const ExperimentConfig& config, AblationMode mode) {
    PipelineConfig p = config.pipeline;
    validate(p);
    switch (mode) {
    case AblationMode::standard:
        return baseline_pipeline(config);
    case AblationMode::bottleneck:
        return p;
    case AblationMode::no_reshift:
        p.disable_reshift = true;
        return p;
    case AblationMode::no_noise_reintro:
        p.disable_noise_reintroduction = true;
        return p;
    case AblationMode::cascaded: {
        std::size_t low = 0;
        for (std::size_t i = 1; i < p.stages.size(); ++i) {
            if (p.stages[i].height * p.stages[i].width <
                p.stages[low].height * p.stages[low].width) {
                low = i;
            }
        }
        double budget = 0.0;
        for (std::size_t i = 0; i <= low; ++i) {
            budget += static_cast<double>(stage_schedule_for(p, i).steps_to_run()) *
                      per_eval_flops(p.stages[i].height, p.stages[i].width, p, config.arch);
        }
        StageConfig first = p.stages[low];
        first.strength = 1.0;
        first.steps = rounded_steps(
            budget / per_eval_flops(first.height, first.width, p, config.arch));
        std::vector<StageConfig> stages = {first};
        stages.insert(stages.end(), p.stages.begin() + static_cast<long>(low) + 1, p.stages.end());
        p.stages = std::move(stages);
        return p;
    }
    case AblationMode::reduced_steps: {
        PipelineConfig b = baseline_pipeline(config);
        const double total = pipeline_flops(p, config.arch).total_flops;
        const StageConfig& s = b.stages.front();
        b.stages.front().steps =
            rounded_steps(total / per_eval_flops(s.height, s.width, b, config.arch));
        return b;
    }
    }
    return p;
}

std::string metrics_csv_header() {
    return "method,seed,mean_err,cov_err,psnr_vs_baseline,flops_T\n";
}

std::string metrics_csv_row(const MetricsRow& row) {
    return row.method + "," + std::to_string(row.seed) + "," + fmt_opt(row.mean_err) + "," +
           fmt_opt(row.cov_err) + "," + fmt_opt(row.psnr_vs_baseline) + "," + fmt_g(row.flops_T) +
           "\n";
}

std::vector<CheckResult> run_oracle_checks(double velocity_scale, std::uint64_t seed) {
    std::vector<CheckResult> checks;
    const RngStream root{seed, 0};

    {
        // 1-D target N(2, 0.25) against kernel regression on simulated pairs.
        GaussianFieldModel model(2.0, 0.5, 1.0);
        model.prepare(1, 1);
        const ScaledVelocity field(model, velocity_scale);
        double worst = 0.0;
        for (std::size_t i = 0; i < 20; ++i) {
            const double sigma = 0.1 * static_cast<double>(1 + i % 9);
            const double spread = std::sqrt((1 - sigma) * (1 - sigma) * 0.25 + sigma * sigma);
            const double x = (1 - sigma) * 2.0 + spread * (-1.5 + 3.0 * static_cast<double>(i) / 19.0);
            const LatentTensor probe(Shape{}, std::vector<double>{x});
            const double analytic = field.velocity(probe, sigma)[0];
            const auto mc = mc_velocity_oracle(model, 1, 1, probe.data(), sigma, 200000, 0.02,
                                               root.derive(100 + i));
            worst = std::max(worst, std::abs(analytic - mc.estimate[0]) / mc.standard_error[0]);
        }
        checks.push_back({"mc_velocity_1d", worst <= 3.0, worst, 3.0,
                          "max |analytic - mc| / s.e. over 20 probes"});
    }

    GaussianFieldModel field16(0.0, 1.0, 0.35);
    field16.prepare(16, 16);
    const ScaledVelocity scaled16(field16, velocity_scale);
    Shape shape;
    shape.batch = 20;
    shape.height = 16;
    shape.width = 16;
    const LatentTensor z = sample_noise(shape, root.derive(200));
    const LatentTensor exact = field16.exact_flow_endpoint(z);
    auto endpoint_error = [&](std::size_t steps) {
        const LatentTensor x = denoise_stage(z, scaled16, stage_schedule(steps, 1.0, 1.0));
        double worst = 0.0;
        for (std::size_t p = 0; p < shape.planes(); ++p) {
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < shape.plane_size(); ++i) {
                const double d = x.plane(p)[i] - exact.plane(p)[i];
                num += d * d;
                den += exact.plane(p)[i] * exact.plane(p)[i];
            }
            worst = std::max(worst, std::sqrt(num / den));
        }
        return worst;
    };

    const double endpoint = endpoint_error(2048);
    checks.push_back({"endpoint_16x16", endpoint <= 1e-2, endpoint, 1e-2,
                      "max relative l2 error of 2048-step Euler vs exact flow, 20 samples"});

    std::vector<std::pair<std::size_t, double>> errs;
    for (std::size_t n : {64, 128, 256}) errs.emplace_back(n, endpoint_error(n));
    const double order = convergence_order(errs);
    checks.push_back({"euler_order", order >= 0.8 && order <= 1.2, order, 1.0,
                      "observed order over N = 64, 128, 256 (accepted range [0.8, 1.2])"});
    return checks;
}

std::size_t worker_count(std::size_t jobs) {
    std::size_t limit = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BNSL_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) limit = static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::min(limit, jobs));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bottleneck sampling toolkit"};
    app.require_subcommand(1);

    CommonOptions sample_opts, ablate_opts, cost_opts;
    auto* sample = app.add_subcommand("sample", "Run a pipeline and write tensors and metrics");
    sample_opts.attach(sample);

    auto* ablate = app.add_subcommand("ablate", "Compare pipeline variants over several seeds");
    ablate_opts.attach(ablate);
    std::vector<std::string> modes;
    ablate->add_option("--modes", modes, "Modes (comma separated) or 'all'")->delimiter(',');

    auto* cost = app.add_subcommand("cost", "Attention FLOPs table");
    cost_opts.attach(cost);
    std::string cost_baseline;
    cost->add_option("--baseline", cost_baseline, "Preset to compare against");

    auto* schedule = app.add_subcommand("schedule", "Export shifted sigma schedules as CSV");
    std::vector<double> shifts = {1.0, 3.0, 5.0, 7.0};
    std::size_t steps = 50;
    std::string schedule_out;
    schedule->add_option("--shifts", shifts, "Shift factors")->delimiter(',');
    schedule->add_option("--steps", steps, "Number of steps N")->check(CLI::PositiveNumber);
    schedule->add_option("--out", schedule_out, "Output CSV path (stdout if omitted)");

    auto* verify = app.add_subcommand("verify", "Run the oracle suite");
    std::string verify_out;
    std::uint64_t verify_seed = 42;
    double perturb = 1.0;
    verify->add_option("--out", verify_out, "Directory for verify.txt");
    verify->add_option("--seed", verify_seed, "Seed for the oracle draws");
    verify->add_option("--perturb-velocity", perturb, "Scale the velocity under test")
        ->group("");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*sample) return cmd_sample(sample_opts, out, err);
        if (*ablate) return cmd_ablate(ablate_opts, modes, out);
        if (*cost) return cmd_cost(cost_opts, cost_baseline, out);
        if (*schedule) return cmd_schedule(shifts, steps, schedule_out, out);
        if (*verify) return cmd_verify(perturb, verify_seed, verify_out, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        switch (e.kind()) {
        case ErrorKind::io:
        case ErrorKind::not_cached:
        case ErrorKind::shape_mismatch:
            return kExitFailed;
        default:
            return kExitUsage;
        }
    } catch (const std::exception& e) {
        err << "fatal: " << e.what() << "\n";
        return kExitFailed;
    }
    return kExitUsage;
}

}  // namespace bnsl::cli
