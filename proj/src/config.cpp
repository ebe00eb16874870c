// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnsl/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bnsl/error.hpp"

namespace bnsl {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& message) {
    fail(ErrorKind::config, path + ": " + message);
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) {
        config_error(path.empty() ? "<root>" : path, "expected an object");
    }
    for (const auto& [key, value] : obj.items()) {
        if (allowed.count(key) == 0) {
            config_error(path.empty() ? key : path + "." + key, "unknown field");
        }
    }
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

double get_number(const json& obj, const std::string& path, const std::string& key,
                  double fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
        config_error(join(path, key), "expected a number");
    }
    return v.get<double>();
}

std::size_t to_count(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        config_error(path, "expected a non-negative integer");
    }
    return v.get<std::size_t>();
}

std::size_t get_count(const json& obj, const std::string& path, const std::string& key,
                      std::size_t fallback) {
    return obj.contains(key) ? to_count(obj.at(key), join(path, key)) : fallback;
}

bool get_bool(const json& obj, const std::string& path, const std::string& key, bool fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj.at(key).is_boolean()) {
        config_error(join(path, key), "expected true or false");
    }
    return obj.at(key).get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const std::string& key,
                       const std::string& fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj.at(key).is_string()) {
        config_error(join(path, key), "expected a string");
    }
    return obj.at(key).get<std::string>();
}

const json& get_array(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) {
        config_error(join(path, key), "missing required field");
    }
    const json& v = obj.at(key);
    if (!v.is_array() || v.empty()) {
        config_error(join(path, key), "expected a non-empty array");
    }
    return v;
}

PipelineConfig parse_pipeline(const json& obj, const std::string& path) {
    check_keys(obj, path,
               {"heights", "widths", "steps", "strengths", "shifts", "kernel", "lanczos_window",
                "bicubic_coefficient", "batch", "channels", "frames", "seed", "disable_reshift",
                "disable_noise_reintroduction"});
    const std::vector<std::string> arrays = {"heights", "widths", "steps", "strengths", "shifts"};
    std::size_t stages = 0;
    for (const auto& key : arrays) {
        stages = std::max(stages, get_array(obj, path, key).size());
    }
    for (const auto& key : arrays) {
        const std::size_t n = obj.at(key).size();
        if (n != stages) {
            config_error(join(path, key), "has " + std::to_string(n) + " entries but other " +
                                              "stage arrays have " + std::to_string(stages));
        }
    }

    PipelineConfig p;
    p.stages.resize(stages);
    for (std::size_t i = 0; i < stages; ++i) {
        const std::string idx = "[" + std::to_string(i) + "]";
        auto& s = p.stages[i];
        s.height = to_count(obj.at("heights")[i], join(path, "heights") + idx);
        s.width = to_count(obj.at("widths")[i], join(path, "widths") + idx);
        s.steps = to_count(obj.at("steps")[i], join(path, "steps") + idx);
        const json& w = obj.at("strengths")[i];
        const json& sh = obj.at("shifts")[i];
        if (!w.is_number()) config_error(join(path, "strengths") + idx, "expected a number");
        if (!sh.is_number()) config_error(join(path, "shifts") + idx, "expected a number");
        s.strength = w.get<double>();
        s.shift = sh.get<double>();
    }
    try {
        p.kernel.kind = parse_kernel_kind(get_string(obj, path, "kernel", "lanczos"));
    } catch (const Error& e) {
        config_error(join(path, "kernel"), e.what());
    }
    p.kernel.lanczos_window =
        static_cast<int>(get_count(obj, path, "lanczos_window", 3));
    p.kernel.bicubic_coefficient = get_number(obj, path, "bicubic_coefficient", -0.5);
    p.batch = get_count(obj, path, "batch", 1);
    p.channels = get_count(obj, path, "channels", 1);
    if (obj.contains("frames") && !obj.at("frames").is_null()) {
        p.frames = to_count(obj.at("frames"), join(path, "frames"));
    }
    if (obj.contains("seed")) {
        const json& seed = obj.at("seed");
        if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
            config_error(join(path, "seed"), "expected an unsigned 64-bit integer");
        }
        p.seed = seed.get<std::uint64_t>();
    }
    p.disable_reshift = get_bool(obj, path, "disable_reshift", false);
    p.disable_noise_reintroduction = get_bool(obj, path, "disable_noise_reintroduction", false);

    try {
        validate(p);
    } catch (const Error& e) {
        config_error(path, e.what());
    }
    return p;
}

ModelSpec parse_model(const json& obj, const std::string& path) {
    check_keys(obj, path, {"mean", "amplitude", "length_scale", "jitter", "mixture"});
    ModelSpec m;
    m.mean = get_number(obj, path, "mean", m.mean);
    m.amplitude = get_number(obj, path, "amplitude", m.amplitude);
    m.length_scale = get_number(obj, path, "length_scale", m.length_scale);
    if (obj.contains("jitter") && !obj.at("jitter").is_null()) {
        m.jitter = get_number(obj, path, "jitter", 0.0);
    }
    if (m.amplitude <= 0.0) config_error(join(path, "amplitude"), "must be positive");
    if (m.length_scale <= 0.0) config_error(join(path, "length_scale"), "must be positive");
    if (obj.contains("mixture")) {
        const json& mix = obj.at("mixture");
        if (!mix.is_array()) {
            config_error(join(path, "mixture"), "expected an array");
        }
        double total = 0.0;
        for (std::size_t i = 0; i < mix.size(); ++i) {
            const std::string cpath = join(path, "mixture") + "[" + std::to_string(i) + "]";
            check_keys(mix[i], cpath, {"weight", "mean", "amplitude", "length_scale"});
            MixtureComponentSpec c;
            c.weight = get_number(mix[i], cpath, "weight", c.weight);
            c.mean = get_number(mix[i], cpath, "mean", c.mean);
            c.amplitude = get_number(mix[i], cpath, "amplitude", c.amplitude);
            c.length_scale = get_number(mix[i], cpath, "length_scale", c.length_scale);
            if (c.weight <= 0.0) config_error(join(cpath, "weight"), "must be positive");
            total += c.weight;
            m.mixture.push_back(c);
        }
        if (!m.mixture.empty() && std::abs(total - 1.0) > 1e-9) {
            config_error(join(path, "mixture"), "weights must sum to 1");
        }
    }
    return m;
}

ArchSpec parse_arch(const json& obj, const std::string& path) {
    check_keys(obj, path,
               {"hidden_dim", "num_heads", "num_layers", "vae_ratio", "patch_size", "text_tokens",
                "temporal_ratio"});
    ArchSpec a;
    a.hidden_dim = get_count(obj, path, "hidden_dim", a.hidden_dim);
    a.num_heads = get_count(obj, path, "num_heads", a.num_heads);
    a.num_layers = get_count(obj, path, "num_layers", a.num_layers);
    a.vae_ratio = get_count(obj, path, "vae_ratio", a.vae_ratio);
    a.patch_size = get_count(obj, path, "patch_size", a.patch_size);
    a.text_tokens = get_count(obj, path, "text_tokens", a.text_tokens);
    a.temporal_ratio = get_count(obj, path, "temporal_ratio", a.temporal_ratio);
    try {
        validate(a);
    } catch (const Error& e) {
        config_error(path, e.what());
    }
    return a;
}

PipelineConfig make_pipeline(std::vector<StageConfig> stages, std::size_t batch) {
    PipelineConfig p;
    p.stages = std::move(stages);
    p.batch = batch;
    p.seed = 42;
    return p;
}

}  // namespace

json to_json(const ExperimentConfig& c) {
    json pipeline;
    for (const auto& s : c.pipeline.stages) {
        pipeline["heights"].push_back(s.height);
        pipeline["widths"].push_back(s.width);
        pipeline["steps"].push_back(s.steps);
        pipeline["strengths"].push_back(s.strength);
        pipeline["shifts"].push_back(s.shift);
    }
    pipeline["kernel"] = to_string(c.pipeline.kernel.kind);
    pipeline["lanczos_window"] = c.pipeline.kernel.lanczos_window;
    pipeline["bicubic_coefficient"] = c.pipeline.kernel.bicubic_coefficient;
    pipeline["batch"] = c.pipeline.batch;
    pipeline["channels"] = c.pipeline.channels;
    pipeline["frames"] = c.pipeline.frames ? json(*c.pipeline.frames) : json(nullptr);
    pipeline["seed"] = c.pipeline.seed;
    pipeline["disable_reshift"] = c.pipeline.disable_reshift;
    pipeline["disable_noise_reintroduction"] = c.pipeline.disable_noise_reintroduction;

    json model = {{"mean", c.model.mean},
                  {"amplitude", c.model.amplitude},
                  {"length_scale", c.model.length_scale}};
    if (c.model.jitter) {
        model["jitter"] = *c.model.jitter;
    }
    if (!c.model.mixture.empty()) {
        model["mixture"] = json::array();
        for (const auto& m : c.model.mixture) {
            model["mixture"].push_back({{"weight", m.weight},
                                        {"mean", m.mean},
                                        {"amplitude", m.amplitude},
                                        {"length_scale", m.length_scale}});
        }
    }

    json arch = {{"hidden_dim", c.arch.hidden_dim},   {"num_heads", c.arch.num_heads},
                 {"num_layers", c.arch.num_layers},   {"vae_ratio", c.arch.vae_ratio},
                 {"patch_size", c.arch.patch_size},   {"text_tokens", c.arch.text_tokens},
                 {"temporal_ratio", c.arch.temporal_ratio}};

    json out = {{"name", c.name},         {"pipeline", pipeline},
                {"model", model},         {"arch", arch},
                {"runs", c.runs},         {"output_dir", c.output_dir},
                {"psnr_range", c.psnr_range}};
    out["baseline"] = c.baseline ? json(*c.baseline) : json(nullptr);
    return out;
}

ExperimentConfig parse_config(const json& doc) {
    check_keys(doc, "",
               {"name", "pipeline", "model", "arch", "runs", "output_dir", "baseline",
                "psnr_range"});
    ExperimentConfig c;
    c.name = get_string(doc, "", "name", c.name);
    if (!doc.contains("pipeline")) {
        config_error("pipeline", "missing required field");
    }
    c.pipeline = parse_pipeline(doc.at("pipeline"), "pipeline");
    if (doc.contains("model")) {
        c.model = parse_model(doc.at("model"), "model");
    }
    if (doc.contains("arch")) {
        c.arch = parse_arch(doc.at("arch"), "arch");
    }
    c.runs = get_count(doc, "", "runs", c.runs);
    if (c.runs < 1) {
        config_error("runs", "must be >= 1");
    }
    c.output_dir = get_string(doc, "", "output_dir", c.output_dir);
    if (doc.contains("baseline") && !doc.at("baseline").is_null()) {
        c.baseline = get_string(doc, "", "baseline", "");
    }
    c.psnr_range = get_number(doc, "", "psnr_range", c.psnr_range);
    if (c.psnr_range <= 0.0) {
        config_error("psnr_range", "must be positive");
    }
    return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::config, std::string("malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    require(static_cast<bool>(is), ErrorKind::config, "cannot open config file " + path);
    std::stringstream buffer;
    buffer << is.rdbuf();
    return parse_config_text(buffer.str());
}

std::vector<std::string> preset_names() {
    return {"flux-baseline", "flux-x3",       "hunyuan-baseline",
            "hunyuan-x2.5",  "desk-baseline", "paper-x3-desk"};
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    c.name = name;
    if (name == "flux-baseline") {
        c.pipeline = make_pipeline({{1024, 1024, 50, 1.0, 3.0}}, 1);
        c.arch = flux_arch();
    } else if (name == "flux-x3") {
        c.pipeline = make_pipeline({{1024, 1024, 6, 1.0, 9.0},
                                    {512, 512, 20, 0.8, 6.0},
                                    {1024, 1024, 8, 0.6, 9.0}},
                                   1);
        c.arch = flux_arch();
        c.baseline = "flux-baseline";
    } else if (name == "hunyuan-baseline") {
        c.pipeline = make_pipeline({{720, 1280, 50, 1.0, 7.0}}, 1);
        c.pipeline.frames = 129;
        c.arch = hunyuan_arch();
    } else if (name == "hunyuan-x2.5") {
        c.pipeline = make_pipeline({{720, 1280, 4, 1.0, 7.0},
                                    {544, 960, 24, 0.8, 9.0},
                                    {720, 1280, 16, 0.7, 9.0}},
                                   1);
        c.pipeline.frames = 129;
        c.arch = hunyuan_arch();
        c.baseline = "hunyuan-baseline";
    } else if (name == "desk-baseline") {
        // Standard sampling with as many evaluations as paper-x3-desk runs.
        c.pipeline = make_pipeline({{32, 32, 27, 1.0, 3.0}}, 2000);
        c.arch = desk_arch();
    } else if (name == "paper-x3-desk") {
        c.pipeline = make_pipeline({{32, 32, 6, 1.0, 9.0},
                                    {16, 16, 20, 0.8, 6.0},
                                    {32, 32, 8, 0.6, 9.0}},
                                   2000);
        c.arch = desk_arch();
        c.baseline = "desk-baseline";
    } else {
        std::string known;
        for (const auto& n : preset_names()) {
            known += (known.empty() ? "" : ", ") + n;
        }
        fail(ErrorKind::config, "unknown preset '" + name + "' (known: " + known + ")");
    }
    return c;
}

FieldModel::FieldModel(const ModelSpec& spec) {
    if (spec.mixture.empty()) {
        m_gaussian.emplace(spec.mean, spec.amplitude, spec.length_scale, spec.jitter);
        return;
    }
    std::vector<GaussianFieldModel> components;
    std::vector<double> weights;
    for (const auto& c : spec.mixture) {
        components.emplace_back(c.mean, c.amplitude, c.length_scale, spec.jitter);
        weights.push_back(c.weight);
    }
    m_mixture.emplace(std::move(components), std::move(weights));
}

void FieldModel::prepare(std::size_t height, std::size_t width) {
    if (m_gaussian) {
        m_gaussian->prepare(height, width);
    } else {
        m_mixture->prepare(height, width);
    }
}

void FieldModel::prepare_for(const PipelineConfig& pipeline) {
    for (const auto& s : pipeline.stages) {
        prepare(s.height, s.width);
    }
}

const VelocityField& FieldModel::field() const {
    if (m_gaussian) {
        return *m_gaussian;
    }
    return *m_mixture;
}

const GaussianFieldModel* FieldModel::gaussian() const {
    return m_gaussian ? &*m_gaussian : nullptr;
}

}  // namespace bnsl
