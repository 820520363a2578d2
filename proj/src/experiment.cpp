#include "sqhn/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "sqhn/checkpoint.hpp"
#include "sqhn/inference.hpp"
#include "sqhn/metrics.hpp"
#include "sqhn/recognition.hpp"

namespace sqhn {

using nlohmann::json;

Task task_from_string(const std::string& name) {
    if (name == "assoc-auto") return Task::AssocAuto;
    if (name == "assoc-hetero") return Task::AssocHetero;
    if (name == "online-continual") return Task::OnlineContinual;
    if (name == "noisy-encoding") return Task::NoisyEncoding;
    if (name == "episodic-recognition") return Task::EpisodicRecognition;
    if (name == "theory-verify") return Task::TheoryVerify;
    if (name == "ablate") return Task::Ablate;
    throw std::invalid_argument("unknown task: " + name);
}

std::string to_string(Task task) {
    switch (task) {
        case Task::AssocAuto: return "assoc-auto";
        case Task::AssocHetero: return "assoc-hetero";
        case Task::OnlineContinual: return "online-continual";
        case Task::NoisyEncoding: return "noisy-encoding";
        case Task::EpisodicRecognition: return "episodic-recognition";
        case Task::TheoryVerify: return "theory-verify";
        case Task::Ablate: return "ablate";
    }
    return "assoc-auto";
}

namespace {

Rng derive_rng(std::uint64_t seed, std::uint64_t tag) {
    Rng base(seed);
    return base.fork(tag);
}

// ---------------------------------------------------------------------------
// config parsing
// ---------------------------------------------------------------------------

SynthKind synth_kind_from_string(const std::string& name) {
    if (name == "orthogonal") return SynthKind::Orthogonal;
    if (name == "clustered") return SynthKind::Clustered;
    if (name == "smooth") return SynthKind::Smooth;
    throw std::invalid_argument("unknown synth kind: " + name);
}

std::string to_string(SynthKind kind) {
    switch (kind) {
        case SynthKind::Orthogonal: return "orthogonal";
        case SynthKind::Clustered: return "clustered";
        case SynthKind::Smooth: return "smooth";
    }
    return "orthogonal";
}

DomainTransform transform_from_string(const std::string& name) {
    if (name == "none") return DomainTransform::None;
    if (name == "dark") return DomainTransform::Dark;
    if (name == "bright_flip") return DomainTransform::BrightFlip;
    throw std::invalid_argument("unknown transform: " + name);
}

std::string to_string(DomainTransform t) {
    switch (t) {
        case DomainTransform::None: return "none";
        case DomainTransform::Dark: return "dark";
        case DomainTransform::BrightFlip: return "bright_flip";
    }
    return "none";
}

StreamMode stream_mode_from_string(const std::string& name) {
    if (name == "iid") return StreamMode::Iid;
    if (name == "oci") return StreamMode::Oci;
    if (name == "odi") return StreamMode::Odi;
    throw std::invalid_argument("unknown stream order: " + name);
}

std::string to_string(StreamMode m) {
    switch (m) {
        case StreamMode::Iid: return "iid";
        case StreamMode::Oci: return "oci";
        case StreamMode::Odi: return "odi";
    }
    return "iid";
}

Shape parse_shape(const json& j) {
    if (!j.is_array() || j.size() != 3)
        throw std::invalid_argument("shape must be [channels, height, width]");
    return Shape{j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

Architecture parse_arch(const json& j) {
    Architecture arch;
    arch.input = parse_shape(j.at("input"));
    for (const json& layer : j.at("layers")) {
        LayerSpec spec;
        const json& k = layer.at("kernel");
        spec.kernel_h = k.at(0).get<int>();
        spec.kernel_w = k.at(1).get<int>();
        spec.neurons = layer.at("neurons").get<int>();
        arch.layers.push_back(spec);
    }
    arch.alpha = j.value("alpha", 10.0);
    arch.gamma_grow = j.value("gamma_grow", 1.0);
    arch.lambda_fb = j.value("lambda", 0.5);
    return arch;
}

SynthSpec parse_synth(const json& j) {
    SynthSpec spec;
    spec.kind = synth_kind_from_string(j.value("kind", "orthogonal"));
    spec.n = j.at("n").get<int>();
    spec.shape = parse_shape(j.at("shape"));
    spec.classes = j.value("classes", 1);
    spec.noise_sd = j.value("noise_sd", 0.1);
    spec.transform = transform_from_string(j.value("transform", "none"));
    spec.seed = j.value("seed", 0ull);
    return spec;
}

DataSpec parse_data(const json& j) {
    DataSpec spec;
    const std::string source = j.value("source", j.contains("file") ? "file" : "synth");
    if (source == "synth") {
        spec.source = DataSpec::Source::Synth;
        spec.synth = parse_synth(j.at("synth"));
    } else if (source == "file") {
        spec.source = DataSpec::Source::File;
        spec.file = j.at("file").get<std::string>();
    } else if (source == "files") {
        spec.source = DataSpec::Source::Files;
        spec.files = j.at("files").get<std::vector<std::string>>();
    } else if (source == "manifest") {
        spec.source = DataSpec::Source::Manifest;
        spec.manifest = j.at("manifest").get<std::string>();
    } else {
        throw std::invalid_argument("unknown data source: " + source);
    }
    return spec;
}

Corruption parse_corruption(const json& j) {
    Corruption c;
    c.kind = corruption_kind_from_string(j.value("kind", "none"));
    c.param = j.value("param", 0.0);
    return c;
}

GrowthMode growth_mode_from_string(const std::string& name) {
    if (name == "dirichlet-decay") return GrowthMode::DirichletDecay;
    if (name == "constant") return GrowthMode::Constant;
    if (name == "disabled") return GrowthMode::Disabled;
    throw std::invalid_argument("unknown growth mode: " + name);
}

std::string to_string(GrowthMode m) {
    switch (m) {
        case GrowthMode::DirichletDecay: return "dirichlet-decay";
        case GrowthMode::Constant: return "constant";
        case GrowthMode::Disabled: return "disabled";
    }
    return "dirichlet-decay";
}

LrMode lr_mode_from_string(const std::string& name) {
    if (name == "count-decay") return LrMode::CountDecay;
    if (name == "constant") return LrMode::Constant;
    throw std::invalid_argument("unknown lr mode: " + name);
}

std::string to_string(LrMode m) {
    return m == LrMode::CountDecay ? "count-decay" : "constant";
}

LearnConfig parse_learn(const json& j, const Architecture& arch, std::uint64_t seed) {
    LearnConfig cfg;
    cfg.alpha = j.value("alpha", arch.alpha);
    cfg.gamma_grow = j.value("gamma_grow", arch.gamma_grow);
    cfg.growth_mode = growth_mode_from_string(j.value("growth_mode", "dirichlet-decay"));
    cfg.growth_eps0 = j.value("growth_eps0", 0.5);
    cfg.main_text_threshold = j.value("main_text_threshold", false);
    cfg.lr_mode = lr_mode_from_string(j.value("lr_mode", "count-decay"));
    cfg.lr_eta = j.value("lr_eta", 0.2);
    cfg.averaging = j.value("averaging", true);
    cfg.fixed_latent = j.value("fixed_latent", false);
    cfg.root_only = j.value("root_only", false);
    cfg.init_seed = j.value("init_seed", seed);
    return cfg;
}

json synth_to_json(const SynthSpec& s) {
    return json{{"kind", to_string(s.kind)},
                {"n", s.n},
                {"shape", {s.shape.channels, s.shape.height, s.shape.width}},
                {"classes", s.classes},
                {"noise_sd", s.noise_sd},
                {"transform", to_string(s.transform)},
                {"seed", s.seed}};
}

json data_to_json(const DataSpec& d) {
    switch (d.source) {
        case DataSpec::Source::Synth:
            return json{{"source", "synth"}, {"synth", synth_to_json(d.synth)}};
        case DataSpec::Source::File:
            return json{{"source", "file"}, {"file", d.file}};
        case DataSpec::Source::Files:
            return json{{"source", "files"}, {"files", d.files}};
        case DataSpec::Source::Manifest:
            return json{{"source", "manifest"}, {"manifest", d.manifest}};
    }
    return {};
}

json corruption_to_json(const Corruption& c) {
    return json{{"kind", to_string(c.kind)}, {"param", c.param}};
}

bool is_mask_corruption(CorruptionKind kind) {
    return kind == CorruptionKind::PixelDropout || kind == CorruptionKind::RightMask;
}

} // namespace

ExperimentConfig parse_experiment_config(const json& j) {
    ExperimentConfig cfg;
    cfg.task = task_from_string(j.at("task").get<std::string>());
    cfg.seed = j.value("seed", 0ull);

    if (j.contains("arch")) cfg.arch = parse_arch(j.at("arch"));
    cfg.learn = parse_learn(j.value("learn", json::object()), cfg.arch, cfg.seed);
    if (j.contains("data")) cfg.data = parse_data(j.at("data"));

    if (j.contains("stream")) {
        cfg.stream.mode = stream_mode_from_string(j.at("stream").value("order", "iid"));
        cfg.stream.seed = j.at("stream").value("seed", cfg.seed);
    } else {
        cfg.stream.seed = cfg.seed;
    }

    if (j.contains("corruption")) cfg.test_corruption = parse_corruption(j.at("corruption"));
    if (j.contains("train_corruption"))
        cfg.train_corruption = parse_corruption(j.at("train_corruption"));
    cfg.samples_per_item = j.value("samples_per_item", 1);

    if (j.contains("recognition")) {
        const json& r = j.at("recognition");
        if (r.contains("new_in")) cfg.recognition.new_in = parse_data(r.at("new_in"));
        if (r.contains("new_out")) cfg.recognition.new_out = parse_data(r.at("new_out"));
        if (r.contains("pretrain")) cfg.recognition.pretrain = parse_data(r.at("pretrain"));
    }

    if (j.contains("theory")) {
        const json& t = j.at("theory");
        cfg.theory.J = t.value("J", 100);
        cfg.theory.T = t.value("T", 300);
        cfg.theory.trials = t.value("trials", 1000);
        cfg.theory.end_to_end = t.value("end_to_end", false);
    }

    if (j.contains("eval")) {
        cfg.eval_cadence = j.at("eval").value("cadence", 0);
        cfg.gamma_recall = j.at("eval").value("gamma_recall", kDefaultRecallGamma);
    }
    cfg.compute_order_sensitivity = j.value("compute_order_sensitivity", false);
    cfg.include_timing = j.value("include_timing", false);

    // reject invalid combinations with diagnostics
    if (cfg.learn.fixed_latent && cfg.task != Task::NoisyEncoding)
        throw std::invalid_argument("config: fixed_latent is only valid for noisy-encoding");
    const bool ablation_modes = cfg.learn.growth_mode != GrowthMode::DirichletDecay ||
                                cfg.learn.lr_mode != LrMode::CountDecay || !cfg.learn.averaging;
    if (ablation_modes && cfg.task != Task::Ablate)
        throw std::invalid_argument(
            "config: constant/disabled learning modes are only valid for the ablate task");
    if (cfg.samples_per_item != 1 && cfg.task != Task::NoisyEncoding)
        throw std::invalid_argument("config: samples_per_item is only valid for noisy-encoding");
    if (cfg.samples_per_item < 1)
        throw std::invalid_argument("config: samples_per_item must be >= 1");
    if (cfg.task == Task::AssocHetero && !is_mask_corruption(cfg.test_corruption.kind))
        throw std::invalid_argument(
            "config: assoc-hetero requires a mask corruption (pixel_dropout or right_mask)");
    if (cfg.task == Task::AssocAuto && is_mask_corruption(cfg.test_corruption.kind))
        throw std::invalid_argument("config: assoc-auto requires a value corruption, not a mask");
    if (cfg.task == Task::EpisodicRecognition && !cfg.recognition.new_in)
        throw std::invalid_argument("config: episodic-recognition requires recognition.new_in");
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json arch_layers = json::array();
    for (const LayerSpec& l : cfg.arch.layers)
        arch_layers.push_back(json{{"kernel", {l.kernel_h, l.kernel_w}}, {"neurons", l.neurons}});

    json j{
        {"task", to_string(cfg.task)},
        {"seed", cfg.seed},
        {"arch",
         {{"input", {cfg.arch.input.channels, cfg.arch.input.height, cfg.arch.input.width}},
          {"layers", arch_layers},
          {"alpha", cfg.arch.alpha},
          {"gamma_grow", cfg.arch.gamma_grow},
          {"lambda", cfg.arch.lambda_fb}}},
        {"learn",
         {{"alpha", cfg.learn.alpha},
          {"gamma_grow", cfg.learn.gamma_grow},
          {"growth_mode", to_string(cfg.learn.growth_mode)},
          {"growth_eps0", cfg.learn.growth_eps0},
          {"main_text_threshold", cfg.learn.main_text_threshold},
          {"lr_mode", to_string(cfg.learn.lr_mode)},
          {"lr_eta", cfg.learn.lr_eta},
          {"averaging", cfg.learn.averaging},
          {"fixed_latent", cfg.learn.fixed_latent},
          {"root_only", cfg.learn.root_only},
          {"init_seed", cfg.learn.init_seed}}},
        {"data", data_to_json(cfg.data)},
        {"stream", {{"order", to_string(cfg.stream.mode)}, {"seed", cfg.stream.seed}}},
        {"corruption", corruption_to_json(cfg.test_corruption)},
        {"train_corruption", corruption_to_json(cfg.train_corruption)},
        {"samples_per_item", cfg.samples_per_item},
        {"eval", {{"cadence", cfg.eval_cadence}, {"gamma_recall", cfg.gamma_recall}}},
        {"compute_order_sensitivity", cfg.compute_order_sensitivity},
        {"theory",
         {{"J", cfg.theory.J},
          {"T", cfg.theory.T},
          {"trials", cfg.theory.trials},
          {"end_to_end", cfg.theory.end_to_end}}},
    };
    if (cfg.recognition.new_in) j["recognition"]["new_in"] = data_to_json(*cfg.recognition.new_in);
    if (cfg.recognition.new_out)
        j["recognition"]["new_out"] = data_to_json(*cfg.recognition.new_out);
    if (cfg.recognition.pretrain)
        j["recognition"]["pretrain"] = data_to_json(*cfg.recognition.pretrain);
    return j;
}

PatternBatch load_data(const DataSpec& spec) {
    switch (spec.source) {
        case DataSpec::Source::Synth:
            return synth_generate(spec.synth);
        case DataSpec::Source::File:
            return load_tensor_file(spec.file);
        case DataSpec::Source::Files: {
            std::vector<PatternBatch> domains;
            domains.reserve(spec.files.size());
            for (const auto& f : spec.files) domains.push_back(load_tensor_file(f));
            return concat_domains(domains);
        }
        case DataSpec::Source::Manifest: {
            const auto entries = load_manifest(spec.manifest);
            if (entries.empty())
                throw std::runtime_error("manifest has no entries: " + spec.manifest);
            PatternBatch out;
            for (std::size_t e = 0; e < entries.size(); ++e) {
                PatternBatch b = load_tensor_file(entries[e].path);
                if (e == 0)
                    out.shape = b.shape;
                else if (!(b.shape == out.shape))
                    throw std::runtime_error("manifest batches disagree on shape: " +
                                             entries[e].path);
                for (auto& img : b.images) {
                    out.images.push_back(std::move(img));
                    out.labels.push_back(entries[e].label);
                    out.domains.push_back(entries[e].domain);
                }
            }
            return out;
        }
    }
    throw std::logic_error("unreachable");
}

namespace {

// ---------------------------------------------------------------------------
// shared evaluation machinery
// ---------------------------------------------------------------------------

struct EvalPoint {
    std::int64_t iteration = 0;
    bool recall_measured = false;
    double mean_mse = 0.0;
    double accuracy = 0.0;
    double recognition_accuracy = -1.0; // <0 = not measured
    std::vector<std::uint32_t> grown_per_layer;
};

struct RunOutput {
    std::vector<EvalPoint> points;
    double cumulative_mse = 0.0;
    double cumulative_accuracy = 0.0;
};

std::vector<std::uint32_t> grown_per_layer(const ModelState& state) {
    const Architecture& arch = state.arch();
    std::vector<std::uint32_t> grown(arch.num_layers(), 0);
    for (int l = 0; l < arch.num_layers(); ++l)
        for (int n = 0; n < arch.nodes_at(l); ++n) grown[l] += state.node(l, n).grown;
    return grown;
}

struct RecallEval {
    std::vector<double> mses;
    double mean_mse = 0.0;
    double accuracy = 0.0;
};

RecallEval evaluate_recall(const ModelState& state, const PatternBatch& batch,
                           std::span<const int> indices, const Corruption& corruption, Rng rng,
                           double gamma) {
    RecallEval eval;
    eval.mses.reserve(indices.size());
    RecallOptions opts;
    opts.lambda = state.arch().lambda_fb;
    for (int idx : indices) {
        const Pattern original = batch.pattern(idx);
        const Pattern query = apply(original, corruption, rng);
        const Pattern out = recall(state, query, opts);
        std::span<const std::uint8_t> scope =
            query.has_missing() ? std::span<const std::uint8_t>(query.missing)
                                : std::span<const std::uint8_t>();
        eval.mses.push_back(recall_mse(original.values, out.values, scope));
    }
    eval.mean_mse = cumulative(eval.mses);
    eval.accuracy = recall_accuracy(eval.mses, gamma);
    return eval;
}

void finalize_cumulative(RunOutput& out) {
    std::vector<double> mses, accs;
    for (const EvalPoint& p : out.points) {
        mses.push_back(p.mean_mse);
        accs.push_back(p.accuracy);
    }
    out.cumulative_mse = cumulative(mses);
    out.cumulative_accuracy = cumulative(accs);
}

std::vector<Pattern> materialize_stream(const PatternBatch& batch, const std::vector<int>& order) {
    std::vector<Pattern> stream;
    stream.reserve(order.size());
    for (int idx : order) stream.push_back(batch.pattern(idx));
    return stream;
}

/// Online pass with periodic re-testing of everything seen so far.
RunOutput run_online(const Architecture& arch, const LearnConfig& learn,
                     const PatternBatch& batch, const std::vector<int>& order,
                     const Corruption& test_corruption, std::uint64_t corruption_seed, int cadence,
                     double gamma) {
    ModelState state = build(arch);
    RunOutput out;
    const std::size_t n = order.size();
    std::size_t eval_ordinal = 0;
    const std::vector<Pattern> stream = materialize_stream(batch, order);
    train_stream(state, stream, learn,
                 [&](std::size_t i, const ModelState& snapshot, const StepSummary&) {
                     const bool last = i + 1 == n;
                     if (!((cadence > 0 && (i + 1) % cadence == 0) || last)) return;
                     std::span<const int> seen(order.data(), i + 1);
                     const RecallEval eval =
                         evaluate_recall(snapshot, batch, seen, test_corruption,
                                         derive_rng(corruption_seed, eval_ordinal), gamma);
                     EvalPoint point;
                     point.iteration = static_cast<std::int64_t>(i + 1);
                     point.recall_measured = true;
                     point.mean_mse = eval.mean_mse;
                     point.accuracy = eval.accuracy;
                     point.grown_per_layer = grown_per_layer(snapshot);
                     out.points.push_back(std::move(point));
                     ++eval_ordinal;
                 });
    finalize_cumulative(out);
    return out;
}

json points_to_series(const std::vector<EvalPoint>& points, int num_layers) {
    json series;
    series["iteration"] = json::array();
    bool any_recall = false, any_recognition = false;
    for (const EvalPoint& p : points) {
        any_recall = any_recall || p.recall_measured;
        any_recognition = any_recognition || p.recognition_accuracy >= 0.0;
    }
    if (any_recall) {
        series["recall_mse"] = json::array();
        series["recall_accuracy"] = json::array();
    }
    if (any_recognition) series["recognition_accuracy"] = json::array();
    json grown = json::array();
    for (int l = 0; l < num_layers; ++l) grown.push_back(json::array());

    for (const EvalPoint& p : points) {
        series["iteration"].push_back(p.iteration);
        if (any_recall) {
            series["recall_mse"].push_back(p.mean_mse);
            series["recall_accuracy"].push_back(p.accuracy);
        }
        if (any_recognition) series["recognition_accuracy"].push_back(p.recognition_accuracy);
        for (int l = 0; l < num_layers && l < static_cast<int>(p.grown_per_layer.size()); ++l)
            grown[l].push_back(p.grown_per_layer[l]);
    }
    series["grown_per_layer"] = grown;
    return series;
}

std::vector<int> stream_order_for(const PatternBatch& batch, const StreamOrder& order) {
    return make_stream_order(batch, order);
}

// ---------------------------------------------------------------------------
// task runners
// ---------------------------------------------------------------------------

json run_assoc(const ExperimentConfig& cfg) {
    const PatternBatch batch = load_data(cfg.data);
    const std::vector<int> order = stream_order_for(batch, cfg.stream);

    ModelState state = build(cfg.arch);
    for (int idx : order) train_step(state, batch.pattern(idx), cfg.learn);

    std::vector<int> all(batch.size());
    std::iota(all.begin(), all.end(), 0);
    const RecallEval eval = evaluate_recall(state, batch, all, cfg.test_corruption,
                                            derive_rng(cfg.seed, 0), cfg.gamma_recall);

    json report;
    report["summary"] = {{"mean_mse", eval.mean_mse},
                         {"recall_accuracy", eval.accuracy},
                         {"patterns", batch.size()},
                         {"grown_per_layer", grown_per_layer(state)}};
    report["per_pattern_mse"] = eval.mses;
    return report;
}

json run_online_continual(const ExperimentConfig& cfg) {
    const PatternBatch batch = load_data(cfg.data);
    const std::vector<int> order = stream_order_for(batch, cfg.stream);
    const RunOutput run = run_online(cfg.arch, cfg.learn, batch, order, cfg.test_corruption,
                                     cfg.seed, cfg.eval_cadence, cfg.gamma_recall);

    json report;
    report["series"] = points_to_series(run.points, cfg.arch.num_layers());
    report["summary"] = {{"cumulative_mse", run.cumulative_mse},
                         {"cumulative_accuracy", run.cumulative_accuracy},
                         {"patterns", batch.size()}};

    if (cfg.compute_order_sensitivity && cfg.stream.mode != StreamMode::Iid) {
        const std::vector<int> iid_order =
            stream_order_for(batch, {StreamMode::Iid, cfg.stream.seed});
        const RunOutput online = run_online(cfg.arch, cfg.learn, batch, iid_order,
                                            cfg.test_corruption, cfg.seed, cfg.eval_cadence,
                                            cfg.gamma_recall);
        report["summary"]["online_cumulative_mse"] = online.cumulative_mse;
        report["summary"]["online_cumulative_accuracy"] = online.cumulative_accuracy;
        report["summary"]["order_sensitivity_mse"] =
            order_sensitivity(run.cumulative_mse, online.cumulative_mse);
    }
    return report;
}

json run_noisy_encoding(const ExperimentConfig& cfg) {
    const PatternBatch batch = load_data(cfg.data);
    const std::vector<int> order = stream_order_for(batch, cfg.stream);
    if (cfg.train_corruption.kind == CorruptionKind::None)
        throw std::invalid_argument("noisy-encoding requires train_corruption");

    ModelState state = build(cfg.arch);
    Rng sample_rng = derive_rng(cfg.seed, 1);
    for (int idx : order) {
        const Pattern item = batch.pattern(idx);
        StepSummary first;
        for (int s = 0; s < cfg.samples_per_item; ++s) {
            const Pattern sample = apply(item, cfg.train_corruption, sample_rng);
            if (cfg.learn.fixed_latent && s > 0)
                train_step(state, sample, cfg.learn, &first);
            else
                first = train_step(state, sample, cfg.learn);
        }
    }

    std::vector<int> all(batch.size());
    std::iota(all.begin(), all.end(), 0);
    const RecallEval eval = evaluate_recall(state, batch, all, Corruption{},
                                            derive_rng(cfg.seed, 2), cfg.gamma_recall);
    json report;
    report["summary"] = {{"mean_mse", eval.mean_mse},
                         {"recall_accuracy", eval.accuracy},
                         {"samples_per_item", cfg.samples_per_item},
                         {"fixed_latent", cfg.learn.fixed_latent},
                         {"patterns", batch.size()},
                         {"grown_per_layer", grown_per_layer(state)}};
    report["per_pattern_mse"] = eval.mses;
    return report;
}

double recognition_accuracy_on_mixture(const ModelState& state, const PatternBatch& train,
                                       std::span<const int> seen, const PatternBatch* new_in,
                                       const PatternBatch* new_out) {
    std::size_t correct = 0, total = 0;
    for (int idx : seen) {
        const Judgment j = judge(state, train.pattern(idx));
        correct += j.is_old ? 1 : 0;
        ++total;
    }
    for (const PatternBatch* pool : {new_in, new_out}) {
        if (!pool) continue;
        if (pool->size() < seen.size())
            throw std::invalid_argument("recognition: new-pattern pool smaller than train set");
        for (std::size_t i = 0; i < seen.size(); ++i) {
            const Judgment j = judge(state, pool->pattern(i));
            correct += j.is_old ? 0 : 1;
            ++total;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(total);
}

json run_recognition(const ExperimentConfig& cfg) {
    const PatternBatch batch = load_data(cfg.data);
    const std::vector<int> order = stream_order_for(batch, cfg.stream);
    const PatternBatch new_in = load_data(*cfg.recognition.new_in);
    PatternBatch new_out;
    if (cfg.recognition.new_out) new_out = load_data(*cfg.recognition.new_out);

    ModelState state = build(cfg.arch);
    LearnConfig learn = cfg.learn;

    if (cfg.recognition.pretrain) {
        const PatternBatch pre = load_data(*cfg.recognition.pretrain);
        const std::vector<int> pre_order =
            stream_order_for(pre, {StreamMode::Iid, cfg.stream.seed});
        for (int idx : pre_order) train_step(state, pre.pattern(idx), learn);
        // fresh memory node for the actual episode stream; features below stay
        NodeParams& root = state.root();
        for (auto& mat : root.w) std::fill(mat.begin(), mat.end(), 0.0);
        std::fill(root.counts.begin(), root.counts.end(), 0);
        root.grown = 0;
        std::fill(state.mu().begin(), state.mu().end(), 0.0);
        learn.root_only = true;
    }

    json report;
    std::vector<EvalPoint> points;
    const std::vector<Pattern> stream = materialize_stream(batch, order);
    train_stream(state, stream, learn,
                 [&](std::size_t i, const ModelState& snapshot, const StepSummary&) {
                     const bool last = i + 1 == order.size();
                     if (!((cfg.eval_cadence > 0 && (i + 1) % cfg.eval_cadence == 0) || last))
                         return;
                     std::span<const int> seen(order.data(), i + 1);
                     EvalPoint p;
                     p.iteration = static_cast<std::int64_t>(i + 1);
                     p.recognition_accuracy = recognition_accuracy_on_mixture(
                         snapshot, batch, seen, &new_in,
                         cfg.recognition.new_out ? &new_out : nullptr);
                     p.grown_per_layer = grown_per_layer(snapshot);
                     points.push_back(std::move(p));
                 });

    std::vector<double> accs;
    for (const EvalPoint& p : points) accs.push_back(p.recognition_accuracy);

    // chance level of always answering "new"
    const double portions = cfg.recognition.new_out ? 3.0 : 2.0;
    report["series"] = points_to_series(points, cfg.arch.num_layers());
    report["summary"] = {{"final_recognition_accuracy", accs.empty() ? 0.0 : accs.back()},
                         {"cumulative_recognition_accuracy", cumulative(accs)},
                         {"best_guess_baseline", (portions - 1.0) / portions},
                         {"patterns", batch.size()}};
    return report;
}

json run_theory(const ExperimentConfig& cfg) {
    Rng rng = derive_rng(cfg.seed, 3);
    const ForgettingCurve curve =
        forgetting_oracle(cfg.theory.J, cfg.theory.T, cfg.theory.trials, rng);

    json report;
    report["forgetting_oracle"] = {
        {"J", curve.J},
        {"trials", curve.trials},
        {"mean_intact", curve.mean_intact},
        {"theory_intact", curve.theory_intact},
        {"se_theory", curve.se_theory},
        {"se_sample", curve.se_sample},
        {"implied_accuracy", curve.implied_accuracy},
        {"max_abs_dev", curve.max_abs_dev},
        {"max_se_units", curve.max_se_units},
    };

    if (cfg.theory.end_to_end) {
        const PatternBatch batch = load_data(cfg.data);
        const std::vector<int> order = stream_order_for(batch, cfg.stream);
        const RunOutput run = run_online(cfg.arch, cfg.learn, batch, order, Corruption{}, cfg.seed,
                                         cfg.eval_cadence, cfg.gamma_recall);
        const int J = cfg.arch.layers.back().neurons;
        json series = points_to_series(run.points, cfg.arch.num_layers());
        json theory_acc = json::array();
        double max_dev = 0.0;
        for (const EvalPoint& p : run.points) {
            const double m = static_cast<double>(p.iteration);
            double expected = 1.0;
            if (m > J) {
                const double t = m - J;
                expected = J * std::exp(-t / J) / m;
            }
            theory_acc.push_back(expected);
            if (m > J) max_dev = std::max(max_dev, std::abs(p.accuracy - expected));
        }
        series["theory_accuracy"] = theory_acc;
        report["end_to_end"] = {{"series", series},
                                {"J", J},
                                {"max_abs_dev_past_capacity", max_dev},
                                {"cumulative_accuracy", run.cumulative_accuracy}};
    }
    return report;
}

json run_ablate(const ExperimentConfig& cfg) {
    const PatternBatch batch = load_data(cfg.data);
    const std::vector<int> order = stream_order_for(batch, cfg.stream);

    struct Variant {
        const char* name;
        LearnConfig learn;
    };
    LearnConfig full = cfg.learn;
    full.growth_mode = GrowthMode::DirichletDecay;
    full.lr_mode = LrMode::CountDecay;
    full.averaging = true;

    std::vector<Variant> variants;
    variants.push_back({"full", full});
    {
        Variant v{"constant_threshold", full};
        v.learn.growth_mode = GrowthMode::Constant;
        v.learn.growth_eps0 = cfg.learn.growth_eps0;
        variants.push_back(v);
    }
    {
        Variant v{"constant_lr", full};
        v.learn.lr_mode = LrMode::Constant;
        v.learn.lr_eta = cfg.learn.lr_eta;
        variants.push_back(v);
    }
    {
        Variant v{"no_growth", full};
        v.learn.growth_mode = GrowthMode::Disabled;
        variants.push_back(v);
    }
    {
        Variant v{"no_averaging", full};
        v.learn.averaging = false;
        variants.push_back(v);
    }

    json report;
    report["variants"] = json::object();
    for (const Variant& v : variants) {
        const RunOutput run = run_online(cfg.arch, v.learn, batch, order, cfg.test_corruption,
                                         cfg.seed, cfg.eval_cadence, cfg.gamma_recall);
        report["variants"][v.name] = {
            {"cumulative_mse", run.cumulative_mse},
            {"cumulative_accuracy", run.cumulative_accuracy},
            {"series", points_to_series(run.points, cfg.arch.num_layers())}};
    }
    return report;
}

} // namespace

json run_experiment(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();

    json report;
    switch (cfg.task) {
        case Task::AssocAuto:
        case Task::AssocHetero:
            report = run_assoc(cfg);
            break;
        case Task::OnlineContinual:
            report = run_online_continual(cfg);
            break;
        case Task::NoisyEncoding:
            report = run_noisy_encoding(cfg);
            break;
        case Task::EpisodicRecognition:
            report = run_recognition(cfg);
            break;
        case Task::TheoryVerify:
            report = run_theory(cfg);
            break;
        case Task::Ablate:
            report = run_ablate(cfg);
            break;
    }

    report["code_version"] = kCodeVersion;
    report["task"] = to_string(cfg.task);
    report["seed"] = cfg.seed;
    report["config"] = config_to_json(cfg);
    if (cfg.include_timing) {
        const auto end = std::chrono::steady_clock::now();
        report["timing_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(end - start).count();
    }
    return report;
}

std::string report_to_csv(const json& report) {
    std::string csv;
    if (!report.contains("series")) {
        // headerless key,value dump for summary-only reports
        csv += "key,value\n";
        if (report.contains("summary"))
            for (auto it = report["summary"].begin(); it != report["summary"].end(); ++it)
                if (!it.value().is_structured())
                    csv += it.key() + "," + it.value().dump() + "\n";
        return csv;
    }
    const json& series = report["series"];
    std::vector<std::string> columns;
    for (auto it = series.begin(); it != series.end(); ++it)
        if (it.value().is_array() && it.key() != "grown_per_layer")
            columns.push_back(it.key());
    std::sort(columns.begin(), columns.end());
    // iteration first
    auto iter_pos = std::find(columns.begin(), columns.end(), "iteration");
    if (iter_pos != columns.end()) std::rotate(columns.begin(), iter_pos, iter_pos + 1);

    for (std::size_t c = 0; c < columns.size(); ++c)
        csv += columns[c] + (c + 1 < columns.size() ? "," : "\n");
    const std::size_t rows = series["iteration"].size();
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < columns.size(); ++c)
            csv += series[columns[c]][r].dump() + (c + 1 < columns.size() ? "," : "\n");
    return csv;
}

void write_report(const json& report, const std::string& path, const std::string& format) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    if (format == "json")
        os << report.dump(2) << "\n";
    else if (format == "csv")
        os << report_to_csv(report);
    else
        throw std::invalid_argument("unknown report format: " + format);
    if (!os) throw std::runtime_error("write failed: " + path);
}

} // namespace sqhn
