#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "sqhn/checkpoint.hpp"
#include "sqhn/experiment.hpp"
#include "sqhn/inference.hpp"
#include "sqhn/metrics.hpp"
#include "sqhn/recognition.hpp"

using namespace sqhn;
using nlohmann::json;

namespace {

json load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    json j;
    is >> j;
    return j;
}

Corruption parse_corrupt_flag(const std::string& spec) {
    Corruption c;
    const auto colon = spec.find(':');
    c.kind = corruption_kind_from_string(spec.substr(0, colon));
    if (colon != std::string::npos) c.param = std::stod(spec.substr(colon + 1));
    return c;
}

Shape parse_shape_flag(const std::string& spec) {
    Shape s;
    char x1 = 0, x2 = 0;
    std::stringstream ss(spec);
    ss >> s.channels >> x1 >> s.height >> x2 >> s.width;
    if (!ss || x1 != 'x' || x2 != 'x')
        throw std::runtime_error("shape must look like CxHxW, got: " + spec);
    return s;
}

void emit(const json& report, const std::string& out, const std::string& format) {
    if (out.empty()) {
        if (format == "csv")
            std::cout << report_to_csv(report);
        else
            std::cout << report.dump(2) << "\n";
    } else {
        write_report(report, out, format);
    }
}

// shared by bench / theory-verify / ablate
int run_config(const std::string& config_path, std::uint64_t seed, bool seed_set,
               const std::string& out, const std::string& format, bool timing,
               const std::string& forced_task = "") {
    json j = load_json(config_path);
    if (!forced_task.empty()) j["task"] = forced_task;
    if (seed_set) j["seed"] = seed;
    if (timing) j["include_timing"] = true;
    const ExperimentConfig cfg = parse_experiment_config(j);
    emit(run_experiment(cfg), out, format);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SQHN associative-memory library benchmark harness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kCodeVersion));

    std::string config_path, out, format = "json", model_path, data_path;
    std::uint64_t seed = 0;
    bool timing = false;

    // --- gen-data ------------------------------------------------------
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic tensor file");
    std::string gen_kind = "orthogonal", gen_shape = "1x8x8", gen_transform = "none";
    int gen_n = 64, gen_classes = 1;
    double gen_noise_sd = 0.1;
    gen->add_option("--kind", gen_kind, "orthogonal|clustered|smooth");
    gen->add_option("--n", gen_n, "number of patterns")->required();
    gen->add_option("--shape", gen_shape, "CxHxW");
    gen->add_option("--classes", gen_classes, "label groups");
    gen->add_option("--noise-sd", gen_noise_sd, "clustered perturbation sd");
    gen->add_option("--transform", gen_transform, "none|dark|bright_flip");
    gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--out", out, "output .sqd path")->required();

    // --- convert ---------------------------------------------------------
    auto* convert = app.add_subcommand("convert", "Convert IDX (MNIST-class) files to SQD1");
    std::string idx_images, idx_labels;
    convert->add_option("--images", idx_images, "idx3-ubyte image file")->required();
    convert->add_option("--labels", idx_labels, "idx1-ubyte label file");
    convert->add_option("--out", out, "output .sqd path")->required();

    // --- train -----------------------------------------------------------
    auto* train = app.add_subcommand("train", "Train a model from a config and save a checkpoint");
    train->add_option("--config", config_path, "experiment config JSON")->required();
    train->add_option("--seed", seed, "override config seed");
    std::string ckpt_out;
    train->add_option("--out", ckpt_out, "checkpoint path")->required();

    // --- recall ------------------------------------------------------------
    auto* rec = app.add_subcommand("recall", "Recall a dataset through a trained checkpoint");
    std::string corrupt_spec = "none";
    double lambda = 0.5;
    bool passthrough = false;
    rec->add_option("--model", model_path, "checkpoint path")->required();
    rec->add_option("--data", data_path, "query tensor file")->required();
    rec->add_option("--corrupt", corrupt_spec, "corruption kind[:param]");
    rec->add_option("--lambda", lambda, "feedback mixing weight");
    rec->add_flag("--passthrough", passthrough, "copy observed pixels, reconstruct missing only");
    rec->add_option("--seed", seed, "corruption seed");
    rec->add_option("--out", out, "write reconstructions (.sqd)");
    rec->add_option("--format", format, "json|csv");

    // --- judge -------------------------------------------------------------
    auto* jdg = app.add_subcommand("judge", "Old/new episodic judgments for a dataset");
    jdg->add_option("--model", model_path, "checkpoint path")->required();
    jdg->add_option("--data", data_path, "query tensor file")->required();
    jdg->add_option("--out", out, "report path (default stdout)");
    jdg->add_option("--format", format, "json|csv");

    // --- bench / theory-verify / ablate ------------------------------------
    auto* bench = app.add_subcommand("bench", "Run a configured experiment and write the report");
    bench->add_option("--config", config_path, "experiment config JSON")->required();
    bench->add_option("--seed", seed, "override config seed");
    bench->add_option("--out", out, "report path (default stdout)");
    bench->add_option("--format", format, "json|csv");
    bench->add_flag("--timing", timing, "include wall-clock in the report");

    auto* theory = app.add_subcommand("theory-verify", "Run the forgetting-law oracle");
    int th_J = 100, th_T = 300, th_trials = 1000;
    theory->add_option("--J", th_J, "memory columns");
    theory->add_option("--T", th_T, "steps past capacity");
    theory->add_option("--trials", th_trials, "Monte-Carlo trials");
    theory->add_option("--seed", seed, "simulation seed");
    theory->add_option("--out", out, "report path (default stdout)");
    theory->add_option("--format", format, "json|csv");

    auto* abl = app.add_subcommand("ablate", "Run the learning-rule ablation suite");
    abl->add_option("--config", config_path, "experiment config JSON")->required();
    abl->add_option("--seed", seed, "override config seed");
    abl->add_option("--out", out, "report path (default stdout)");
    abl->add_option("--format", format, "json|csv");
    abl->add_flag("--timing", timing, "include wall-clock in the report");

    auto* sweep = app.add_subcommand("sweep", "Run a config once per value of one parameter");
    std::string sweep_param, sweep_values, sweep_dir = ".";
    sweep->add_option("--config", config_path, "base config JSON")->required();
    sweep->add_option("--param", sweep_param, "dotted json path, e.g. learn.alpha")->required();
    sweep->add_option("--values", sweep_values, "comma-separated values")->required();
    sweep->add_option("--out-dir", sweep_dir, "directory for per-point reports");
    sweep->add_option("--format", format, "json|csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            SynthSpec spec;
            spec.kind = gen_kind == "clustered" ? SynthKind::Clustered
                        : gen_kind == "smooth"  ? SynthKind::Smooth
                                                : SynthKind::Orthogonal;
            if (gen_kind != "clustered" && gen_kind != "smooth" && gen_kind != "orthogonal")
                throw std::runtime_error("unknown kind: " + gen_kind);
            spec.n = gen_n;
            spec.shape = parse_shape_flag(gen_shape);
            spec.classes = gen_classes;
            spec.noise_sd = gen_noise_sd;
            spec.seed = seed;
            spec.transform = gen_transform == "dark"         ? DomainTransform::Dark
                             : gen_transform == "bright_flip" ? DomainTransform::BrightFlip
                                                              : DomainTransform::None;
            save_tensor_file(out, synth_generate(spec));
            std::cout << "wrote " << out << " (" << gen_n << " patterns)\n";
            return 0;
        }

        if (convert->parsed()) {
            const PatternBatch batch = load_idx(idx_images, idx_labels);
            save_tensor_file(out, batch);
            std::cout << "wrote " << out << " (" << batch.size() << " patterns)\n";
            return 0;
        }

        if (train->parsed()) {
            json j = load_json(config_path);
            if (!j.contains("task")) j["task"] = "assoc-auto";
            if (train->count("--seed")) j["seed"] = seed;
            const ExperimentConfig cfg = parse_experiment_config(j);
            const PatternBatch batch = load_data(cfg.data);
            const auto order = make_stream_order(batch, cfg.stream);
            ModelState state = build(cfg.arch);
            for (int idx : order) train_step(state, batch.pattern(idx), cfg.learn);
            save_checkpoint(ckpt_out, state);
            std::cout << "trained " << order.size() << " iterations, wrote " << ckpt_out << "\n";
            return 0;
        }

        if (rec->parsed()) {
            const ModelState state = load_checkpoint(model_path);
            const PatternBatch batch = load_tensor_file(data_path);
            const Corruption corruption = parse_corrupt_flag(corrupt_spec);
            Rng rng(seed);

            PatternBatch recon;
            recon.shape = batch.shape;
            std::vector<double> mses;
            for (std::size_t i = 0; i < batch.size(); ++i) {
                const Pattern original = batch.pattern(i);
                const Pattern query = apply(original, corruption, rng);
                const Pattern output =
                    recall(state, query, {.lambda = lambda, .passthrough_observed = passthrough});
                std::span<const std::uint8_t> scope =
                    query.has_missing() ? std::span<const std::uint8_t>(query.missing)
                                        : std::span<const std::uint8_t>();
                mses.push_back(recall_mse(original.values, output.values, scope));
                recon.images.push_back(output.values);
            }
            if (!out.empty()) save_tensor_file(out, recon);

            json report{{"code_version", kCodeVersion},
                        {"model", model_path},
                        {"data", data_path},
                        {"corruption", corrupt_spec},
                        {"seed", seed},
                        {"per_pattern_mse", mses},
                        {"summary",
                         {{"mean_mse", cumulative(mses)},
                          {"recall_accuracy", recall_accuracy(mses, kDefaultRecallGamma)}}}};
            std::cout << report.dump(2) << "\n";
            return 0;
        }

        if (jdg->parsed()) {
            const ModelState state = load_checkpoint(model_path);
            const PatternBatch batch = load_tensor_file(data_path);
            json rows = json::array();
            for (std::size_t i = 0; i < batch.size(); ++i) {
                const Judgment v = judge(state, batch.pattern(i));
                rows.push_back({{"index", i},
                                {"old", v.is_old},
                                {"score", v.score},
                                {"neuron", v.neuron},
                                {"activation", v.activation},
                                {"threshold", v.threshold}});
            }
            json report{{"code_version", kCodeVersion}, {"judgments", rows}};
            if (format == "csv") {
                std::string csv = "index,old,score,neuron,activation,threshold\n";
                for (const auto& r : rows)
                    csv += r["index"].dump() + "," + r["old"].dump() + "," + r["score"].dump() +
                           "," + r["neuron"].dump() + "," + r["activation"].dump() + "," +
                           r["threshold"].dump() + "\n";
                if (out.empty())
                    std::cout << csv;
                else {
                    std::ofstream os(out);
                    os << csv;
                }
            } else {
                emit(report, out, "json");
            }
            return 0;
        }

        if (bench->parsed())
            return run_config(config_path, seed, bench->count("--seed") > 0, out, format, timing);

        if (theory->parsed()) {
            json j{{"task", "theory-verify"},
                   {"seed", seed},
                   {"theory", {{"J", th_J}, {"T", th_T}, {"trials", th_trials}}}};
            const ExperimentConfig cfg = parse_experiment_config(j);
            emit(run_experiment(cfg), out, format);
            return 0;
        }

        if (abl->parsed())
            return run_config(config_path, seed, abl->count("--seed") > 0, out, format, timing,
                              "ablate");

        if (sweep->parsed()) {
            const json base = load_json(config_path);
            std::vector<std::string> values;
            std::stringstream ss(sweep_values);
            std::string item;
            while (std::getline(ss, item, ',')) values.push_back(item);

            json summary = json::array();
            for (std::size_t i = 0; i < values.size(); ++i) {
                json j = base;
                // dotted path into the config
                json* slot = &j;
                std::stringstream ps(sweep_param);
                std::string key, prev;
                std::vector<std::string> keys;
                while (std::getline(ps, key, '.')) keys.push_back(key);
                for (std::size_t k = 0; k + 1 < keys.size(); ++k) slot = &((*slot)[keys[k]]);
                (*slot)[keys.back()] = json::parse(values[i], nullptr, false).is_discarded()
                                           ? json(values[i])
                                           : json::parse(values[i]);

                const ExperimentConfig cfg = parse_experiment_config(j);
                const json report = run_experiment(cfg);
                const std::string path =
                    sweep_dir + "/sweep_" + std::to_string(i) + "." + format;
                write_report(report, path, format);
                json row{{"value", values[i]}, {"report", path}};
                if (report.contains("summary")) row["summary"] = report["summary"];
                summary.push_back(row);
            }
            std::cout << json{{"param", sweep_param}, {"points", summary}}.dump(2) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
