#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqhn/architecture.hpp"
#include "sqhn/corruption.hpp"
#include "sqhn/datasets.hpp"
#include "sqhn/learning.hpp"
#include "sqhn/metrics.hpp"

namespace sqhn {

inline constexpr const char* kCodeVersion = "sqhn 1.0.0";

enum class Task {
    AssocAuto,
    AssocHetero,
    OnlineContinual,
    NoisyEncoding,
    EpisodicRecognition,
    TheoryVerify,
    Ablate
};

Task task_from_string(const std::string& name);
std::string to_string(Task task);

/// Where a batch comes from: an inline synthetic spec, a single tensor file,
/// several files treated as odi domains, or a CSV manifest of
/// path,label,domain rows.
struct DataSpec {
    enum class Source { Synth, File, Files, Manifest };
    Source source = Source::Synth;
    SynthSpec synth;
    std::string file;
    std::vector<std::string> files;
    std::string manifest;
};

struct RecognitionSpec {
    std::optional<DataSpec> new_in;
    std::optional<DataSpec> new_out;
    std::optional<DataSpec> pretrain; // lower-layer pretraining; main phase updates root only
};

struct TheorySpec {
    int J = 100;
    int T = 300;
    int trials = 1000;
    bool end_to_end = false; // also train a model past capacity and track the curve
};

/// Fully determines a run together with the input data files.
struct ExperimentConfig {
    Task task = Task::AssocAuto;
    Architecture arch;
    LearnConfig learn;
    DataSpec data;
    StreamOrder stream;
    Corruption test_corruption;  // applied to queries at evaluation
    Corruption train_corruption; // noisy-encoding sample generator
    int samples_per_item = 1;
    RecognitionSpec recognition;
    TheorySpec theory;
    int eval_cadence = 0; // 0 = evaluate once at the end
    double gamma_recall = kDefaultRecallGamma;
    bool compute_order_sensitivity = false;
    std::uint64_t seed = 0;
    bool include_timing = false;
};

/// Parse with validation; rejects invalid combinations (e.g. fixed_latent
/// outside noisy-encoding, ablation-only learning modes outside ablate).
ExperimentConfig parse_experiment_config(const nlohmann::json& j);

/// Effective config with every default made explicit; echoed into reports.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

PatternBatch load_data(const DataSpec& spec);

/// Execute the configured task and produce the report.
nlohmann::json run_experiment(const ExperimentConfig& cfg);

/// One row per evaluation point.
std::string report_to_csv(const nlohmann::json& report);

void write_report(const nlohmann::json& report, const std::string& path,
                  const std::string& format);

} // namespace sqhn
