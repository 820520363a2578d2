#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sqhn/inference.hpp"
#include "sqhn/model.hpp"

namespace sqhn {

enum class GrowthMode {
    DirichletDecay, // eps = gamma * alpha / (t + 1 + alpha)
    Constant,       // eps fixed (ablation -Dir)
    Disabled        // no growth; weights randomized at first step (ablation -Grw)
};

enum class LrMode {
    CountDecay, // step 1/(c+1)
    Constant    // fixed step (ablation -lrDecay)
};

struct LearnConfig {
    double alpha = 10.0;
    double gamma_grow = 1.0;
    GrowthMode growth_mode = GrowthMode::DirichletDecay;
    double growth_eps0 = 0.5; // Constant growth threshold
    bool main_text_threshold = false; // alpha/(t+alpha) variant, no gamma
    LrMode lr_mode = LrMode::CountDecay;
    double lr_eta = 0.2; // Constant learning rate
    bool averaging = true; // off = grow-only updates (ablation -Avg)
    bool fixed_latent = false; // SQHN+: reuse pinned assignments
    bool root_only = false; // freeze lower layers, update root edges only
    std::uint64_t init_seed = 0; // randomization seed for Disabled growth
};

/// Decaying growth threshold eps = gamma * alpha / (t + 1 + alpha).
double growth_threshold(std::uint64_t t, double alpha, double gamma_grow);

/// Main-text variant alpha / (t + alpha).
double growth_threshold_main(std::uint64_t t, double alpha);

struct StepSummary {
    std::vector<std::vector<int>> winners;                    // [layer][node]
    std::vector<std::vector<std::uint8_t>> grew;              // neuron grown this step
    std::vector<std::vector<std::uint8_t>> capacity_fallback; // wanted to grow, was full
    double pre_energy = 0.0; // energy of the assignments under pre-update weights
    double epsilon = 0.0;
    int grown_count = 0;
    int fallback_count = 0;
};

/// One online training iteration: bottom-up max-likelihood inference with
/// neuron growth, then the local count-decayed column update on every edge of
/// the assigned path, count/mu bookkeeping, and the iteration increment.
///
/// `pinned` (SQHN+ mode) replays a previous step's assignments instead of
/// running inference; growth and mu updates are skipped for such steps.
StepSummary train_step(ModelState& state, const Pattern& pattern, const LearnConfig& cfg,
                       const StepSummary* pinned = nullptr);

using StepHook = std::function<void(std::size_t iter, const ModelState&, const StepSummary&)>;

/// Strictly ordered single pass over a stream. The hook runs after every
/// step; metrics/eval cadence live with the caller.
void train_stream(ModelState& state, std::span<const Pattern> stream, const LearnConfig& cfg,
                  const StepHook& hook = {});

} // namespace sqhn
