#pragma once

#include <span>
#include <vector>

#include "sqhn/model.hpp"

namespace sqhn {

/// Winner index + activation value one child hands to its parent.
struct ChildMax {
    int index = -1;
    double value = 0.0;
};

/// Bottom-layer feed-forward input: shifted cosine of the clamped patch
/// against every grown memory column. Ungrown entries stay 0.
std::vector<double> ff_bottom(const NodeParams& params,
                              std::span<const float> image,
                              std::span<const int> pixel_indices,
                              std::span<const std::uint8_t> missing);

/// Hidden-node feed-forward input: (1/Z) * M^T h_c^max with Z = N * |h_c^max|,
/// where h_c^max keeps only each child's winning entry. Grown entries are
/// bounded by N^(-1/2); ungrown entries stay 0. All-zero child input (no
/// evidence from below) yields an all-zero vector.
std::vector<double> ff_hidden(const NodeParams& params,
                              std::span<const ChildMax> children,
                              int child_dim);

struct SweepResult {
    Activations acts;
    bool used_fb = false;
};

/// Single bottom-up pass. Every node gets its activation vector plus the
/// bottom-up argmax winner (ties to the lowest index). Throws if any node has
/// no grown neurons.
SweepResult ff_sweep(const ModelState& state, const Pattern& pattern);

/// Top-down pass over a completed ff_sweep: the root keeps its bottom-up
/// argmax; every node below re-argmaxes lambda*h + (1-lambda)*(parent's
/// prediction column). Returns the final assignments.
Activations fb_sweep(const ModelState& state, const SweepResult& sweep, double lambda);

struct RecallOptions {
    double lambda = 0.5;
    /// Copy observed pixels from the query and reconstruct only missing ones
    /// (hetero-association convenience; reconstruction is unchanged).
    bool passthrough_observed = false;
};

/// Full recall: FF + FB sweeps, then each visible patch is rebuilt from the
/// bottom memory column its node selected. Output values lie in [0,1].
Pattern recall(const ModelState& state, const Pattern& query, const RecallOptions& opts = {});

/// Bottom-up-only assignments (no feedback, no growth), as used by learning
/// and recognition. Equivalent to ff_sweep's winners.
SweepResult encode_ml(const ModelState& state, const Pattern& pattern);

} // namespace sqhn
