#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sqhn/architecture.hpp"
#include "sqhn/types.hpp"

namespace sqhn {

/// Learned parameters of one node: one weight matrix per child edge plus
/// per-neuron win counts. Matrices are column-major so that column j (the
/// memory vector of neuron j) is contiguous: w[child][j * child_dim + i].
/// Columns of ungrown neurons are exactly zero.
struct NodeParams {
    std::vector<std::vector<double>> w;
    std::vector<std::uint64_t> counts;
    std::uint32_t grown = 0;
};

/// Mutable learned state of the whole tree. Single writer: training must be
/// externally serialized; any number of readers may run recall/recognition
/// against a frozen snapshot.
class ModelState {
public:
    ModelState() = default;
    explicit ModelState(const Architecture& arch);

    const Architecture& arch() const { return arch_; }

    NodeParams& node(int layer, int idx) { return nodes_[layer][idx]; }
    const NodeParams& node(int layer, int idx) const { return nodes_[layer][idx]; }

    NodeParams& root() { return nodes_.back()[0]; }
    const NodeParams& root() const { return nodes_.back()[0]; }

    /// Moving-average recognition thresholds, root neurons only.
    std::vector<double>& mu() { return mu_; }
    const std::vector<double>& mu() const { return mu_; }

    std::uint64_t iteration() const { return t_; }
    void set_iteration(std::uint64_t t) { t_ = t; }

    /// True once every node has grown at least one neuron.
    bool trained() const;

private:
    Architecture arch_;
    std::vector<std::vector<NodeParams>> nodes_; // [layer][node]
    std::vector<double> mu_;
    std::uint64_t t_ = 0;
};

/// Zero-initialized state: all weights 0, all counts 0, nothing grown, t=0.
/// Throws if the architecture is invalid.
ModelState build(const Architecture& arch);

/// Per-node activation snapshot from a sweep. h is padded to capacity J with
/// ungrown entries 0; winner indexes the argmax over grown neurons (-1 if
/// unassigned); up_value is the value the winner contributes to its parent's
/// input (the activation itself, or 1.0 for a neuron grown this step).
struct NodeActivations {
    std::vector<double> h;
    int winner = -1;
    double max_val = 0.0;
    double up_value = 0.0;
};

using Activations = std::vector<std::vector<NodeActivations>>; // [layer][node]

/// Shifted cosine similarity between a memory column and a patch, both read
/// through the shift x -> x-0.5, mapped to [0,1]. Missing dims are excluded
/// from the inner product and from both norms. Degenerate norms (uniform-0.5
/// patch, unborn memory) return the uninformative midpoint 0.5.
///
/// Computed as sign(d) * sqrt(d^2 / (|m|^2 |x|^2)) so that a bit-identical
/// patch/column pair yields exactly 1.0.
double shifted_cosine(std::span<const double> column,
                      std::span<const float> patch,
                      std::span<const int> pixel_indices,
                      std::span<const std::uint8_t> missing);

/// Energy of a full assignment given the clamped pattern: the mean over
/// non-root nodes of p(h*_l | h*_parent). Bottom-layer terms are the shifted
/// cosine of each clamped patch against the memory column its parent selects;
/// hidden terms are the parent-matrix entries. The root contributes no term.
/// Result lies in [0,1]. Throws if any node is unassigned.
double energy(const ModelState& state, const Activations& acts, const Pattern& pattern);

} // namespace sqhn
