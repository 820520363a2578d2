#include "sqhn/model.hpp"

#include <cmath>
#include <stdexcept>

namespace sqhn {

ModelState::ModelState(const Architecture& arch) : arch_(arch) {
    nodes_.resize(arch_.num_layers());
    for (int l = 0; l < arch_.num_layers(); ++l) {
        const int n_nodes = arch_.nodes_at(l);
        const int n_children = arch_.children_of(l);
        const int dim = arch_.child_dim(l);
        const int cap = arch_.layers[l].neurons;
        nodes_[l].resize(n_nodes);
        for (auto& node : nodes_[l]) {
            node.w.assign(n_children, std::vector<double>(static_cast<std::size_t>(dim) * cap, 0.0));
            node.counts.assign(cap, 0);
            node.grown = 0;
        }
    }
    mu_.assign(arch_.layers.back().neurons, 0.0);
}

bool ModelState::trained() const {
    for (const auto& layer : nodes_)
        for (const auto& node : layer)
            if (node.grown == 0) return false;
    return true;
}

ModelState build(const Architecture& arch) {
    arch.validate();
    return ModelState(arch);
}

double shifted_cosine(std::span<const double> column,
                      std::span<const float> patch,
                      std::span<const int> pixel_indices,
                      std::span<const std::uint8_t> missing) {
    double dot = 0.0, mm = 0.0, xx = 0.0;
    for (std::size_t k = 0; k < pixel_indices.size(); ++k) {
        const int px = pixel_indices[k];
        if (!missing.empty() && missing[px] != 0) continue;
        const double m = column[k] - 0.5;
        const double x = static_cast<double>(patch[px]) - 0.5;
        dot += m * x;
        mm += m * m;
        xx += x * x;
    }
    if (mm <= 0.0 || xx <= 0.0) return 0.5; // no evidence either side
    double ratio = (dot * dot) / (mm * xx);
    if (ratio > 1.0) ratio = 1.0;
    const double cosine = std::copysign(std::sqrt(ratio), dot);
    return 0.5 * cosine + 0.5;
}

double energy(const ModelState& state, const Activations& acts, const Pattern& pattern) {
    const Architecture& arch = state.arch();
    if (static_cast<int>(acts.size()) != arch.num_layers())
        throw std::invalid_argument("energy: activation layers do not match architecture");

    double sum = 0.0;
    int terms = 0;

    // visible-patch terms under each bottom node's assignment
    for (int n = 0; n < arch.nodes_at(0); ++n) {
        const NodeActivations& a = acts[0][n];
        if (a.winner < 0) throw std::invalid_argument("energy: unassigned node");
        const NodeParams& params = state.node(0, n);
        const auto idx = arch.patch_pixel_indices(n);
        const int dim = arch.patch_dim();
        std::span<const double> col(params.w[0].data() + static_cast<std::size_t>(a.winner) * dim, dim);
        sum += shifted_cosine(col, pattern.values, idx, pattern.missing);
        ++terms;
    }

    // hidden terms: entry of the parent matrix at (child winner, parent winner)
    for (int l = 1; l < arch.num_layers(); ++l) {
        const int dim = arch.child_dim(l);
        for (int n = 0; n < arch.nodes_at(l); ++n) {
            const NodeActivations& pa = acts[l][n];
            if (pa.winner < 0) throw std::invalid_argument("energy: unassigned node");
            const NodeParams& params = state.node(l, n);
            for (int c = 0; c < arch.children_of(l); ++c) {
                const NodeActivations& ch = acts[l - 1][arch.child_node(l, n, c)];
                if (ch.winner < 0) throw std::invalid_argument("energy: unassigned node");
                sum += params.w[c][static_cast<std::size_t>(pa.winner) * dim + ch.winner];
                ++terms;
            }
        }
    }

    return sum / terms;
}

} // namespace sqhn
