#include "sqhn/inference.hpp"

#include <cmath>
#include <stdexcept>

namespace sqhn {

std::vector<double> ff_bottom(const NodeParams& params,
                              std::span<const float> image,
                              std::span<const int> pixel_indices,
                              std::span<const std::uint8_t> missing) {
    std::vector<double> h(params.counts.size(), 0.0);

    // a patch with no observed pixels abstains entirely: reporting the flat
    // midpoint instead would hand its lowest-indexed neuron false weight in
    // every ancestor's normalized sum
    if (!missing.empty()) {
        bool any_observed = false;
        for (int px : pixel_indices)
            if (missing[px] == 0) {
                any_observed = true;
                break;
            }
        if (!any_observed) return h;
    }

    const std::size_t dim = pixel_indices.size();
    for (std::uint32_t j = 0; j < params.grown; ++j) {
        std::span<const double> col(params.w[0].data() + j * dim, dim);
        h[j] = shifted_cosine(col, image, pixel_indices, missing);
    }
    return h;
}

std::vector<double> ff_hidden(const NodeParams& params,
                              std::span<const ChildMax> children,
                              int child_dim) {
    std::vector<double> h(params.counts.size(), 0.0);
    double sq = 0.0;
    for (const ChildMax& c : children) sq += c.value * c.value;
    if (sq <= 0.0) return h;
    const double z = static_cast<double>(children.size()) * std::sqrt(sq);
    for (std::uint32_t j = 0; j < params.grown; ++j) {
        double acc = 0.0;
        for (std::size_t c = 0; c < children.size(); ++c) {
            if (children[c].index < 0 || children[c].value == 0.0) continue;
            acc += params.w[c][static_cast<std::size_t>(j) * child_dim + children[c].index] *
                   children[c].value;
        }
        h[j] = acc / z;
    }
    return h;
}

namespace {

int argmax_grown(const std::vector<double>& h, std::uint32_t grown) {
    int best = -1;
    double best_val = 0.0;
    for (std::uint32_t j = 0; j < grown; ++j) {
        if (best < 0 || h[j] > best_val) {
            best = static_cast<int>(j);
            best_val = h[j];
        }
    }
    return best;
}

} // namespace

SweepResult ff_sweep(const ModelState& state, const Pattern& pattern) {
    const Architecture& arch = state.arch();
    if (pattern.shape != arch.input)
        throw std::invalid_argument("ff_sweep: pattern shape does not match architecture input");

    SweepResult result;
    result.acts.resize(arch.num_layers());
    for (int l = 0; l < arch.num_layers(); ++l) {
        result.acts[l].resize(arch.nodes_at(l));
        const int dim = arch.child_dim(l);
        for (int n = 0; n < arch.nodes_at(l); ++n) {
            const NodeParams& params = state.node(l, n);
            if (params.grown == 0)
                throw std::runtime_error("ff_sweep: node with no grown neurons (untrained model)");
            NodeActivations& a = result.acts[l][n];
            if (l == 0) {
                const auto idx = arch.patch_pixel_indices(n);
                a.h = ff_bottom(params, pattern.values, idx, pattern.missing);
            } else {
                std::vector<ChildMax> children(arch.children_of(l));
                for (int c = 0; c < arch.children_of(l); ++c) {
                    const NodeActivations& ch = result.acts[l - 1][arch.child_node(l, n, c)];
                    children[c] = {ch.winner, ch.up_value};
                }
                a.h = ff_hidden(params, children, dim);
            }
            a.winner = argmax_grown(a.h, params.grown);
            a.max_val = a.h[a.winner];
            a.up_value = a.max_val;
        }
    }
    return result;
}

Activations fb_sweep(const ModelState& state, const SweepResult& sweep, double lambda) {
    const Architecture& arch = state.arch();
    Activations acts = sweep.acts;

    // root keeps the bottom-up argmax; walk down re-mixing each layer
    for (int l = arch.root_layer(); l >= 1; --l) {
        const int dim = arch.child_dim(l);
        for (int n = 0; n < arch.nodes_at(l); ++n) {
            const NodeParams& params = state.node(l, n);
            const int pa_winner = acts[l][n].winner;
            for (int c = 0; c < arch.children_of(l); ++c) {
                const int child = arch.child_node(l, n, c);
                NodeActivations& ch = acts[l - 1][child];
                const NodeParams& child_params = state.node(l - 1, child);
                const double* col = params.w[c].data() + static_cast<std::size_t>(pa_winner) * dim;
                std::vector<double> mixed(ch.h.size(), 0.0);
                for (std::uint32_t j = 0; j < child_params.grown; ++j)
                    mixed[j] = lambda * ch.h[j] + (1.0 - lambda) * col[j];
                ch.h = std::move(mixed);
                ch.winner = argmax_grown(ch.h, child_params.grown);
                ch.max_val = ch.h[ch.winner];
                ch.up_value = ch.max_val;
            }
        }
    }
    return acts;
}

Pattern recall(const ModelState& state, const Pattern& query, const RecallOptions& opts) {
    const Architecture& arch = state.arch();
    const SweepResult sweep = ff_sweep(state, query);
    Activations acts = fb_sweep(state, sweep, opts.lambda);

    Pattern out;
    out.shape = query.shape;
    out.values.assign(query.values.size(), 0.0f);

    const int dim = arch.patch_dim();
    for (int n = 0; n < arch.nodes_at(0); ++n) {
        const NodeParams& params = state.node(0, n);
        const auto idx = arch.patch_pixel_indices(n);
        const double* col =
            params.w[0].data() + static_cast<std::size_t>(acts[0][n].winner) * dim;
        for (int k = 0; k < dim; ++k)
            out.values[idx[k]] = static_cast<float>(col[k]);
    }

    if (opts.passthrough_observed && query.has_missing()) {
        for (std::size_t i = 0; i < query.values.size(); ++i)
            if (!query.pixel_missing(static_cast<int>(i)))
                out.values[i] = query.values[i];
    }
    return out;
}

SweepResult encode_ml(const ModelState& state, const Pattern& pattern) {
    return ff_sweep(state, pattern);
}

} // namespace sqhn
