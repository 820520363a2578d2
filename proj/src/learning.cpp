#include "sqhn/learning.hpp"

#include <cmath>
#include <stdexcept>

#include "sqhn/recognition.hpp"
#include "sqhn/rng.hpp"

namespace sqhn {

double growth_threshold(std::uint64_t t, double alpha, double gamma_grow) {
    return gamma_grow * alpha / (static_cast<double>(t) + 1.0 + alpha);
}

double growth_threshold_main(std::uint64_t t, double alpha) {
    return alpha / (static_cast<double>(t) + alpha);
}

namespace {

// -Grw ablation: no growth operation, weights start random instead of zero.
// Hidden columns are randomized per child block to stay stochastic.
void randomize_weights(ModelState& state, std::uint64_t seed) {
    const Architecture& arch = state.arch();
    Rng rng(seed);
    for (int l = 0; l < arch.num_layers(); ++l) {
        const int dim = arch.child_dim(l);
        const int cap = arch.layers[l].neurons;
        for (int n = 0; n < arch.nodes_at(l); ++n) {
            NodeParams& params = state.node(l, n);
            for (auto& mat : params.w) {
                for (auto& v : mat) v = rng.uniform();
                if (l > 0) {
                    for (int j = 0; j < cap; ++j) {
                        double* col = mat.data() + static_cast<std::size_t>(j) * dim;
                        double sum = 0.0;
                        for (int r = 0; r < dim; ++r) sum += col[r];
                        for (int r = 0; r < dim; ++r) col[r] /= sum;
                    }
                }
            }
            params.grown = static_cast<std::uint32_t>(cap);
        }
    }
}

// Activation the neuron grown this step will produce when the same input is
// re-encoded: its fresh column reproduces the observed child values exactly,
// so the normalized sum collapses to sum(v) / (N * |v|) (1.0 at the bottom).
double replay_activation(const Architecture& arch, const Activations& acts, int layer, int node) {
    if (layer == 0) return 1.0;
    double sum = 0.0, sq = 0.0;
    for (int c = 0; c < arch.children_of(layer); ++c) {
        const double v = acts[layer - 1][arch.child_node(layer, node, c)].up_value;
        sum += v;
        sq += v * v;
    }
    if (sq <= 0.0) return 0.0;
    return sum / (arch.children_of(layer) * std::sqrt(sq));
}

} // namespace

StepSummary train_step(ModelState& state, const Pattern& pattern, const LearnConfig& cfg,
                       const StepSummary* pinned) {
    const Architecture& arch = state.arch();
    if (pattern.shape != arch.input)
        throw std::invalid_argument("train_step: pattern shape does not match architecture input");

    if (cfg.growth_mode == GrowthMode::Disabled && state.iteration() == 0 && !state.trained())
        randomize_weights(state, cfg.init_seed);

    StepSummary summary;
    summary.winners.resize(arch.num_layers());
    summary.grew.resize(arch.num_layers());
    summary.capacity_fallback.resize(arch.num_layers());
    for (int l = 0; l < arch.num_layers(); ++l) {
        summary.winners[l].assign(arch.nodes_at(l), -1);
        summary.grew[l].assign(arch.nodes_at(l), 0);
        summary.capacity_fallback[l].assign(arch.nodes_at(l), 0);
    }

    double eps = 0.0;
    switch (cfg.growth_mode) {
        case GrowthMode::DirichletDecay:
            eps = cfg.main_text_threshold ? growth_threshold_main(state.iteration(), cfg.alpha)
                                          : growth_threshold(state.iteration(), cfg.alpha,
                                                             cfg.gamma_grow);
            break;
        case GrowthMode::Constant:
            eps = cfg.growth_eps0;
            break;
        case GrowthMode::Disabled:
            eps = 0.0;
            break;
    }
    summary.epsilon = eps;

    Activations acts(arch.num_layers());
    for (int l = 0; l < arch.num_layers(); ++l) acts[l].resize(arch.nodes_at(l));

    if (pinned) {
        if (pinned->winners.size() != static_cast<std::size_t>(arch.num_layers()))
            throw std::invalid_argument("train_step: pinned assignments do not match architecture");
        for (int l = 0; l < arch.num_layers(); ++l)
            for (int n = 0; n < arch.nodes_at(l); ++n) {
                const int j = pinned->winners[l][n];
                if (j < 0 || j >= static_cast<int>(state.node(l, n).grown))
                    throw std::invalid_argument("train_step: pinned winner out of range");
                acts[l][n].winner = j;
                summary.winners[l][n] = j;
            }
    } else {
        // bottom-up max-likelihood inference, growing neurons as we go
        for (int l = 0; l < arch.num_layers(); ++l) {
            const int dim = arch.child_dim(l);
            const bool growth_here =
                cfg.growth_mode != GrowthMode::Disabled && (!cfg.root_only || l == arch.root_layer());
            for (int n = 0; n < arch.nodes_at(l); ++n) {
                NodeParams& params = state.node(l, n);
                NodeActivations& a = acts[l][n];
                if (l == 0) {
                    const auto idx = arch.patch_pixel_indices(n);
                    a.h = ff_bottom(params, pattern.values, idx, pattern.missing);
                } else {
                    std::vector<ChildMax> children(arch.children_of(l));
                    for (int c = 0; c < arch.children_of(l); ++c) {
                        const NodeActivations& ch = acts[l - 1][arch.child_node(l, n, c)];
                        children[c] = {ch.winner, ch.up_value};
                    }
                    a.h = ff_hidden(params, children, dim);
                }

                int best = -1;
                double best_val = 0.0;
                for (std::uint32_t j = 0; j < params.grown; ++j) {
                    if (best < 0 || a.h[j] > best_val) {
                        best = static_cast<int>(j);
                        best_val = a.h[j];
                    }
                }

                const bool wants_new = params.grown == 0 || (growth_here && best_val < eps);
                if (wants_new && growth_here &&
                    params.grown < static_cast<std::uint32_t>(arch.layers[l].neurons)) {
                    a.winner = static_cast<int>(params.grown);
                    a.max_val = best < 0 ? 0.0 : best_val;
                    a.up_value = 1.0; // represents its input exactly after this step's update
                    params.grown += 1;
                    summary.grew[l][n] = 1;
                    ++summary.grown_count;
                } else {
                    if (best < 0)
                        throw std::runtime_error("train_step: node has no neurons and growth is disabled");
                    a.winner = best;
                    a.max_val = best_val;
                    a.up_value = best_val;
                    if (wants_new) {
                        summary.capacity_fallback[l][n] = 1;
                        ++summary.fallback_count;
                    }
                }
                summary.winners[l][n] = a.winner;
            }
        }
    }

    summary.pre_energy = energy(state, acts, pattern);

    // local column updates: exactly one column per edge, step 1/(c+1)
    for (int l = 0; l < arch.num_layers(); ++l) {
        if (cfg.root_only && l != arch.root_layer()) continue;
        const int dim = arch.child_dim(l);
        for (int n = 0; n < arch.nodes_at(l); ++n) {
            NodeParams& params = state.node(l, n);
            const int j = acts[l][n].winner;
            const bool fresh = summary.grew[l][n] != 0;
            const double step = cfg.lr_mode == LrMode::CountDecay
                                    ? 1.0 / (static_cast<double>(params.counts[j]) + 1.0)
                                    : cfg.lr_eta;
            if (cfg.averaging || fresh) {
                if (l == 0) {
                    const auto idx = arch.patch_pixel_indices(n);
                    double* col = params.w[0].data() + static_cast<std::size_t>(j) * dim;
                    for (int k = 0; k < dim; ++k) {
                        if (pattern.pixel_missing(idx[k])) continue;
                        col[k] += step * (static_cast<double>(pattern.values[idx[k]]) - col[k]);
                    }
                } else {
                    for (int c = 0; c < arch.children_of(l); ++c) {
                        const int child_winner = acts[l - 1][arch.child_node(l, n, c)].winner;
                        double* col = params.w[c].data() + static_cast<std::size_t>(j) * dim;
                        for (int r = 0; r < dim; ++r) {
                            const double target = r == child_winner ? 1.0 : 0.0;
                            col[r] += step * (target - col[r]);
                        }
                    }
                }
            }
            params.counts[j] += 1;
        }
    }

    // root moving average; a grown neuron records the Dirichlet new-value
    // energy estimate scaled to what an exact re-encounter would produce,
    // keeping the threshold strictly below that re-encounter activation
    if (!pinned) {
        const int root_l = arch.root_layer();
        const NodeActivations& root_act = acts[root_l][0];
        const int j = root_act.winner;
        const double value = summary.grew[root_l][0] != 0
                                 ? eps * replay_activation(arch, acts, root_l, 0)
                                 : root_act.max_val;
        auto& mu = state.mu();
        mu[j] = update_mu(mu[j], state.root().counts[j], value);
    }

    state.set_iteration(state.iteration() + 1);
    return summary;
}

void train_stream(ModelState& state, std::span<const Pattern> stream, const LearnConfig& cfg,
                  const StepHook& hook) {
    for (std::size_t i = 0; i < stream.size(); ++i) {
        const StepSummary summary = train_step(state, stream[i], cfg);
        if (hook) hook(i, state, summary);
    }
}

} // namespace sqhn
