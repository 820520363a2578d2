#include "sqhn/recognition.hpp"

#include <stdexcept>

#include "sqhn/inference.hpp"

namespace sqhn {

double update_mu(double mu, std::uint64_t c_post, double value) {
    if (c_post == 0) throw std::invalid_argument("update_mu: count must be >= 1");
    const double c = static_cast<double>(c_post);
    return ((c - 1.0) / c) * mu + value / c;
}

Judgment judge(const ModelState& state, const Pattern& pattern) {
    const SweepResult sweep = encode_ml(state, pattern); // throws if untrained
    const int root_l = state.arch().root_layer();
    const NodeActivations& root = sweep.acts[root_l][0];
    if (state.root().counts[root.winner] == 0)
        throw std::runtime_error("judge: root winner has no recorded activity average");

    Judgment out;
    out.neuron = root.winner;
    out.activation = root.max_val;
    out.threshold = state.mu()[root.winner];
    out.score = out.activation - out.threshold;
    out.is_old = out.activation > out.threshold;
    return out;
}

} // namespace sqhn
