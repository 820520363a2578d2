#pragma once

#include <cstdint>

#include "sqhn/model.hpp"

namespace sqhn {

/// Online moving average: mu' = ((c-1)/c) mu + (1/c) value, with c the
/// post-increment win count. The first observation (c=1) sets mu = value.
double update_mu(double mu, std::uint64_t c_post, double value);

struct Judgment {
    bool is_old = false;
    double score = 0.0; // activation - threshold
    int neuron = -1;    // root winner
    double activation = 0.0;
    double threshold = 0.0;
};

/// Episodic old/new judgment: bottom-up encode (no growth, no feedback), then
/// compare the root winner's activation against its moving-average threshold.
/// Old iff strictly above. Never mutates state; throws on untrained models.
Judgment judge(const ModelState& state, const Pattern& pattern);

} // namespace sqhn
