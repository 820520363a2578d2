#pragma once

#include <string>

#include "sqhn/rng.hpp"
#include "sqhn/types.hpp"

namespace sqhn {

enum class CorruptionKind {
    None,
    WhiteNoise,     // add N(0,var) per pixel, clamp to [0,1]
    PixelDropout,   // mark ceil(frac*d) random pixels missing
    RightMask,      // mark the rightmost frac columns missing
    OcclusionBlack, // random rectangle set to 0
    OcclusionColor, // random rectangle set to one uniform color per channel
    OcclusionNoise, // random rectangle set to clamped unit-variance noise
    BinarySample,   // per-pixel Bernoulli(value)
    GaussianSample  // alias of WhiteNoise (noisy-encoding task)
};

/// Seeded corruption spec. PixelDropout and RightMask produce a missing mask
/// (hetero semantics); the others corrupt values only (auto semantics).
struct Corruption {
    CorruptionKind kind = CorruptionKind::None;
    double param = 0.0; // variance for noise kinds, fraction for mask kinds
};

/// Applies the corruption, drawing from the given stream. param must be a
/// valid fraction for the mask kinds.
Pattern apply(const Pattern& input, const Corruption& corruption, Rng& rng);

/// Occlusion with explicit rectangle geometry, shared by the random-rectangle
/// path and callers that pin the occluded area.
void occlude_rect(Pattern& pattern, int x0, int y0, int rect_w, int rect_h, CorruptionKind kind,
                  Rng& rng);

CorruptionKind corruption_kind_from_string(const std::string& name);
std::string to_string(CorruptionKind kind);

} // namespace sqhn
