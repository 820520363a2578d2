#include "sqhn/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sqhn {

namespace {

float clamp01(double v) {
    return static_cast<float>(std::min(1.0, std::max(0.0, v)));
}

void add_noise(Pattern& p, double var, Rng& rng) {
    const double sd = std::sqrt(var);
    for (auto& v : p.values) v = clamp01(static_cast<double>(v) + rng.normal(0.0, sd));
}

} // namespace

void occlude_rect(Pattern& p, int x0, int y0, int rect_w, int rect_h, CorruptionKind kind,
                  Rng& rng) {
    const Shape& s = p.shape;
    std::vector<float> fill(s.channels, 0.0f);
    if (kind == CorruptionKind::OcclusionColor)
        for (auto& f : fill) f = static_cast<float>(rng.uniform());
    for (int c = 0; c < s.channels; ++c)
        for (int y = y0; y < y0 + rect_h; ++y)
            for (int x = x0; x < x0 + rect_w; ++x) {
                float v = fill[c];
                if (kind == CorruptionKind::OcclusionNoise)
                    v = clamp01(0.5 + rng.normal(0.0, 1.0));
                p.values[(c * s.height + y) * s.width + x] = v;
            }
}

Pattern apply(const Pattern& input, const Corruption& corruption, Rng& rng) {
    Pattern out = input;
    out.missing.clear();
    const Shape& s = input.shape;
    const int d = s.size();

    switch (corruption.kind) {
        case CorruptionKind::None:
            break;

        case CorruptionKind::WhiteNoise:
        case CorruptionKind::GaussianSample:
            add_noise(out, corruption.param, rng);
            break;

        case CorruptionKind::PixelDropout: {
            const double frac = corruption.param;
            if (frac < 0.0 || frac > 1.0)
                throw std::invalid_argument("corruption: dropout fraction outside [0,1]");
            const int n_drop = static_cast<int>(std::ceil(frac * d));
            out.missing.assign(d, 0);
            // partial Fisher-Yates over pixel indices
            std::vector<int> idx(d);
            std::iota(idx.begin(), idx.end(), 0);
            for (int i = 0; i < n_drop; ++i) {
                const int j = i + static_cast<int>(rng.uniform_int(d - i));
                std::swap(idx[i], idx[j]);
                out.missing[idx[i]] = 1;
            }
            break;
        }

        case CorruptionKind::RightMask: {
            const double frac = corruption.param;
            if (frac < 0.0 || frac > 1.0)
                throw std::invalid_argument("corruption: mask fraction outside [0,1]");
            const int n_cols = static_cast<int>(std::ceil(frac * s.width));
            out.missing.assign(d, 0);
            for (int c = 0; c < s.channels; ++c)
                for (int y = 0; y < s.height; ++y)
                    for (int x = s.width - n_cols; x < s.width; ++x)
                        out.missing[(c * s.height + y) * s.width + x] = 1;
            break;
        }

        case CorruptionKind::OcclusionBlack:
        case CorruptionKind::OcclusionColor:
        case CorruptionKind::OcclusionNoise: {
            // rectangle dims uniform in [1, dim], inclusive of the full image
            const int rect_w = 1 + static_cast<int>(rng.uniform_int(s.width));
            const int rect_h = 1 + static_cast<int>(rng.uniform_int(s.height));
            const int x0 = static_cast<int>(rng.uniform_int(s.width - rect_w + 1));
            const int y0 = static_cast<int>(rng.uniform_int(s.height - rect_h + 1));
            occlude_rect(out, x0, y0, rect_w, rect_h, corruption.kind, rng);
            break;
        }

        case CorruptionKind::BinarySample:
            for (auto& v : out.values) v = rng.bernoulli(v) ? 1.0f : 0.0f;
            break;
    }
    return out;
}

CorruptionKind corruption_kind_from_string(const std::string& name) {
    if (name == "none") return CorruptionKind::None;
    if (name == "white_noise") return CorruptionKind::WhiteNoise;
    if (name == "pixel_dropout") return CorruptionKind::PixelDropout;
    if (name == "right_mask") return CorruptionKind::RightMask;
    if (name == "occlusion_black") return CorruptionKind::OcclusionBlack;
    if (name == "occlusion_color") return CorruptionKind::OcclusionColor;
    if (name == "occlusion_noise") return CorruptionKind::OcclusionNoise;
    if (name == "binary_sample") return CorruptionKind::BinarySample;
    if (name == "gaussian_sample") return CorruptionKind::GaussianSample;
    throw std::invalid_argument("unknown corruption kind: " + name);
}

std::string to_string(CorruptionKind kind) {
    switch (kind) {
        case CorruptionKind::None: return "none";
        case CorruptionKind::WhiteNoise: return "white_noise";
        case CorruptionKind::PixelDropout: return "pixel_dropout";
        case CorruptionKind::RightMask: return "right_mask";
        case CorruptionKind::OcclusionBlack: return "occlusion_black";
        case CorruptionKind::OcclusionColor: return "occlusion_color";
        case CorruptionKind::OcclusionNoise: return "occlusion_noise";
        case CorruptionKind::BinarySample: return "binary_sample";
        case CorruptionKind::GaussianSample: return "gaussian_sample";
    }
    return "none";
}

} // namespace sqhn
