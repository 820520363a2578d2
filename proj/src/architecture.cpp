#include "sqhn/architecture.hpp"

#include <string>

namespace sqhn {

int Architecture::grid_h(int layer) const {
    int g = input.height;
    for (int l = 0; l <= layer; ++l) g /= layers[l].kernel_h;
    return g;
}

int Architecture::grid_w(int layer) const {
    int g = input.width;
    for (int l = 0; l <= layer; ++l) g /= layers[l].kernel_w;
    return g;
}

int Architecture::child_node(int layer, int node, int slot) const {
    const int kw = layers[layer].kernel_w;
    const int gy = node / grid_w(layer);
    const int gx = node % grid_w(layer);
    const int cy = gy * layers[layer].kernel_h + slot / kw;
    const int cx = gx * kw + slot % kw;
    return cy * grid_w(layer - 1) + cx;
}

std::vector<int> Architecture::patch_pixel_indices(int node) const {
    const int kh = layers[0].kernel_h;
    const int kw = layers[0].kernel_w;
    const int gy = node / grid_w(0);
    const int gx = node % grid_w(0);
    std::vector<int> idx;
    idx.reserve(patch_dim());
    for (int c = 0; c < input.channels; ++c)
        for (int dy = 0; dy < kh; ++dy)
            for (int dx = 0; dx < kw; ++dx) {
                const int y = gy * kh + dy;
                const int x = gx * kw + dx;
                idx.push_back((c * input.height + y) * input.width + x);
            }
    return idx;
}

void Architecture::validate() const {
    if (input.channels <= 0 || input.height <= 0 || input.width <= 0)
        throw std::invalid_argument("architecture: input shape must be positive");
    if (layers.empty())
        throw std::invalid_argument("architecture: at least one hidden layer required");

    int gh = input.height;
    int gw = input.width;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const LayerSpec& spec = layers[l];
        if (spec.kernel_h <= 0 || spec.kernel_w <= 0)
            throw std::invalid_argument("architecture: kernel dims must be positive (layer " +
                                        std::to_string(l) + ")");
        if (spec.neurons <= 0)
            throw std::invalid_argument("architecture: neuron capacity must be positive (layer " +
                                        std::to_string(l) + ")");
        if (gh % spec.kernel_h != 0 || gw % spec.kernel_w != 0)
            throw std::invalid_argument("architecture: kernel " + std::to_string(spec.kernel_h) +
                                        "x" + std::to_string(spec.kernel_w) +
                                        " does not evenly tile grid " + std::to_string(gh) + "x" +
                                        std::to_string(gw) + " (layer " + std::to_string(l) + ")");
        gh /= spec.kernel_h;
        gw /= spec.kernel_w;
    }
    if (gh != 1 || gw != 1)
        throw std::invalid_argument("architecture: top layer must reduce to a single root node, got grid " +
                                    std::to_string(gh) + "x" + std::to_string(gw));

    if (!(alpha > 0.0))
        throw std::invalid_argument("architecture: alpha must be > 0");
    if (!(gamma_grow > 0.0) || gamma_grow > 1.0)
        throw std::invalid_argument("architecture: gamma_grow must be in (0,1]");
    if (lambda_fb < 0.0 || lambda_fb > 1.0)
        throw std::invalid_argument("architecture: lambda_fb must be in [0,1]");
}

} // namespace sqhn
