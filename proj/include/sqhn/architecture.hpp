#pragma once

#include <vector>

#include "sqhn/types.hpp"

namespace sqhn {

/// One hidden layer of the tree: every node in the layer has the same
/// receptive-field kernel and the same neuron capacity.
struct LayerSpec {
    int kernel_h = 0;
    int kernel_w = 0;
    int neurons = 0; // J, max neurons per node

    bool operator==(const LayerSpec&) const = default;
};

/// Static description of the tree.
///
/// Layer 0 is the bottom hidden layer; its nodes tile the input image with
/// non-overlapping kernel_h x kernel_w patches (all channels). Each layer
/// above tiles the node grid of the layer below. The top layer must reduce
/// to a single node, the memory/root node.
struct Architecture {
    Shape input;
    std::vector<LayerSpec> layers;

    double alpha = 10.0;      // growth prior strength, > 0
    double gamma_grow = 1.0;  // growth likelihood scale, (0,1]
    double lambda_fb = 0.5;   // feedback mixing weight, [0,1]

    int num_layers() const { return static_cast<int>(layers.size()); }
    int root_layer() const { return num_layers() - 1; }

    /// Node grid dims at a layer (after all kernels up to it applied).
    int grid_h(int layer) const;
    int grid_w(int layer) const;
    int nodes_at(int layer) const { return grid_h(layer) * grid_w(layer); }

    /// Children per node: image patch counts as one child at layer 0.
    int children_of(int layer) const {
        return layer == 0 ? 1 : layers[layer].kernel_h * layers[layer].kernel_w;
    }

    /// Dim of one child value vector: pixels for layer 0, J below otherwise.
    int child_dim(int layer) const {
        return layer == 0 ? patch_dim() : layers[layer - 1].neurons;
    }

    int patch_dim() const {
        return input.channels * layers[0].kernel_h * layers[0].kernel_w;
    }

    int node_index(int layer, int gy, int gx) const { return gy * grid_w(layer) + gx; }

    /// Child node index (in layer-1) for child slot c of node n at `layer` >= 1.
    /// Slots run row-major over the kernel.
    int child_node(int layer, int node, int slot) const;

    /// Flat pixel indices covered by bottom node n, ordered channel-major
    /// then row-major within the patch. Defines the patch vector layout
    /// shared by tiling, similarity, and reconstruction.
    std::vector<int> patch_pixel_indices(int node) const;

    /// Throws std::invalid_argument when kernels do not tile the input (or
    /// the grids below) exactly, the top grid is not 1x1, or any
    /// hyperparameter is out of range.
    void validate() const;

    bool operator==(const Architecture&) const = default;
};

} // namespace sqhn
