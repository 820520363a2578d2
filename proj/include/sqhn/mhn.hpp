#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sqhn/types.hpp"

namespace sqhn {

enum class MhnSimilarity { Dot, Manhattan, Cosine };

/// How a query's missing pixels enter the similarity. Exclude drops them
/// from the score; ZeroFill keeps them at value 0, which is how the batch
/// Hopfield baselines are usually queried on masked inputs.
enum class MhnMissing { Exclude, ZeroFill };

/// Batch modern Hopfield baseline: stored patterns sit verbatim in the
/// columns of a memory matrix, recall is M softmax(beta * scores).
/// Immutable after construction; concurrent queries are safe.
class MemoryMatrix {
public:
    MemoryMatrix() = default;
    MemoryMatrix(int dim, std::vector<std::vector<float>> columns, double beta = 10000.0,
                 MhnSimilarity sim = MhnSimilarity::Dot);

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(columns_.size()); }
    double beta() const { return beta_; }
    MhnSimilarity similarity() const { return sim_; }
    const std::vector<float>& column(int k) const { return columns_[k]; }

private:
    int dim_ = 0;
    std::vector<std::vector<float>> columns_;
    double beta_ = 10000.0;
    MhnSimilarity sim_ = MhnSimilarity::Dot;
};

/// Store a batch as memory columns, order preserved, duplicates kept.
MemoryMatrix store_batch(const PatternBatch& batch, double beta = 10000.0,
                         MhnSimilarity sim = MhnSimilarity::Dot);

/// Softmax recall. beta=0 degenerates to the column mean; large beta is
/// effectively nearest-neighbor retrieval under the chosen similarity.
std::vector<float> recall_mhn(const MemoryMatrix& memory, std::span<const float> query,
                              std::span<const std::uint8_t> missing = {},
                              MhnMissing missing_mode = MhnMissing::Exclude);

} // namespace sqhn
