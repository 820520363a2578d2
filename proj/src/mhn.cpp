#include "sqhn/mhn.hpp"

#include <cmath>
#include <stdexcept>

namespace sqhn {

MemoryMatrix::MemoryMatrix(int dim, std::vector<std::vector<float>> columns, double beta,
                           MhnSimilarity sim)
    : dim_(dim), columns_(std::move(columns)), beta_(beta), sim_(sim) {
    if (beta_ < 0.0) throw std::invalid_argument("mhn: beta must be >= 0");
    for (const auto& col : columns_)
        if (static_cast<int>(col.size()) != dim_)
            throw std::invalid_argument("mhn: column dim mismatch");
}

MemoryMatrix store_batch(const PatternBatch& batch, double beta, MhnSimilarity sim) {
    return MemoryMatrix(batch.shape.size(), batch.images, beta, sim);
}

namespace {

double score_column(const std::vector<float>& col, std::span<const float> query,
                    std::span<const std::uint8_t> missing, MhnMissing mode, MhnSimilarity sim) {
    double dot = 0.0, nm = 0.0, nx = 0.0, manhattan = 0.0;
    for (std::size_t i = 0; i < col.size(); ++i) {
        double q = query[i];
        if (!missing.empty() && missing[i] != 0) {
            if (mode == MhnMissing::Exclude) continue;
            q = 0.0;
        }
        const double m = col[i];
        dot += m * q;
        nm += m * m;
        nx += q * q;
        manhattan += std::abs(m - q);
    }
    switch (sim) {
        case MhnSimilarity::Dot:
            return dot;
        case MhnSimilarity::Manhattan:
            return -manhattan;
        case MhnSimilarity::Cosine: {
            const double denom = std::sqrt(nm) * std::sqrt(nx);
            return denom > 0.0 ? dot / denom : 0.0;
        }
    }
    return 0.0;
}

} // namespace

std::vector<float> recall_mhn(const MemoryMatrix& memory, std::span<const float> query,
                              std::span<const std::uint8_t> missing, MhnMissing missing_mode) {
    if (static_cast<int>(query.size()) != memory.dim())
        throw std::invalid_argument("recall_mhn: query dim mismatch");
    if (memory.size() == 0)
        throw std::invalid_argument("recall_mhn: empty memory");

    std::vector<double> scores(memory.size());
    for (int k = 0; k < memory.size(); ++k)
        scores[k] = score_column(memory.column(k), query, missing, missing_mode,
                                 memory.similarity());

    // stable softmax
    double max_score = scores[0];
    for (double s : scores) max_score = std::max(max_score, s);
    double z = 0.0;
    for (double& s : scores) {
        s = std::exp(memory.beta() * (s - max_score));
        z += s;
    }

    std::vector<double> out(memory.dim(), 0.0);
    for (int k = 0; k < memory.size(); ++k) {
        const double w = scores[k] / z;
        if (w == 0.0) continue;
        const auto& col = memory.column(k);
        for (int i = 0; i < memory.dim(); ++i) out[i] += w * col[i];
    }

    std::vector<float> result(memory.dim());
    for (int i = 0; i < memory.dim(); ++i) result[i] = static_cast<float>(out[i]);
    return result;
}

} // namespace sqhn
