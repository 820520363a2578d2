#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqhn/architecture.hpp"
#include "sqhn/rng.hpp"
#include "sqhn/types.hpp"

namespace sqhn {

// ---------------------------------------------------------------------------
// Tensor file I/O ("SQD1"): magic, version u32, N,C,H,W u32 LE, N*C*H*W f32
// LE values in [0,1], then an optional u32*N label array. Round-trips are
// bit-exact.
// ---------------------------------------------------------------------------

PatternBatch load_tensor_file(const std::string& path);
void save_tensor_file(const std::string& path, const PatternBatch& batch);

/// MNIST-class IDX (idx3-ubyte images, optional idx1-ubyte labels) converter;
/// pixel bytes map to [0,1] as v/255.
PatternBatch load_idx(const std::string& images_path, const std::string& labels_path = "");

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

enum class SynthKind {
    Orthogonal, // random binary pixels: near-orthogonal in the shifted space
    Clustered,  // per-class prototype + clamped gaussian perturbation
    Smooth      // uniform [0,1] pixels
};

enum class DomainTransform {
    None,
    Dark,      // x * 0.5
    BrightFlip // (-x + 1) * 0.5 + 0.5
};

struct SynthSpec {
    SynthKind kind = SynthKind::Orthogonal;
    int n = 0;
    Shape shape;
    int classes = 1; // labels assigned contiguously, n/classes each
    double noise_sd = 0.1; // Clustered perturbation
    DomainTransform transform = DomainTransform::None;
    std::uint64_t seed = 0;
};

PatternBatch synth_generate(const SynthSpec& spec);
void apply_transform(PatternBatch& batch, DomainTransform transform);

// ---------------------------------------------------------------------------
// Stream ordering (single pass, each datum exactly once)
// ---------------------------------------------------------------------------

enum class StreamMode { Iid, Oci, Odi };

struct StreamOrder {
    StreamMode mode = StreamMode::Iid;
    std::uint64_t seed = 0;
};

/// Permutation of batch indices: iid is a global shuffle; oci groups by label
/// (ascending), shuffled within each label block. For odi, order the domain
/// batches before concatenation and use iid per domain.
std::vector<int> make_stream_order(const PatternBatch& batch, const StreamOrder& order);

/// Concatenate domain batches in the given order (odi: one domain at a time,
/// shuffled within each). Returns the combined batch plus per-item domain ids.
PatternBatch concat_domains(const std::vector<PatternBatch>& domains,
                            std::vector<std::uint32_t>* domain_ids = nullptr);

// ---------------------------------------------------------------------------
// Receptive-field tiling
// ---------------------------------------------------------------------------

/// One patch vector per bottom node, in node order; layout matches
/// Architecture::patch_pixel_indices. Throws on shape mismatch.
std::vector<std::vector<float>> tile(const Pattern& pattern, const Architecture& arch);

/// Exact inverse of tile.
Pattern untile(const std::vector<std::vector<float>>& patches, const Architecture& arch);

// ---------------------------------------------------------------------------
// CSV manifest (path,label,domain) for multi-file experiments
// ---------------------------------------------------------------------------

struct ManifestEntry {
    std::string path;
    std::uint32_t label = 0;
    std::uint32_t domain = 0;
};

std::vector<ManifestEntry> load_manifest(const std::string& path);

} // namespace sqhn
