#include "sqhn/datasets.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sqhn {

namespace {

constexpr char kMagic[4] = {'S', 'Q', 'D', '1'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(os, bits);
}

float read_f32(std::istream& is) {
    const std::uint32_t bits = read_u32(is);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

} // namespace

void save_tensor_file(const std::string& path, const PatternBatch& batch) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    write_u32(os, static_cast<std::uint32_t>(batch.size()));
    write_u32(os, static_cast<std::uint32_t>(batch.shape.channels));
    write_u32(os, static_cast<std::uint32_t>(batch.shape.height));
    write_u32(os, static_cast<std::uint32_t>(batch.shape.width));
    for (const auto& img : batch.images) {
        if (static_cast<int>(img.size()) != batch.shape.size())
            throw std::invalid_argument("save_tensor_file: image size mismatch");
        for (float v : img) write_f32(os, v);
    }
    if (batch.has_labels()) {
        if (batch.labels.size() != batch.size())
            throw std::invalid_argument("save_tensor_file: label count mismatch");
        for (std::uint32_t l : batch.labels) write_u32(os, l);
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

PatternBatch load_tensor_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);

    is.seekg(0, std::ios::end);
    const std::streamoff file_size = is.tellg();
    is.seekg(0, std::ios::beg);

    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a SQD1 tensor file: " + path);
    const std::uint32_t version = read_u32(is);
    if (version != kVersion)
        throw std::runtime_error("unsupported tensor file version in " + path);

    PatternBatch batch;
    const std::uint32_t n = read_u32(is);
    batch.shape.channels = static_cast<int>(read_u32(is));
    batch.shape.height = static_cast<int>(read_u32(is));
    batch.shape.width = static_cast<int>(read_u32(is));

    const std::uint64_t d = static_cast<std::uint64_t>(batch.shape.size());
    const std::uint64_t header = 4 + 4 + 4 * 4;
    const std::uint64_t values_bytes = 4ull * n * d;
    const std::uint64_t without_labels = header + values_bytes;
    const std::uint64_t with_labels = without_labels + 4ull * n;

    bool has_labels;
    if (static_cast<std::uint64_t>(file_size) == without_labels)
        has_labels = false;
    else if (static_cast<std::uint64_t>(file_size) == with_labels)
        has_labels = true;
    else
        throw std::runtime_error("tensor file header inconsistent with payload length: " + path);

    batch.images.resize(n, std::vector<float>(d));
    for (auto& img : batch.images)
        for (auto& v : img) v = read_f32(is);
    if (has_labels) {
        batch.labels.resize(n);
        for (auto& l : batch.labels) l = read_u32(is);
    }
    if (!is) throw std::runtime_error("truncated tensor file: " + path);
    return batch;
}

namespace {

std::uint32_t read_u32_be(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

} // namespace

PatternBatch load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream is(images_path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + images_path);
    if (read_u32_be(is) != 0x00000803u)
        throw std::runtime_error("not an idx3-ubyte image file: " + images_path);
    const std::uint32_t n = read_u32_be(is);
    const std::uint32_t rows = read_u32_be(is);
    const std::uint32_t cols = read_u32_be(is);

    PatternBatch batch;
    batch.shape = {1, static_cast<int>(rows), static_cast<int>(cols)};
    batch.images.resize(n, std::vector<float>(rows * cols));
    std::vector<unsigned char> buf(rows * cols);
    for (auto& img : batch.images) {
        is.read(reinterpret_cast<char*>(buf.data()), buf.size());
        for (std::size_t i = 0; i < buf.size(); ++i)
            img[i] = static_cast<float>(buf[i]) / 255.0f;
    }
    if (!is) throw std::runtime_error("truncated idx image file: " + images_path);

    if (!labels_path.empty()) {
        std::ifstream ls(labels_path, std::ios::binary);
        if (!ls) throw std::runtime_error("cannot open: " + labels_path);
        if (read_u32_be(ls) != 0x00000801u)
            throw std::runtime_error("not an idx1-ubyte label file: " + labels_path);
        if (read_u32_be(ls) != n)
            throw std::runtime_error("idx label count does not match images");
        batch.labels.resize(n);
        for (auto& l : batch.labels) {
            unsigned char b;
            ls.read(reinterpret_cast<char*>(&b), 1);
            l = b;
        }
        if (!ls) throw std::runtime_error("truncated idx label file: " + labels_path);
    }
    return batch;
}

PatternBatch synth_generate(const SynthSpec& spec) {
    if (spec.n < 0) throw std::invalid_argument("synth_generate: n must be >= 0");
    if (spec.classes < 1) throw std::invalid_argument("synth_generate: classes must be >= 1");

    Rng rng(spec.seed);
    PatternBatch batch;
    batch.shape = spec.shape;
    const int d = spec.shape.size();
    batch.images.reserve(spec.n);
    batch.labels.reserve(spec.n);

    std::vector<std::vector<float>> prototypes;
    if (spec.kind == SynthKind::Clustered) {
        prototypes.resize(spec.classes, std::vector<float>(d));
        for (auto& proto : prototypes)
            for (auto& v : proto) v = static_cast<float>(rng.uniform());
    }

    const int per_class = spec.classes > 0 ? (spec.n + spec.classes - 1) / spec.classes : spec.n;
    for (int i = 0; i < spec.n; ++i) {
        const int cls = std::min(i / std::max(1, per_class), spec.classes - 1);
        std::vector<float> img(d);
        switch (spec.kind) {
            case SynthKind::Orthogonal:
                for (auto& v : img) v = rng.bernoulli(0.5) ? 1.0f : 0.0f;
                break;
            case SynthKind::Clustered:
                for (int k = 0; k < d; ++k) {
                    const double v = prototypes[cls][k] + rng.normal(0.0, spec.noise_sd);
                    img[k] = static_cast<float>(std::min(1.0, std::max(0.0, v)));
                }
                break;
            case SynthKind::Smooth:
                for (auto& v : img) v = static_cast<float>(rng.uniform());
                break;
        }
        batch.images.push_back(std::move(img));
        batch.labels.push_back(static_cast<std::uint32_t>(cls));
    }

    apply_transform(batch, spec.transform);
    return batch;
}

void apply_transform(PatternBatch& batch, DomainTransform transform) {
    switch (transform) {
        case DomainTransform::None:
            break;
        case DomainTransform::Dark:
            for (auto& img : batch.images)
                for (auto& v : img) v *= 0.5f;
            break;
        case DomainTransform::BrightFlip:
            for (auto& img : batch.images)
                for (auto& v : img) v = (-v + 1.0f) * 0.5f + 0.5f;
            break;
    }
}

namespace {

// grouped ordering: stable blocks by key ascending, shuffled within each block
std::vector<int> block_order(const std::vector<std::uint32_t>& keys, int n, Rng& rng) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return keys[a] < keys[b]; });
    int lo = 0;
    while (lo < n) {
        int hi = lo;
        while (hi < n && keys[idx[hi]] == keys[idx[lo]]) ++hi;
        for (int i = hi - 1; i > lo; --i) {
            const int j = lo + static_cast<int>(rng.uniform_int(i - lo + 1));
            std::swap(idx[i], idx[j]);
        }
        lo = hi;
    }
    return idx;
}

} // namespace

std::vector<int> make_stream_order(const PatternBatch& batch, const StreamOrder& order) {
    const int n = static_cast<int>(batch.size());
    Rng rng(order.seed);

    switch (order.mode) {
        case StreamMode::Iid: {
            std::vector<int> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            for (int i = n - 1; i > 0; --i) {
                const int j = static_cast<int>(rng.uniform_int(i + 1));
                std::swap(idx[i], idx[j]);
            }
            return idx;
        }
        case StreamMode::Oci:
            if (!batch.has_labels()) throw std::invalid_argument("oci stream requires labels");
            return block_order(batch.labels, n, rng);
        case StreamMode::Odi:
            if (!batch.has_domains())
                throw std::invalid_argument("odi stream requires domain ids (multi-file data)");
            return block_order(batch.domains, n, rng);
    }
    return {};
}

PatternBatch concat_domains(const std::vector<PatternBatch>& domains,
                            std::vector<std::uint32_t>* domain_ids) {
    if (domains.empty()) throw std::invalid_argument("concat_domains: no domains");
    PatternBatch out;
    out.shape = domains[0].shape;
    bool all_labeled = true;
    for (const PatternBatch& b : domains) all_labeled = all_labeled && b.has_labels();
    if (domain_ids) domain_ids->clear();
    for (std::size_t dom = 0; dom < domains.size(); ++dom) {
        const PatternBatch& b = domains[dom];
        if (!(b.shape == out.shape))
            throw std::invalid_argument("concat_domains: shape mismatch across domains");
        for (std::size_t i = 0; i < b.size(); ++i) {
            out.images.push_back(b.images[i]);
            if (all_labeled) out.labels.push_back(b.labels[i]);
            out.domains.push_back(static_cast<std::uint32_t>(dom));
            if (domain_ids) domain_ids->push_back(static_cast<std::uint32_t>(dom));
        }
    }
    return out;
}

std::vector<std::vector<float>> tile(const Pattern& pattern, const Architecture& arch) {
    if (pattern.shape != arch.input)
        throw std::invalid_argument("tile: pattern shape does not match architecture");
    std::vector<std::vector<float>> patches(arch.nodes_at(0));
    for (int n = 0; n < arch.nodes_at(0); ++n) {
        const auto idx = arch.patch_pixel_indices(n);
        patches[n].resize(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) patches[n][k] = pattern.values[idx[k]];
    }
    return patches;
}

Pattern untile(const std::vector<std::vector<float>>& patches, const Architecture& arch) {
    if (static_cast<int>(patches.size()) != arch.nodes_at(0))
        throw std::invalid_argument("untile: patch count does not match architecture");
    Pattern out;
    out.shape = arch.input;
    out.values.assign(arch.input.size(), 0.0f);
    for (int n = 0; n < arch.nodes_at(0); ++n) {
        const auto idx = arch.patch_pixel_indices(n);
        if (patches[n].size() != idx.size())
            throw std::invalid_argument("untile: patch dim mismatch");
        for (std::size_t k = 0; k < idx.size(); ++k) out.values[idx[k]] = patches[n][k];
    }
    return out;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open manifest: " + path);
    std::vector<ManifestEntry> entries;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        ManifestEntry e;
        std::string field;
        if (!std::getline(ss, e.path, ',')) continue;
        if (std::getline(ss, field, ',')) e.label = static_cast<std::uint32_t>(std::stoul(field));
        if (std::getline(ss, field, ',')) e.domain = static_cast<std::uint32_t>(std::stoul(field));
        entries.push_back(std::move(e));
    }
    return entries;
}

} // namespace sqhn
