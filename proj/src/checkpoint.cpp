#include "sqhn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sqhn {

namespace {

constexpr char kMagic[4] = {'S', 'Q', 'H', 'N'};
constexpr std::uint32_t kVersion = 1;

struct Writer {
    std::ofstream os;
    explicit Writer(const std::string& path) : os(path, std::ios::binary) {
        if (!os) throw std::runtime_error("cannot open for writing: " + path);
    }
    void u32(std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
        os.write(reinterpret_cast<const char*>(b), 4);
    }
    void u64(std::uint64_t v) {
        u32(static_cast<std::uint32_t>(v));
        u32(static_cast<std::uint32_t>(v >> 32));
    }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
};

struct Reader {
    std::ifstream is;
    explicit Reader(const std::string& path) : is(path, std::ios::binary) {
        if (!is) throw std::runtime_error("cannot open: " + path);
    }
    std::uint32_t u32() {
        unsigned char b[4];
        is.read(reinterpret_cast<char*>(b), 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }
    std::uint64_t u64() {
        const std::uint64_t lo = u32();
        return lo | (static_cast<std::uint64_t>(u32()) << 32);
    }
    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

} // namespace

void save_checkpoint(const std::string& path, const ModelState& state) {
    const Architecture& arch = state.arch();
    Writer w(path);
    w.os.write(kMagic, 4);
    w.u32(kVersion);

    w.u32(static_cast<std::uint32_t>(arch.input.channels));
    w.u32(static_cast<std::uint32_t>(arch.input.height));
    w.u32(static_cast<std::uint32_t>(arch.input.width));
    w.u32(static_cast<std::uint32_t>(arch.num_layers()));
    for (const LayerSpec& l : arch.layers) {
        w.u32(static_cast<std::uint32_t>(l.kernel_h));
        w.u32(static_cast<std::uint32_t>(l.kernel_w));
        w.u32(static_cast<std::uint32_t>(l.neurons));
    }
    w.f64(arch.alpha);
    w.f64(arch.gamma_grow);
    w.f64(arch.lambda_fb);

    for (int l = 0; l < arch.num_layers(); ++l)
        for (int n = 0; n < arch.nodes_at(l); ++n)
            for (const auto& mat : state.node(l, n).w)
                for (double v : mat) w.f32(static_cast<float>(v));

    for (int l = 0; l < arch.num_layers(); ++l)
        for (int n = 0; n < arch.nodes_at(l); ++n)
            for (std::uint64_t c : state.node(l, n).counts) w.u64(c);

    for (double m : state.mu()) w.f32(static_cast<float>(m));

    for (int l = 0; l < arch.num_layers(); ++l)
        for (int n = 0; n < arch.nodes_at(l); ++n) w.u32(state.node(l, n).grown);

    w.u64(state.iteration());
    if (!w.os) throw std::runtime_error("write failed: " + path);
}

ModelState load_checkpoint(const std::string& path) {
    Reader r(path);
    char magic[4];
    r.is.read(magic, 4);
    if (!r.is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not an SQHN checkpoint: " + path);
    if (r.u32() != kVersion)
        throw std::runtime_error("unsupported checkpoint version in " + path);

    Architecture arch;
    arch.input.channels = static_cast<int>(r.u32());
    arch.input.height = static_cast<int>(r.u32());
    arch.input.width = static_cast<int>(r.u32());
    arch.layers.resize(r.u32());
    for (LayerSpec& l : arch.layers) {
        l.kernel_h = static_cast<int>(r.u32());
        l.kernel_w = static_cast<int>(r.u32());
        l.neurons = static_cast<int>(r.u32());
    }
    arch.alpha = r.f64();
    arch.gamma_grow = r.f64();
    arch.lambda_fb = r.f64();

    ModelState state = build(arch);

    for (int l = 0; l < arch.num_layers(); ++l)
        for (int n = 0; n < arch.nodes_at(l); ++n)
            for (auto& mat : state.node(l, n).w)
                for (double& v : mat) v = static_cast<double>(r.f32());

    for (int l = 0; l < arch.num_layers(); ++l)
        for (int n = 0; n < arch.nodes_at(l); ++n)
            for (std::uint64_t& c : state.node(l, n).counts) c = r.u64();

    for (double& m : state.mu()) m = static_cast<double>(r.f32());

    for (int l = 0; l < arch.num_layers(); ++l)
        for (int n = 0; n < arch.nodes_at(l); ++n) state.node(l, n).grown = r.u32();

    state.set_iteration(r.u64());
    if (!r.is) throw std::runtime_error("truncated checkpoint: " + path);
    return state;
}

} // namespace sqhn
