#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "sqhn/checkpoint.hpp"
#include "sqhn/datasets.hpp"
#include "sqhn/learning.hpp"
#include "sqhn/rng.hpp"

using namespace sqhn;

namespace {

std::string temp_path(const char* name) {
    return std::string("./") + name;
}

std::vector<char> slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    return std::vector<char>(std::istreambuf_iterator<char>(is), {});
}

} // namespace

TEST_CASE("tensor files round-trip bit-exactly") {
    Rng rng(10);
    PatternBatch batch;
    batch.shape = {3, 4, 5};
    for (int i = 0; i < 7; ++i) {
        std::vector<float> v(batch.shape.size());
        for (auto& x : v) x = static_cast<float>(rng.uniform());
        batch.images.push_back(std::move(v));
        batch.labels.push_back(static_cast<std::uint32_t>(i % 3));
    }

    const std::string path = temp_path("roundtrip.sqd");
    save_tensor_file(path, batch);
    const PatternBatch loaded = load_tensor_file(path);
    CHECK(loaded.shape == batch.shape);
    CHECK(loaded.images == batch.images);
    CHECK(loaded.labels == batch.labels);

    const std::string path2 = temp_path("roundtrip2.sqd");
    save_tensor_file(path2, loaded);
    CHECK(slurp(path) == slurp(path2));
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("empty tensor files round-trip") {
    PatternBatch batch;
    batch.shape = {1, 2, 2};
    const std::string path = temp_path("empty.sqd");
    save_tensor_file(path, batch);
    const PatternBatch loaded = load_tensor_file(path);
    CHECK(loaded.size() == 0);
    CHECK(loaded.shape == batch.shape);
    std::remove(path.c_str());
}

TEST_CASE("corrupt magic and truncated payloads are rejected") {
    const std::string path = temp_path("bad.sqd");
    {
        std::ofstream os(path, std::ios::binary);
        os << "NOPE" << std::string(20, '\0');
    }
    CHECK_THROWS_AS(load_tensor_file(path), std::runtime_error);

    // valid header claiming more data than the file holds
    PatternBatch batch;
    batch.shape = {1, 2, 2};
    batch.images = {{0.1f, 0.2f, 0.3f, 0.4f}};
    save_tensor_file(path, batch);
    auto bytes = slurp(path);
    bytes.pop_back();
    {
        std::ofstream os(path, std::ios::binary);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    CHECK_THROWS_AS(load_tensor_file(path), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("synthetic generators hit their documented transforms") {
    SynthSpec spec;
    spec.kind = SynthKind::Smooth;
    spec.n = 3;
    spec.shape = {1, 2, 2};
    spec.seed = 4;

    SUBCASE("n=0 gives an empty batch") {
        spec.n = 0;
        CHECK(synth_generate(spec).size() == 0);
    }
    SUBCASE("dark transform halves all-ones to all-0.5") {
        PatternBatch batch;
        batch.shape = spec.shape;
        batch.images = {{1.0f, 1.0f, 1.0f, 1.0f}};
        apply_transform(batch, DomainTransform::Dark);
        for (float v : batch.images[0]) CHECK(v == 0.5f);
    }
    SUBCASE("bright-flip maps 0 to 1") {
        PatternBatch batch;
        batch.shape = spec.shape;
        batch.images = {{0.0f, 0.0f, 0.0f, 0.0f}};
        apply_transform(batch, DomainTransform::BrightFlip);
        for (float v : batch.images[0]) CHECK(v == 1.0f);
    }
    SUBCASE("clustered patterns stay near their class prototype") {
        spec.kind = SynthKind::Clustered;
        spec.n = 12;
        spec.classes = 3;
        spec.noise_sd = 0.01;
        const PatternBatch batch = synth_generate(spec);
        REQUIRE(batch.size() == 12);
        // same-class patterns are much closer than cross-class ones
        auto dist = [&](int a, int b) {
            double d = 0;
            for (int i = 0; i < 4; ++i) {
                const double diff = batch.images[a][i] - batch.images[b][i];
                d += diff * diff;
            }
            return d;
        };
        CHECK(batch.labels[0] == batch.labels[1]);
        CHECK(dist(0, 1) < 0.01);
    }
    SUBCASE("orthogonal patterns are binary") {
        spec.kind = SynthKind::Orthogonal;
        const PatternBatch batch = synth_generate(spec);
        for (const auto& img : batch.images)
            for (float v : img) CHECK((v == 0.0f || v == 1.0f));
    }
}

TEST_CASE("stream orders cover each datum exactly once") {
    PatternBatch batch;
    batch.shape = {1, 1, 1};
    for (int i = 0; i < 12; ++i) {
        batch.images.push_back({static_cast<float>(i) / 12.0f});
        batch.labels.push_back(static_cast<std::uint32_t>(i % 3));
    }

    for (const StreamMode mode : {StreamMode::Iid, StreamMode::Oci}) {
        const auto order = make_stream_order(batch, {mode, 99});
        std::vector<int> sorted = order;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < 12; ++i) CHECK(sorted[i] == i);
    }

    SUBCASE("oci emits whole label blocks in ascending label order") {
        const auto order = make_stream_order(batch, {StreamMode::Oci, 5});
        for (int i = 0; i < 12; ++i)
            CHECK(batch.labels[order[i]] == static_cast<std::uint32_t>(i / 4));
    }
    SUBCASE("single-class batches make oci a plain shuffle") {
        PatternBatch one;
        one.shape = batch.shape;
        for (int i = 0; i < 6; ++i) {
            one.images.push_back({0.5f});
            one.labels.push_back(7);
        }
        const auto iid = make_stream_order(one, {StreamMode::Iid, 3});
        const auto oci = make_stream_order(one, {StreamMode::Oci, 3});
        CHECK(iid == oci);
    }
}

TEST_CASE("odi concatenation keeps domains contiguous") {
    std::vector<PatternBatch> domains(4);
    for (int d = 0; d < 4; ++d) {
        domains[d].shape = {1, 1, 2};
        for (int i = 0; i < 3; ++i)
            domains[d].images.push_back({static_cast<float>(d) / 4.0f, static_cast<float>(i)});
    }
    std::vector<std::uint32_t> ids;
    const PatternBatch combined = concat_domains(domains, &ids);
    REQUIRE(combined.size() == 12);
    const auto order = make_stream_order(combined, {StreamMode::Odi, 17});
    for (int i = 0; i < 12; ++i) CHECK(ids[order[i]] == static_cast<std::uint32_t>(i / 3));
}

TEST_CASE("tile/untile is an exact round trip") {
    Architecture arch;
    arch.input = {1, 8, 8};
    arch.layers = {{2, 2, 4}, {4, 4, 4}};
    arch.validate();

    Rng rng(6);
    Pattern p{arch.input, std::vector<float>(64), {}};
    for (auto& v : p.values) v = static_cast<float>(rng.uniform());

    const auto patches = tile(p, arch);
    CHECK(patches.size() == 16);
    CHECK(patches[0].size() == 4);
    const Pattern back = untile(patches, arch);
    CHECK(back.values == p.values);

    SUBCASE("shape mismatch is rejected") {
        Pattern wrong{{1, 4, 4}, std::vector<float>(16, 0.0f), {}};
        CHECK_THROWS_AS(tile(wrong, arch), std::invalid_argument);
    }
}

TEST_CASE("checkpoints round-trip byte-for-byte") {
    Architecture arch;
    arch.input = {1, 4, 4};
    arch.layers = {{2, 2, 6}, {2, 2, 6}};
    arch.alpha = 25.0;
    arch.gamma_grow = 0.9;
    ModelState state = build(arch);

    Rng rng(77);
    const LearnConfig cfg{.alpha = 25.0, .gamma_grow = 0.9};
    for (int i = 0; i < 9; ++i) {
        std::vector<float> v(16);
        for (auto& x : v) x = static_cast<float>(rng.uniform());
        train_step(state, Pattern{arch.input, std::move(v), {}}, cfg);
    }

    const std::string a = temp_path("model_a.sqhn");
    const std::string b = temp_path("model_b.sqhn");
    save_checkpoint(a, state);
    const ModelState loaded = load_checkpoint(a);
    save_checkpoint(b, loaded);
    CHECK(slurp(a) == slurp(b));

    CHECK(loaded.arch() == state.arch());
    CHECK(loaded.iteration() == state.iteration());
    CHECK(loaded.root().grown == state.root().grown);
    CHECK(loaded.root().counts == state.root().counts);

    std::remove(a.c_str());
    std::remove(b.c_str());

    SUBCASE("non-checkpoint files are rejected") {
        const std::string bad = temp_path("bad.sqhn");
        std::ofstream os(bad, std::ios::binary);
        os << "JUNKJUNKJUNK";
        os.close();
        CHECK_THROWS_AS(load_checkpoint(bad), std::runtime_error);
        std::remove(bad.c_str());
    }
}

TEST_CASE("idx image/label pairs convert to unit-range batches") {
    const std::string imgs = temp_path("imgs.idx");
    const std::string labels = temp_path("labels.idx");
    {
        std::ofstream os(imgs, std::ios::binary);
        const unsigned char header[] = {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 3};
        os.write(reinterpret_cast<const char*>(header), sizeof(header));
        for (int i = 0; i < 12; ++i) {
            const unsigned char b = static_cast<unsigned char>(i * 20);
            os.write(reinterpret_cast<const char*>(&b), 1);
        }
    }
    {
        std::ofstream os(labels, std::ios::binary);
        const unsigned char header[] = {0, 0, 8, 1, 0, 0, 0, 2};
        os.write(reinterpret_cast<const char*>(header), sizeof(header));
        const unsigned char vals[] = {4, 9};
        os.write(reinterpret_cast<const char*>(vals), 2);
    }

    const PatternBatch batch = load_idx(imgs, labels);
    REQUIRE(batch.size() == 2);
    CHECK(batch.shape == Shape{1, 2, 3});
    CHECK(batch.images[0][0] == 0.0f);
    CHECK(batch.images[0][1] == doctest::Approx(20.0 / 255.0));
    CHECK(batch.images[1][5] == doctest::Approx(220.0 / 255.0));
    CHECK(batch.labels == std::vector<std::uint32_t>{4, 9});

    CHECK_THROWS_AS(load_idx(labels), std::runtime_error); // wrong magic

    std::remove(imgs.c_str());
    std::remove(labels.c_str());
}

TEST_CASE("manifests parse path,label,domain rows") {
    const std::string path = temp_path("manifest.csv");
    {
        std::ofstream os(path);
        os << "# comment line\n";
        os << "a.sqd,0,0\n";
        os << "b.sqd,1,0\n";
        os << "c.sqd,0,1\n";
    }
    const auto entries = load_manifest(path);
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].path == "a.sqd");
    CHECK(entries[1].label == 1);
    CHECK(entries[2].domain == 1);
    std::remove(path.c_str());
}
