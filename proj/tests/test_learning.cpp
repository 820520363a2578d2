#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sqhn/inference.hpp"
#include "sqhn/learning.hpp"
#include "sqhn/metrics.hpp"
#include "sqhn/rng.hpp"

using namespace sqhn;

namespace {

Pattern make_pattern(const Shape& shape, std::vector<float> v) {
    return Pattern{shape, std::move(v), {}};
}

std::vector<Pattern> random_binary_patterns(const Shape& shape, int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Pattern> out;
    for (int i = 0; i < n; ++i) {
        std::vector<float> v(shape.size());
        for (auto& x : v) x = rng.bernoulli(0.5) ? 1.0f : 0.0f;
        out.push_back(Pattern{shape, std::move(v), {}});
    }
    return out;
}

Architecture small_l1(int j = 8) {
    Architecture arch;
    arch.input = {1, 2, 2};
    arch.layers = {{2, 2, j}};
    arch.alpha = 1e9;
    return arch;
}

} // namespace

TEST_CASE("growth threshold follows the decaying prior") {
    CHECK(growth_threshold(0, 10.0, 1.0) == doctest::Approx(10.0 / 11.0).epsilon(1e-12));
    CHECK(growth_threshold(1000000000ull, 10.0, 1.0) < 1e-7); // -> 0
    CHECK(growth_threshold(5, 1e9, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(growth_threshold(3, 8.0, 0.5) == doctest::Approx(0.5 * 8.0 / 12.0).epsilon(1e-12));
    CHECK(growth_threshold_main(0, 10.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(growth_threshold_main(10, 10.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("first pattern grows neuron 0 everywhere and is recalled exactly") {
    Architecture arch;
    arch.input = {1, 4, 4};
    arch.layers = {{2, 2, 4}, {2, 2, 4}};
    arch.alpha = 1e9;
    ModelState state = build(arch);

    Rng rng(1);
    std::vector<float> v(16);
    for (auto& x : v) x = static_cast<float>(rng.uniform());
    const Pattern p = make_pattern(arch.input, v);

    const StepSummary summary = train_step(state, p, LearnConfig{.alpha = 1e9});
    for (int l = 0; l < arch.num_layers(); ++l)
        for (int n = 0; n < arch.nodes_at(l); ++n) {
            CHECK(summary.winners[l][n] == 0);
            CHECK(summary.grew[l][n] == 1);
            CHECK(state.node(l, n).grown == 1);
        }

    const Pattern out = recall(state, p);
    CHECK(recall_mse(p.values, out.values) < 1e-10);
}

TEST_CASE("two patches assigned to one neuron average arithmetically") {
    const Architecture arch = small_l1(2);
    ModelState state = build(arch);
    const Pattern p1 = make_pattern(arch.input, {0.2f, 0.8f, 0.4f, 0.6f});
    const Pattern p2 = make_pattern(arch.input, {0.6f, 0.2f, 0.8f, 0.0f});

    // force both onto neuron 0 by disabling further growth (tiny alpha)
    LearnConfig cfg;
    cfg.alpha = 1e-12;
    train_step(state, p1, cfg);
    REQUIRE(state.root().grown == 1);
    train_step(state, p2, cfg);
    REQUIRE(state.root().grown == 1);

    for (int i = 0; i < 4; ++i) {
        const double mean = 0.5 * (static_cast<double>(p1.values[i]) + p2.values[i]);
        CHECK(state.root().w[0][i] == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("J distinct patterns with a huge alpha are all memorized one-shot") {
    Architecture arch;
    arch.input = {1, 4, 8};
    arch.layers = {{4, 8, 16}};
    arch.alpha = 1e9;
    ModelState state = build(arch);
    const auto patterns = random_binary_patterns(arch.input, 16, 42);

    const LearnConfig cfg{.alpha = 1e9};
    for (int i = 0; i < 16; ++i) {
        train_step(state, patterns[i], cfg);
        // one-shot memorization: everything seen so far recalls exactly
        for (int k = 0; k <= i; ++k) {
            const Pattern out = recall(state, patterns[k]);
            CHECK(recall_mse(patterns[k].values, out.values) < 1e-10);
        }
    }
    CHECK(state.root().grown == 16);
}

TEST_CASE("each step touches exactly one column per edge") {
    Architecture arch;
    arch.input = {1, 4, 4};
    arch.layers = {{2, 2, 8}, {2, 2, 8}};
    arch.alpha = 4.0;
    ModelState state = build(arch);
    const auto patterns = random_binary_patterns(arch.input, 10, 7);
    const LearnConfig cfg{.alpha = 4.0};
    for (int i = 0; i < 6; ++i) train_step(state, patterns[i], cfg);

    // snapshot, step, diff
    std::vector<std::vector<NodeParams>> before;
    for (int l = 0; l < arch.num_layers(); ++l) {
        before.emplace_back();
        for (int n = 0; n < arch.nodes_at(l); ++n) before[l].push_back(state.node(l, n));
    }
    const StepSummary summary = train_step(state, patterns[7], cfg);

    for (int l = 0; l < arch.num_layers(); ++l) {
        const int dim = arch.child_dim(l);
        for (int n = 0; n < arch.nodes_at(l); ++n) {
            const NodeParams& old_node = before[l][n];
            const NodeParams& new_node = state.node(l, n);
            for (std::size_t c = 0; c < new_node.w.size(); ++c) {
                for (std::size_t j = 0; j < new_node.counts.size(); ++j) {
                    bool changed = false;
                    for (int r = 0; r < dim; ++r)
                        if (new_node.w[c][j * dim + r] != old_node.w[c][j * dim + r])
                            changed = true;
                    if (static_cast<int>(j) == summary.winners[l][n])
                        continue; // the assigned column may change
                    CHECK_FALSE(changed);
                }
            }
        }
    }
}

TEST_CASE("growth is monotone and capped at capacity") {
    const Architecture arch = small_l1(3);
    ModelState state = build(arch);
    const auto patterns = random_binary_patterns(arch.input, 12, 3);
    const LearnConfig cfg{.alpha = 1e9};
    std::uint32_t last = 0;
    int fallbacks = 0;
    for (const auto& p : patterns) {
        const StepSummary s = train_step(state, p, cfg);
        CHECK(state.root().grown >= last);
        CHECK(state.root().grown <= 3u);
        last = state.root().grown;
        fallbacks += s.fallback_count;
    }
    CHECK(last == 3u);
    CHECK(fallbacks > 0); // saturated nodes fall back to argmax, no error
}

TEST_CASE("iid and grouped orderings of one multiset give matching columns") {
    // when assignments coincide, final columns are order-invariant means
    const Architecture arch = small_l1(2);
    Rng rng(40);
    auto jitter = [&](std::initializer_list<float> base) {
        std::vector<float> v(base);
        for (auto& x : v)
            x = static_cast<float>(
                std::min(1.0, std::max(0.0, static_cast<double>(x) + rng.normal(0.0, 0.02))));
        return make_pattern(arch.input, std::move(v));
    };
    const Pattern a1 = jitter({1, 0, 1, 0}), a2 = jitter({1, 0, 1, 0}), a3 = jitter({1, 0, 1, 0});
    const Pattern b1 = jitter({0, 1, 0, 1}), b2 = jitter({0, 1, 0, 1}), b3 = jitter({0, 1, 0, 1});

    // same multiset, different within-cluster arrival order
    const std::vector<const Pattern*> order1 = {&a1, &a2, &b1, &b2, &a3, &b3};
    const std::vector<const Pattern*> order2 = {&a2, &b2, &b1, &a3, &a1, &b3};

    auto run = [&](const std::vector<const Pattern*>& order) {
        ModelState state = build(arch);
        LearnConfig cfg;
        cfg.alpha = 20.0; // grow on the first of each cluster, reuse after
        for (const Pattern* p : order) train_step(state, *p, cfg);
        return state;
    };
    const ModelState s1 = run(order1);
    const ModelState s2 = run(order2);
    REQUIRE(s1.root().grown == 2);
    REQUIRE(s2.root().grown == 2);
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 4; ++i)
            CHECK(s1.root().w[0][j * 4 + i] ==
                  doctest::Approx(s2.root().w[0][j * 4 + i]).epsilon(1e-9));
}

TEST_CASE("averaging-off keeps saturated columns frozen") {
    const Architecture arch = small_l1(2);
    ModelState state = build(arch);
    const auto patterns = random_binary_patterns(arch.input, 8, 21);

    LearnConfig cfg;
    cfg.alpha = 1e9;
    cfg.averaging = false;
    for (int i = 0; i < 2; ++i) train_step(state, patterns[i], cfg);
    REQUIRE(state.root().grown == 2);
    const std::vector<double> frozen = state.root().w[0];

    for (int i = 2; i < 8; ++i) {
        const StepSummary s = train_step(state, patterns[i], cfg);
        CHECK(s.winners[0][0] >= 0); // still a valid one-hot assignment
    }
    CHECK(state.root().w[0] == frozen);
}

TEST_CASE("constant learning rate stores only a fraction of the first pattern") {
    const Architecture arch = small_l1(4);
    ModelState state = build(arch);
    LearnConfig cfg;
    cfg.alpha = 1e9;
    cfg.lr_mode = LrMode::Constant;
    cfg.lr_eta = 0.25;
    const Pattern p = make_pattern(arch.input, {1.0f, 1.0f, 0.0f, 1.0f});
    train_step(state, p, cfg);
    for (int i = 0; i < 4; ++i)
        CHECK(state.root().w[0][i] == doctest::Approx(0.25 * p.values[i]).epsilon(1e-12));
}

TEST_CASE("disabled growth randomizes weights once and never grows") {
    const Architecture arch = small_l1(4);
    ModelState state = build(arch);
    LearnConfig cfg;
    cfg.growth_mode = GrowthMode::Disabled;
    cfg.init_seed = 9;
    const auto patterns = random_binary_patterns(arch.input, 4, 33);
    for (const auto& p : patterns) {
        const StepSummary s = train_step(state, p, cfg);
        CHECK(s.grown_count == 0);
    }
    CHECK(state.root().grown == 4u); // full capacity from randomization
}

TEST_CASE("pinned assignments make columns converge to sample means") {
    // SQHN+: the first sample's latent is reused for the whole item
    Architecture arch;
    arch.input = {1, 4, 4};
    arch.layers = {{4, 4, 4}};
    arch.alpha = 1e9;
    ModelState state = build(arch);

    Rng rng(12);
    std::vector<float> item(16);
    for (auto& v : item) v = static_cast<float>(rng.uniform());

    const int k = 30;
    std::vector<std::vector<float>> samples;
    for (int s = 0; s < k; ++s) {
        std::vector<float> sample(16);
        for (int i = 0; i < 16; ++i) sample[i] = rng.bernoulli(item[i]) ? 1.0f : 0.0f;
        samples.push_back(std::move(sample));
    }

    const LearnConfig cfg{.alpha = 1e9, .fixed_latent = true};
    StepSummary first = train_step(state, make_pattern(arch.input, samples[0]), cfg);
    for (int s = 1; s < k; ++s)
        train_step(state, make_pattern(arch.input, samples[s]), cfg, &first);

    CHECK(state.root().grown == 1);
    CHECK(state.root().counts[0] == static_cast<std::uint64_t>(k));
    for (int i = 0; i < 16; ++i) {
        double mean = 0.0;
        for (const auto& s : samples) mean += s[i];
        mean /= k;
        CHECK(std::abs(state.root().w[0][i] - mean) < 1e-9);
    }
}

TEST_CASE("train_stream is a strict single pass with per-step hooks") {
    const Architecture arch = small_l1(8);
    SUBCASE("empty stream changes nothing") {
        ModelState state = build(arch);
        train_stream(state, {}, LearnConfig{});
        CHECK(state.iteration() == 0);
        CHECK(state.root().grown == 0);
    }
    SUBCASE("hook sees every iteration in order") {
        ModelState state = build(arch);
        const auto patterns = random_binary_patterns(arch.input, 5, 2);
        std::vector<std::size_t> seen;
        train_stream(state, patterns, LearnConfig{.alpha = 1e9},
                     [&](std::size_t i, const ModelState&, const StepSummary&) {
                         seen.push_back(i);
                     });
        CHECK(seen == std::vector<std::size_t>{0, 1, 2, 3, 4});
        CHECK(state.iteration() == 5);
    }
}
