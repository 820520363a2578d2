#include <doctest.h>

#include <cmath>

#include "sqhn/learning.hpp"
#include "sqhn/recognition.hpp"
#include "sqhn/rng.hpp"

using namespace sqhn;

namespace {

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

} // namespace

TEST_CASE("update_mu is the online arithmetic mean") {
    SUBCASE("0.8 then 0.6 averages to 0.7") {
        double mu = update_mu(0.0, 1, 0.8);
        CHECK(mu == doctest::Approx(0.8));
        mu = update_mu(mu, 2, 0.6);
        CHECK(mu == doctest::Approx(0.7));
    }
    SUBCASE("a single value sets mu to that value") {
        CHECK(update_mu(0.42, 1, 0.9) == doctest::Approx(0.9));
    }
    SUBCASE("converges to the sample mean over many draws") {
        Rng rng(8);
        double mu = 0.0;
        double direct = 0.0;
        const int n = 1000;
        for (int i = 1; i <= n; ++i) {
            const double v = 0.9 + rng.normal(0.0, 0.05);
            mu = update_mu(mu, static_cast<std::uint64_t>(i), v);
            direct += v;
        }
        direct /= n;
        CHECK(mu == doctest::Approx(direct).epsilon(1e-12));
        // within Monte-Carlo error of the true mean: 3 * 0.05 / sqrt(1000)
        CHECK(std::abs(mu - 0.9) < 3.0 * 0.05 / std::sqrt(1000.0));
    }
    SUBCASE("zero count is rejected") {
        CHECK_THROWS_AS(update_mu(0.0, 0, 1.0), std::invalid_argument);
    }
}

TEST_CASE("judge separates stored patterns from disjoint ones") {
    Architecture arch;
    arch.input = {1, 8, 8};
    arch.layers = {{8, 8, 32}};
    arch.alpha = 1e9;
    ModelState state = build(arch);

    const auto train = random_binary_patterns(arch.input, 32, 100);
    const auto fresh = random_binary_patterns(arch.input, 32, 200);
    const LearnConfig cfg{.alpha = 1e9};
    for (const auto& p : train) train_step(state, p, cfg);

    SUBCASE("exact training patterns are judged old") {
        for (const auto& p : train) {
            const Judgment j = judge(state, p);
            CHECK(j.is_old);
            CHECK(j.activation == 1.0);
        }
    }
    SUBCASE("disjoint patterns are judged new with scores well below threshold") {
        for (const auto& p : fresh) {
            const Judgment j = judge(state, p);
            CHECK_FALSE(j.is_old);
            CHECK(j.score < -0.1);
        }
    }
    SUBCASE("judging never mutates state") {
        const std::vector<double> w_before = state.root().w[0];
        const std::vector<double> mu_before = state.mu();
        const std::uint64_t t_before = state.iteration();
        judge(state, fresh[0]);
        judge(state, train[0]);
        CHECK(state.root().w[0] == w_before);
        CHECK(state.mu() == mu_before);
        CHECK(state.iteration() == t_before);
    }
}

TEST_CASE("judge uses a strict inequality at the threshold boundary") {
    Architecture arch;
    arch.input = {1, 2, 2};
    arch.layers = {{2, 2, 4}};
    ModelState state = build(arch);
    const Pattern p{arch.input, {1.0f, 0.0f, 0.0f, 1.0f}, {}};
    train_step(state, p, LearnConfig{.alpha = 1e9});

    // pin the threshold exactly at the activation an exact match produces
    state.mu()[0] = 1.0;
    const Judgment j = judge(state, p);
    CHECK(j.activation == 1.0);
    CHECK(j.score == 0.0);
    CHECK_FALSE(j.is_old); // v == mu -> new
}

TEST_CASE("judge requires a trained model") {
    Architecture arch;
    arch.input = {1, 2, 2};
    arch.layers = {{2, 2, 4}};
    ModelState state = build(arch);
    const Pattern p{arch.input, {1.0f, 0.0f, 0.0f, 1.0f}, {}};
    CHECK_THROWS_AS(judge(state, p), std::runtime_error);
}
