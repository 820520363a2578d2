#include <doctest.h>

#include <cmath>

#include "sqhn/metrics.hpp"

using namespace sqhn;

TEST_CASE("recall_mse arithmetic") {
    const std::vector<float> zeros(10, 0.0f), ones(10, 1.0f);
    CHECK(recall_mse(zeros, zeros) == 0.0);
    CHECK(recall_mse(zeros, ones) == doctest::Approx(1.0));

    // half the pixels off by 0.2 -> 0.02
    std::vector<float> x(10, 0.5f), y(10, 0.5f);
    for (int i = 0; i < 5; ++i) y[i] = 0.7f;
    CHECK(recall_mse(x, y) == doctest::Approx(0.02).epsilon(1e-6));

    SUBCASE("missing mask restricts the evaluated pixels") {
        std::vector<std::uint8_t> missing(10, 0);
        missing[0] = missing[1] = 1;
        std::vector<float> z = x;
        z[0] = 1.0f; // only missing pixels count
        z[5] = 0.0f; // observed error ignored
        CHECK(recall_mse(x, z, missing) == doctest::Approx(0.25 / 2.0));
    }
    SUBCASE("an all-observed mask with hetero scope is rejected") {
        const std::vector<std::uint8_t> none(10, 0);
        CHECK_THROWS_AS(recall_mse(x, y, none), std::invalid_argument);
    }
}

TEST_CASE("recall_accuracy thresholds per-pattern MSEs") {
    CHECK(recall_accuracy(std::vector<double>{0.001, 0.002, 0.0}, 0.01) == 1.0);
    CHECK(recall_accuracy(std::vector<double>{0.5, 0.9}, 0.01) == 0.0);
    CHECK(recall_accuracy(std::vector<double>{0.005, 0.02}, 0.01) == 0.5);

    SUBCASE("tightening gamma never raises accuracy") {
        Rng rng(31);
        std::vector<double> mses(50);
        for (auto& m : mses) m = rng.uniform() * 0.05;
        double prev = 1.0;
        for (double gamma = 0.05; gamma > 1e-4; gamma *= 0.5) {
            const double acc = recall_accuracy(mses, gamma);
            CHECK(acc <= prev);
            prev = acc;
        }
    }
}

TEST_CASE("cumulative is the arithmetic mean of the series") {
    CHECK(cumulative(std::vector<double>{0.3, 0.3, 0.3}) == doctest::Approx(0.3));
    CHECK(cumulative(std::vector<double>{0.0, 1.0}) == doctest::Approx(0.5));
    CHECK(cumulative(std::vector<double>{0.1, 0.2, 0.6}) == doctest::Approx(0.3));
    CHECK(cumulative({}) == 0.0);
}

TEST_CASE("order sensitivity is the absolute cumulative gap") {
    CHECK(order_sensitivity(0.4, 0.4) == 0.0);
    CHECK(order_sensitivity(0.3, 0.1) == doctest::Approx(0.2));
    CHECK(order_sensitivity(0.1, 0.3) == doctest::Approx(0.2));
}

TEST_CASE("forgetting oracle starts at J and tracks the exponential curve") {
    Rng rng(1234);
    const int J = 100, T = 300, trials = 1000;
    const ForgettingCurve curve = forgetting_oracle(J, T, trials, rng);

    CHECK(curve.mean_intact[0] == doctest::Approx(static_cast<double>(J)));
    CHECK(curve.theory_intact[0] == doctest::Approx(static_cast<double>(J)));

    for (int t = 1; t <= T; ++t) {
        const double dev = std::abs(curve.mean_intact[t] - curve.theory_intact[t]);
        CHECK(dev <= 3.0 * curve.se_theory[t]);
    }

    // implied accuracy curve J e^{-t/J} / (J+t)
    CHECK(curve.implied_accuracy[0] == doctest::Approx(1.0));
    CHECK(curve.implied_accuracy[J] ==
          doctest::Approx(J * std::exp(-1.0) / (2.0 * J)).epsilon(1e-12));
}
