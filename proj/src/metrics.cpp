#include "sqhn/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace sqhn {

double recall_mse(std::span<const float> original, std::span<const float> recalled,
                  std::span<const std::uint8_t> missing) {
    if (original.size() != recalled.size())
        throw std::invalid_argument("recall_mse: size mismatch");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < original.size(); ++i) {
        if (!missing.empty() && missing[i] == 0) continue;
        const double d = static_cast<double>(original[i]) - static_cast<double>(recalled[i]);
        sum += d * d;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("recall_mse: no pixels to evaluate");
    return sum / static_cast<double>(n);
}

double recall_accuracy(std::span<const double> mses, double gamma) {
    if (mses.empty()) return 0.0;
    std::size_t hits = 0;
    for (double m : mses)
        if (m < gamma) ++hits;
    return static_cast<double>(hits) / static_cast<double>(mses.size());
}

double cumulative(std::span<const double> series) {
    if (series.empty()) return 0.0;
    double sum = 0.0;
    for (double v : series) sum += v;
    return sum / static_cast<double>(series.size());
}

double order_sensitivity(double c_oncont, double c_on) {
    return std::abs(c_oncont - c_on);
}

ForgettingCurve forgetting_oracle(int J, int T, int trials, Rng& rng) {
    if (J <= 0 || T < 0 || trials <= 0)
        throw std::invalid_argument("forgetting_oracle: J and trials must be positive");

    ForgettingCurve curve;
    curve.J = J;
    curve.trials = trials;

    // accumulate per-t sums over trials for mean and sample variance
    std::vector<double> sum(T + 1, 0.0), sum_sq(T + 1, 0.0);
    std::vector<std::uint8_t> intact(J);
    for (int trial = 0; trial < trials; ++trial) {
        std::fill(intact.begin(), intact.end(), 1);
        int count = J;
        sum[0] += count;
        sum_sq[0] += static_cast<double>(count) * count;
        for (int t = 1; t <= T; ++t) {
            const int pick = static_cast<int>(rng.uniform_int(J));
            if (intact[pick]) {
                intact[pick] = 0;
                --count;
            }
            sum[t] += count;
            sum_sq[t] += static_cast<double>(count) * count;
        }
    }

    curve.mean_intact.resize(T + 1);
    curve.theory_intact.resize(T + 1);
    curve.se_theory.resize(T + 1);
    curve.se_sample.resize(T + 1);
    curve.implied_accuracy.resize(T + 1);
    const double n = static_cast<double>(trials);
    for (int t = 0; t <= T; ++t) {
        const double mean = sum[t] / n;
        const double p = std::exp(-static_cast<double>(t) / J);
        curve.mean_intact[t] = mean;
        curve.theory_intact[t] = J * p;
        curve.se_theory[t] = std::sqrt(J * p * (1.0 - p)) / std::sqrt(n);
        const double var = std::max(0.0, sum_sq[t] / n - mean * mean);
        curve.se_sample[t] = std::sqrt(var / n);
        curve.implied_accuracy[t] = J * p / (J + static_cast<double>(t));

        const double dev = std::abs(mean - curve.theory_intact[t]);
        curve.max_abs_dev = std::max(curve.max_abs_dev, dev);
        if (t >= 1 && curve.se_theory[t] > 0.0)
            curve.max_se_units = std::max(curve.max_se_units, dev / curve.se_theory[t]);
    }
    return curve;
}

} // namespace sqhn
