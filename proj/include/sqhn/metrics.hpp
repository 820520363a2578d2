#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sqhn/rng.hpp"
#include "sqhn/types.hpp"

namespace sqhn {

/// Default per-pattern MSE threshold defining a successful recall.
inline constexpr double kDefaultRecallGamma = 0.01;

/// Mean squared error over evaluated pixels: all pixels when the mask is
/// empty (auto-association), missing pixels only otherwise (hetero).
double recall_mse(std::span<const float> original, std::span<const float> recalled,
                  std::span<const std::uint8_t> missing = {});

/// Fraction of per-pattern MSEs strictly below gamma.
double recall_accuracy(std::span<const double> mses, double gamma = kDefaultRecallGamma);

/// Running mean of a metric series (the 'cumulative' online measure).
double cumulative(std::span<const double> series);

/// Sensitivity to data ordering: |C_oncont - C_on|.
double order_sensitivity(double c_oncont, double c_on);

/// Monte-Carlo oracle for the worst-case forgetting process: J memory
/// columns, each step overwrites one chosen uniformly at random; a column
/// counts as intact while it still holds a single data point.
struct ForgettingCurve {
    int J = 0;
    int trials = 0;
    std::vector<double> mean_intact;      // index t, 0..T
    std::vector<double> theory_intact;    // J * exp(-t/J)
    std::vector<double> se_theory;        // sqrt(J p (1-p)) / sqrt(trials), p = exp(-t/J)
    std::vector<double> se_sample;        // sample standard error of the mean
    std::vector<double> implied_accuracy; // J * exp(-t/J) / (J + t)
    double max_abs_dev = 0.0;             // max |mean - theory| over t
    double max_se_units = 0.0;            // max |mean - theory| / se_theory over t >= 1
};

ForgettingCurve forgetting_oracle(int J, int T, int trials, Rng& rng);

} // namespace sqhn
