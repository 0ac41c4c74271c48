#pragma once

#include <cmath>

namespace lintel {

/// Scalar Gaussian forecast of the next observation, in observation space
/// (the variance includes the measurement-noise term).
struct PredictiveDistribution {
    double mean = 0.0;
    double variance = 1.0;
};

inline double gaussian_log_density(double y, double mean, double variance) {
    constexpr double log_two_pi = 1.8378770664093454836;
    const double residual = y - mean;
    return -0.5 * (residual * residual / variance + std::log(variance) + log_two_pi);
}

inline double gaussian_log_density(double y, const PredictiveDistribution& p) {
    return gaussian_log_density(y, p.mean, p.variance);
}

} // namespace lintel
