#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "lintel/errors.hpp"
#include "lintel/gaussian.hpp"

namespace lintel {

using WeightVector = Eigen::VectorXd;

enum class FusionRule { Arithmetic, Geometric };

/// Floor applied to every weight after each operation. Without it a weight
/// that underflows to exact zero can never recover through Bayes updates.
constexpr double kWeightFloor = 1e-10;

inline WeightVector uniform_weights(Eigen::Index count) {
    return WeightVector::Constant(count, 1.0 / static_cast<double>(count));
}

namespace detail {

inline void floor_and_normalize(WeightVector& weights) {
    weights = weights.cwiseMax(kWeightFloor);
    weights /= weights.sum();
}

} // namespace detail

/// Forgetting step: w_k <- w_k^alpha, renormalized. alpha = 1 keeps the
/// weights, alpha = 0 resets them to uniform.
inline WeightVector forget(const WeightVector& weights, double alpha) {
    WeightVector result = weights.array().pow(alpha);
    result /= result.sum();
    detail::floor_and_normalize(result);
    return result;
}

/// Posterior reweighting by per-model predictive log densities of the
/// observed value. Computed with max-log subtraction so that one model being
/// far off cannot underflow the whole vector.
inline WeightVector bayes_update(const WeightVector& weights,
                                 const Eigen::VectorXd& log_likelihoods) {
    Eigen::VectorXd log_posterior(weights.size());
    for (Eigen::Index k = 0; k < weights.size(); ++k) {
        const double ll = log_likelihoods(k);
        log_posterior(k) =
            std::log(weights(k)) + (std::isfinite(ll) ? ll : -1e300);
    }
    const double max_log = log_posterior.maxCoeff();
    if (!std::isfinite(max_log))
        throw numerical_error("bayes_update: degenerate likelihoods (all zero)");
    WeightVector result = (log_posterior.array() - max_log).exp();
    detail::floor_and_normalize(result);
    return result;
}

/// Pools K Gaussian forecasts into one.
///
/// Arithmetic (moment-matched mixture):
///   m = sum_k w_k m_k,   s^2 = sum_k w_k (s_k^2 + (m - m_k)^2).
/// Geometric (weighted product of experts):
///   1/s^2 = sum_k w_k / s_k^2,   m = s^2 sum_k w_k m_k / s_k^2.
inline PredictiveDistribution fuse(const std::vector<PredictiveDistribution>& predictions,
                                   const WeightVector& weights, FusionRule rule) {
    const auto count = static_cast<Eigen::Index>(predictions.size());
    if (count == 1) return predictions.front();
    if (rule == FusionRule::Arithmetic) {
        double mean = 0.0;
        for (Eigen::Index k = 0; k < count; ++k)
            mean += weights(k) * predictions[static_cast<std::size_t>(k)].mean;
        double variance = 0.0;
        for (Eigen::Index k = 0; k < count; ++k) {
            const auto& p = predictions[static_cast<std::size_t>(k)];
            const double gap = mean - p.mean;
            variance += weights(k) * (p.variance + gap * gap);
        }
        return {mean, variance};
    }
    double precision = 0.0;
    double weighted_mean = 0.0;
    for (Eigen::Index k = 0; k < count; ++k) {
        const auto& p = predictions[static_cast<std::size_t>(k)];
        precision += weights(k) / p.variance;
        weighted_mean += weights(k) * p.mean / p.variance;
    }
    return {weighted_mean / precision, 1.0 / precision};
}

} // namespace lintel
