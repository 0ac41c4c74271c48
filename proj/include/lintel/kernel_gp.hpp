#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lintel/errors.hpp"
#include "lintel/gaussian.hpp"
#include "lintel/kernels.hpp"
#include "lintel/random.hpp"

namespace lintel {

/// Regression data (t_n, y_n) with a constant prior mean C.
struct GPDataset {
    std::vector<double> times;
    std::vector<double> values;
    double mean_constant = 0.0;

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }
};

inline void validate(const GPDataset& data) {
    if (data.times.size() != data.values.size())
        throw invalid_spec_error("dataset times/values length mismatch");
    for (std::size_t i = 1; i < data.times.size(); ++i)
        if (!(data.times[i] > data.times[i - 1]))
            throw invalid_spec_error("dataset times must be strictly increasing (row " +
                                     std::to_string(i) + ")");
}

/// Cholesky factor of (K + sigma_n^2 I) and the solved residual vector,
/// enabling O(N^2) predictions.
struct GPPosteriorCache {
    Eigen::MatrixXd chol_lower;
    Eigen::VectorXd alpha;
};

namespace detail {

inline Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const std::vector<double>& times) {
    const auto n = static_cast<Eigen::Index>(times.size());
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double value = kernel_eval(spec, std::abs(times[i] - times[j]));
            gram(i, j) = value;
            gram(j, i) = value;
        }
    }
    return gram;
}

// Cholesky with jitter escalation: 1e-10 * mean diagonal, x10 per retry,
// at most 3 retries.
inline Eigen::MatrixXd robust_cholesky(Eigen::MatrixXd mat, const std::string& what) {
    Eigen::LLT<Eigen::MatrixXd> llt(mat);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    double jitter = 1e-10 * mat.diagonal().mean();
    for (int attempt = 0; attempt < 3; ++attempt) {
        Eigen::MatrixXd bumped = mat + jitter * Eigen::MatrixXd::Identity(mat.rows(), mat.cols());
        llt.compute(bumped);
        if (llt.info() == Eigen::Success) return llt.matrixL();
        jitter *= 10.0;
    }
    throw numerical_error(what + ": matrix not positive definite after jitter escalation (size " +
                          std::to_string(mat.rows()) + ", final jitter " + std::to_string(jitter) +
                          ")");
}

} // namespace detail

inline GPPosteriorCache gp_fit(const KernelSpec& spec, double noise_variance,
                               const GPDataset& data) {
    validate(spec);
    if (!(noise_variance > 0.0))
        throw invalid_spec_error("noise variance must be positive");
    GPPosteriorCache cache;
    const auto n = static_cast<Eigen::Index>(data.size());
    if (n == 0) {
        cache.chol_lower.resize(0, 0);
        cache.alpha.resize(0);
        return cache;
    }
    Eigen::MatrixXd gram = detail::gram_matrix(spec, data.times);
    gram.diagonal().array() += noise_variance;
    cache.chol_lower = detail::robust_cholesky(std::move(gram), "gp_fit");

    Eigen::VectorXd residuals(n);
    for (Eigen::Index i = 0; i < n; ++i)
        residuals(i) = data.values[static_cast<std::size_t>(i)] - data.mean_constant;
    cache.alpha = cache.chol_lower.triangularView<Eigen::Lower>().solve(residuals);
    cache.chol_lower.triangularView<Eigen::Lower>().transpose().solveInPlace(cache.alpha);
    return cache;
}

/// Posterior predictive of the next observation at t_star; the returned
/// variance is in observation space (latent variance plus noise_variance).
inline PredictiveDistribution gp_predict(const GPPosteriorCache& cache, const GPDataset& data,
                                         const KernelSpec& spec, double noise_variance,
                                         double t_star) {
    const double prior_var = kernel_variance(spec);
    const auto n = static_cast<Eigen::Index>(data.size());
    if (n == 0) return {data.mean_constant, prior_var + noise_variance};

    Eigen::VectorXd cross(n);
    for (Eigen::Index i = 0; i < n; ++i)
        cross(i) = kernel_eval(spec, std::abs(t_star - data.times[static_cast<std::size_t>(i)]));

    const double mean = data.mean_constant + cross.dot(cache.alpha);
    const Eigen::VectorXd solved = cache.chol_lower.triangularView<Eigen::Lower>().solve(cross);
    double latent_var = prior_var - solved.squaredNorm();
    if (latent_var < 0.0) latent_var = 0.0;
    return {mean, latent_var + noise_variance};
}

/// One joint draw from the GP prior plus observation noise at the given
/// times. Deterministic for a fixed seed.
inline std::vector<double> gp_sample(const KernelSpec& spec, double noise_variance,
                                     const std::vector<double>& times, double mean_constant,
                                     Rng& rng) {
    validate(spec);
    const auto n = static_cast<Eigen::Index>(times.size());
    if (n == 0) return {};
    Eigen::MatrixXd gram = detail::gram_matrix(spec, times);
    gram.diagonal().array() += 1e-10 * std::max(gram.diagonal().mean(), 1e-300);
    const Eigen::MatrixXd lower = detail::robust_cholesky(std::move(gram), "gp_sample");

    Eigen::VectorXd draws(n);
    for (Eigen::Index i = 0; i < n; ++i) draws(i) = rng.normal();
    Eigen::VectorXd latent = lower * draws;

    const double noise_sd = std::sqrt(noise_variance);
    std::vector<double> sample(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        sample[static_cast<std::size_t>(i)] = mean_constant + latent(i) + noise_sd * rng.normal();
    return sample;
}

inline std::vector<double> gp_sample(const KernelSpec& spec, double noise_variance,
                                     const std::vector<double>& times, double mean_constant,
                                     std::uint64_t seed) {
    Rng rng(seed);
    return gp_sample(spec, noise_variance, times, mean_constant, rng);
}

} // namespace lintel
