#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lintel/harness/timeseries.hpp"
#include "lintel/kernel_gp.hpp"
#include "lintel/kernels.hpp"
#include "lintel/random.hpp"

namespace lintel {

/// Ground-truth prior for the synthetic experiments: a smooth long-scale
/// component plus a rough short-scale one.
inline KernelSpec synthetic_truth_kernel() {
    return KernelSpec::sum({KernelSpec::matern52(1.0, 8.0), KernelSpec::matern32(0.5, 1.0)});
}

struct SynthParams {
    int n = 3000;
    double time_span = 3000.0;
    double noise_sd = 0.3;
    double outlier_extra_sd = 2.0;
    int n_outliers = 10;
    // Outliers are only injected past the pretraining prefix; earlier ones
    // could never be flagged and would contaminate the hyperparameter fit.
    int protected_prefix = 250;
    int regime_begin = 1500;
    int regime_end = 2000; // inclusive
    KernelSpec regime_kernel = KernelSpec::matern52(1.0, 8.0);
};

namespace detail {

inline std::vector<double> sorted_uniform_times(Rng& rng, const SynthParams& params) {
    std::vector<double> times(static_cast<std::size_t>(params.n));
    for (auto& t : times) t = rng.uniform(0.0, params.time_span);
    std::sort(times.begin(), times.end());
    for (std::size_t i = 1; i < times.size(); ++i)
        while (!(times[i] > times[i - 1]))
            times[i] = std::nextafter(times[i - 1], params.time_span + 1.0);
    return times;
}

inline TimeSeriesFile synth_series(std::uint64_t seed, const SynthParams& params,
                                   bool with_regime) {
    Rng rng(seed);
    TimeSeriesFile series;
    series.times = sorted_uniform_times(rng, params);

    std::vector<double> latent =
        gp_sample(synthetic_truth_kernel(), 0.0, series.times, 0.0, rng);

    series.values.resize(series.times.size());
    for (std::size_t i = 0; i < series.times.size(); ++i)
        series.values[i] = latent[i] + params.noise_sd * rng.normal();

    series.outlier_truth.assign(series.times.size(), 0);
    std::vector<std::size_t> chosen;
    while (chosen.size() < static_cast<std::size_t>(params.n_outliers)) {
        const std::size_t idx =
            static_cast<std::size_t>(params.protected_prefix) +
            rng.index(static_cast<std::uint64_t>(params.n - params.protected_prefix));
        if (std::find(chosen.begin(), chosen.end(), idx) != chosen.end()) continue;
        chosen.push_back(idx);
        series.values[idx] += params.outlier_extra_sd * rng.normal();
        series.outlier_truth[idx] = 1;
    }

    if (with_regime) {
        // Splice in an independent draw from the regime kernel; everything
        // outside the window stays bitwise identical to the outliers-only
        // series for the same seed.
        Rng regime_rng(seed ^ 0x9e3779b97f4a7c15ULL);
        std::vector<double> regime_times(
            series.times.begin() + params.regime_begin,
            series.times.begin() + params.regime_end + 1);
        const std::vector<double> regime_latent =
            gp_sample(params.regime_kernel, 0.0, regime_times, 0.0, regime_rng);
        for (std::size_t i = 0; i < regime_times.size(); ++i) {
            const std::size_t idx = static_cast<std::size_t>(params.regime_begin) + i;
            const double noise_and_outliers = series.values[idx] - latent[idx];
            series.values[idx] = regime_latent[i] + noise_and_outliers;
        }
        series.regime_truth.assign(series.times.size(), 0);
        for (int i = params.regime_begin; i <= params.regime_end; ++i)
            series.regime_truth[static_cast<std::size_t>(i)] = 1;
    }
    return series;
}

} // namespace detail

/// Synthetic stream with injected outliers: sorted U(0, span) times, one GP
/// draw from the ground-truth kernel, white observation noise, and
/// n_outliers points with extra noise (total outlier noise variance
/// outlier_extra_sd^2 + noise_sd^2). The truth column marks them.
inline TimeSeriesFile synth_outliers(std::uint64_t seed, const SynthParams& params = {}) {
    return detail::synth_series(seed, params, false);
}

/// Same construction, but values at indices [regime_begin, regime_end] come
/// from an independent draw of the (simpler) regime kernel. Carries both the
/// outlier-truth and the regime-truth columns.
inline TimeSeriesFile synth_regimes(std::uint64_t seed, const SynthParams& params = {}) {
    return detail::synth_series(seed, params, true);
}

} // namespace lintel
