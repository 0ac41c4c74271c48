#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "lintel/errors.hpp"
#include "lintel/fusion.hpp"
#include "lintel/kernel_gp.hpp"
#include "lintel/markov_gp.hpp"
#include "lintel/state_space.hpp"

namespace lintel {

/// Sentinel for "never recenter the mean" (mean update period of infinity).
inline constexpr std::size_t kNeverRecenter = std::numeric_limits<std::size_t>::max();

/// Shared knobs of the two online loops. `window` only applies to the
/// windowed (intel) loop; `mean_update_period` counts accepted observations.
struct StreamConfig {
    int n_pcb_max = 3;
    double forgetting_alpha = 0.9;
    std::size_t mean_update_period = kNeverRecenter;
    int window = 20;
    FusionRule fusion_rule = FusionRule::Arithmetic;
    WeightVector initial_weights; // empty = uniform
    double initial_mean = 0.0;
};

/// Everything one step produced: the fused forecast made before y arrived,
/// the per-model forecasts and weights behind it, and the step's verdict.
struct StepRecord {
    double t = 0.0;
    double y = 0.0;
    double fused_mean = 0.0;
    double fused_var = 0.0;
    std::vector<double> model_means;
    std::vector<double> model_vars;
    std::vector<double> weights_used;
    bool is_outlier = false;
    bool changepoint = false;
};

struct LintelModel {
    StateSpaceModel ssm;
    double noise_variance = 0.0;
};

struct IntelModel {
    KernelSpec spec;
    double noise_variance = 0.0;
};

/// Mutable state of a constant-time (lintel) stream: one filtered Gaussian
/// state per candidate plus the ensemble bookkeeping.
struct LintelState {
    std::vector<GaussianState> candidates;
    WeightVector weights;
    std::vector<std::pair<double, double>> pcb;
    double mean_constant = 0.0;
    std::size_t accepted_since_recenter = 0;
    std::deque<double> recent_accepted;
    std::optional<double> last_input_time;
};

/// Mutable state of a windowed (intel) stream: the shared window of accepted
/// data (at most `window` points) plus the same ensemble bookkeeping.
struct IntelState {
    std::deque<std::pair<double, double>> window;
    WeightVector weights;
    std::vector<std::pair<double, double>> pcb;
    double mean_constant = 0.0;
    std::size_t accepted_since_recenter = 0;
    std::deque<double> recent_accepted;
    std::optional<double> last_input_time;
};

namespace detail {

inline WeightVector initial_weights_for(const StreamConfig& cfg, std::size_t n_models) {
    if (cfg.initial_weights.size() == 0)
        return uniform_weights(static_cast<Eigen::Index>(n_models));
    if (cfg.initial_weights.size() != static_cast<Eigen::Index>(n_models))
        throw config_error("initial_weights length does not match the candidate count");
    WeightVector weights = cfg.initial_weights;
    weights = weights.cwiseMax(kWeightFloor);
    weights /= weights.sum();
    return weights;
}

inline void check_input_order(const std::optional<double>& last_input_time, double t) {
    if (last_input_time && t < *last_input_time)
        throw out_of_order_error("stream input at t=" + std::to_string(t) +
                                 " precedes previous input at t=" +
                                 std::to_string(*last_input_time));
}

/// Closed-interval 3-sigma gate: values exactly on the boundary are inliers.
inline bool outside_three_sigma(double y, const PredictiveDistribution& fused) {
    const double radius = 3.0 * std::sqrt(fused.variance);
    return y < fused.mean - radius || y > fused.mean + radius;
}

inline StepRecord make_record(double t, double y,
                              const std::vector<PredictiveDistribution>& predictions,
                              const WeightVector& forgotten,
                              const PredictiveDistribution& fused) {
    StepRecord record;
    record.t = t;
    record.y = y;
    record.fused_mean = fused.mean;
    record.fused_var = fused.variance;
    record.model_means.reserve(predictions.size());
    record.model_vars.reserve(predictions.size());
    for (const auto& p : predictions) {
        record.model_means.push_back(p.mean);
        record.model_vars.push_back(p.variance);
    }
    record.weights_used.assign(forgotten.data(), forgotten.data() + forgotten.size());
    return record;
}

template <typename State>
void note_accepted_value(State& state, double y, std::size_t period) {
    if (period == kNeverRecenter) return;
    state.recent_accepted.push_back(y);
    while (state.recent_accepted.size() > period) state.recent_accepted.pop_front();
    ++state.accepted_since_recenter;
}

inline double mean_of(const std::deque<double>& values) {
    double total = 0.0;
    for (double v : values) total += v;
    return total / static_cast<double>(values.size());
}

inline double mean_of_pcb(const std::vector<std::pair<double, double>>& pcb) {
    double total = 0.0;
    for (const auto& [t, y] : pcb) total += y;
    return total / static_cast<double>(pcb.size());
}

} // namespace detail

inline LintelState make_lintel_state(const std::vector<LintelModel>& models,
                                     const StreamConfig& cfg) {
    if (models.empty()) throw config_error("candidate bank is empty");
    LintelState state;
    state.candidates.reserve(models.size());
    for (const auto& model : models) state.candidates.push_back(init_state(model.ssm));
    state.weights = detail::initial_weights_for(cfg, models.size());
    state.mean_constant = cfg.initial_mean;
    return state;
}

inline IntelState make_intel_state(const std::vector<IntelModel>& models,
                                   const StreamConfig& cfg) {
    if (models.empty()) throw config_error("candidate bank is empty");
    if (cfg.window < 2) throw config_error("window must be at least 2");
    IntelState state;
    state.weights = detail::initial_weights_for(cfg, models.size());
    state.mean_constant = cfg.initial_mean;
    return state;
}

/// Shifts every candidate's filtered mean so that the observable projection
/// absorbs a prior-mean change of delta_c, leaving the next forecast
/// unchanged. Prefers the update proportional to the current latent values;
/// falls back to a uniform split when the projection h'm is numerically zero.
inline void shift_state_mean(GaussianState& state, const Eigen::VectorXd& h, double delta_c) {
    const double projected = h.dot(state.m);
    if (std::abs(projected) > 1e-9 * (1.0 + std::abs(delta_c))) {
        state.m -= h.cwiseProduct(state.m) * (delta_c / projected);
    } else {
        state.m -= h * (delta_c / h.lpNorm<1>());
    }
}

inline void apply_mean_update(LintelState& state, const std::vector<LintelModel>& models,
                              double delta_c) {
    for (std::size_t k = 0; k < models.size(); ++k)
        shift_state_mean(state.candidates[k], models[k].ssm.h, delta_c);
    state.mean_constant += delta_c;
}

/// One step of the constant-time loop: forecast y at t from each candidate's
/// filtered state, fuse, gate at 3 sigma, and either absorb the observation
/// (inlier) or buffer it in the PCB (outlier). A full PCB declares a regime
/// switch: the mean resets to the PCB average and every candidate is
/// re-filtered from the stationary prior over the PCB contents.
inline StepRecord step_lintel(LintelState& state, const std::vector<LintelModel>& models,
                              const StreamConfig& cfg, double t, double y) {
    detail::check_input_order(state.last_input_time, t);
    const std::size_t n_models = models.size();

    std::vector<GaussianState> propagated;
    propagated.reserve(n_models);
    std::vector<PredictiveDistribution> predictions;
    predictions.reserve(n_models);
    for (std::size_t k = 0; k < n_models; ++k) {
        propagated.push_back(predict_state(state.candidates[k], models[k].ssm, t));
        predictions.push_back(
            predictive(propagated[k], models[k].ssm, models[k].noise_variance,
                       state.mean_constant));
    }

    const WeightVector forgotten = forget(state.weights, cfg.forgetting_alpha);
    const PredictiveDistribution fused = fuse(predictions, forgotten, cfg.fusion_rule);
    StepRecord record = detail::make_record(t, y, predictions, forgotten, fused);
    record.is_outlier = detail::outside_three_sigma(y, fused);

    if (!record.is_outlier) {
        state.pcb.clear();
        Eigen::VectorXd log_liks(static_cast<Eigen::Index>(n_models));
        for (std::size_t k = 0; k < n_models; ++k) {
            state.candidates[k] = update_state(propagated[k], models[k].ssm,
                                               models[k].noise_variance,
                                               state.mean_constant, y);
            log_liks(static_cast<Eigen::Index>(k)) = gaussian_log_density(y, predictions[k]);
        }
        state.weights = bayes_update(forgotten, log_liks);
        detail::note_accepted_value(state, y, cfg.mean_update_period);
        if (cfg.mean_update_period != kNeverRecenter &&
            state.accepted_since_recenter >= cfg.mean_update_period) {
            const double target = detail::mean_of(state.recent_accepted);
            apply_mean_update(state, models, target - state.mean_constant);
            state.accepted_since_recenter = 0;
        }
    } else {
        state.pcb.emplace_back(t, y);
        if (state.pcb.size() >= static_cast<std::size_t>(cfg.n_pcb_max)) {
            record.changepoint = true;
            state.mean_constant = detail::mean_of_pcb(state.pcb);
            for (std::size_t k = 0; k < n_models; ++k) {
                GaussianState fresh = init_state(models[k].ssm);
                for (const auto& [tp, yp] : state.pcb) {
                    fresh = predict_state(fresh, models[k].ssm, tp);
                    fresh = update_state(fresh, models[k].ssm, models[k].noise_variance,
                                         state.mean_constant, yp);
                }
                state.candidates[k] = std::move(fresh);
            }
            if (cfg.mean_update_period != kNeverRecenter) {
                state.recent_accepted.clear();
                for (const auto& [tp, yp] : state.pcb) state.recent_accepted.push_back(yp);
                while (state.recent_accepted.size() > cfg.mean_update_period)
                    state.recent_accepted.pop_front();
            }
            state.accepted_since_recenter = 0;
            state.pcb.clear();
        }
    }

    state.last_input_time = t;
    return record;
}

/// One step of the windowed loop. Identical control flow to step_lintel, but
/// each candidate's forecast comes from refitting a kernel GP on the shared
/// window of the last `window` accepted points, and a regime switch replaces
/// the window with the PCB contents instead of re-filtering.
inline StepRecord step_intel(IntelState& state, const std::vector<IntelModel>& models,
                             const StreamConfig& cfg, double t, double y) {
    detail::check_input_order(state.last_input_time, t);
    const std::size_t n_models = models.size();

    GPDataset window_data;
    window_data.mean_constant = state.mean_constant;
    window_data.times.reserve(state.window.size());
    window_data.values.reserve(state.window.size());
    for (const auto& [tw, yw] : state.window) {
        window_data.times.push_back(tw);
        window_data.values.push_back(yw);
    }

    std::vector<PredictiveDistribution> predictions;
    predictions.reserve(n_models);
    for (const auto& model : models) {
        const GPPosteriorCache cache = gp_fit(model.spec, model.noise_variance, window_data);
        predictions.push_back(
            gp_predict(cache, window_data, model.spec, model.noise_variance, t));
    }

    const WeightVector forgotten = forget(state.weights, cfg.forgetting_alpha);
    const PredictiveDistribution fused = fuse(predictions, forgotten, cfg.fusion_rule);
    StepRecord record = detail::make_record(t, y, predictions, forgotten, fused);
    record.is_outlier = detail::outside_three_sigma(y, fused);

    if (!record.is_outlier) {
        state.pcb.clear();
        state.window.emplace_back(t, y);
        while (state.window.size() > static_cast<std::size_t>(cfg.window))
            state.window.pop_front();
        Eigen::VectorXd log_liks(static_cast<Eigen::Index>(n_models));
        for (std::size_t k = 0; k < n_models; ++k)
            log_liks(static_cast<Eigen::Index>(k)) = gaussian_log_density(y, predictions[k]);
        state.weights = bayes_update(forgotten, log_liks);
        detail::note_accepted_value(state, y, cfg.mean_update_period);
        if (cfg.mean_update_period != kNeverRecenter &&
            state.accepted_since_recenter >= cfg.mean_update_period) {
            state.mean_constant = detail::mean_of(state.recent_accepted);
            state.accepted_since_recenter = 0;
        }
    } else {
        state.pcb.emplace_back(t, y);
        if (state.pcb.size() >= static_cast<std::size_t>(cfg.n_pcb_max)) {
            record.changepoint = true;
            state.mean_constant = detail::mean_of_pcb(state.pcb);
            state.window.assign(state.pcb.begin(), state.pcb.end());
            while (state.window.size() > static_cast<std::size_t>(cfg.window))
                state.window.pop_front();
            if (cfg.mean_update_period != kNeverRecenter) {
                state.recent_accepted.clear();
                for (const auto& [tp, yp] : state.pcb) state.recent_accepted.push_back(yp);
                while (state.recent_accepted.size() > cfg.mean_update_period)
                    state.recent_accepted.pop_front();
            }
            state.accepted_since_recenter = 0;
            state.pcb.clear();
        }
    }

    state.last_input_time = t;
    return record;
}

} // namespace lintel
