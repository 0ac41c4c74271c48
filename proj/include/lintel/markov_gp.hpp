#pragma once

#include <optional>

#include <Eigen/Dense>

#include "lintel/errors.hpp"
#include "lintel/gaussian.hpp"
#include "lintel/kernel_gp.hpp"
#include "lintel/state_space.hpp"

namespace lintel {

/// Filtering state of a Markovian GP: mean and covariance of theta at the
/// time of the last processed observation (t_last empty = stationary prior,
/// equivalent to an infinite elapsed time before the first observation).
struct GaussianState {
    Eigen::VectorXd m;
    Eigen::MatrixXd P;
    std::optional<double> t_last;
};

inline GaussianState init_state(const StateSpaceModel& ssm) {
    GaussianState state;
    state.m = Eigen::VectorXd::Zero(ssm.state_dim());
    state.P = ssm.Pinf;
    state.t_last = std::nullopt;
    return state;
}

/// Propagates the state to time t through the exact discrete transition:
///   m <- A m,   P <- A P A' + Sigma,   with dt = t - t_last.
inline GaussianState predict_state(const GaussianState& state, const StateSpaceModel& ssm,
                                   double t) {
    if (!state.t_last.has_value()) {
        GaussianState prior = init_state(ssm);
        prior.t_last = t;
        return prior;
    }
    const double dt = t - *state.t_last;
    if (dt < 0.0) throw out_of_order_error("predict_state: t precedes the state timestamp");
    if (dt == 0.0) {
        GaussianState unchanged = state;
        unchanged.t_last = t;
        return unchanged;
    }
    const DiscreteTransition trans = discretize(ssm, dt);
    GaussianState next;
    next.m = trans.A * state.m;
    next.P = trans.A * state.P * trans.A.transpose() + trans.Sigma;
    next.P = 0.5 * (next.P + next.P.transpose()).eval();
    next.t_last = t;
    return next;
}

/// Observation-space forecast from a propagated (prior) state:
///   mean = h'm + mu,  variance = h'Ph + sigma_n^2.
inline PredictiveDistribution predictive(const GaussianState& prior_state,
                                         const StateSpaceModel& ssm, double noise_variance,
                                         double mean_at_t) {
    const double mean = ssm.h.dot(prior_state.m) + mean_at_t;
    const double variance = ssm.h.dot(prior_state.P * ssm.h) + noise_variance;
    return {mean, variance};
}

/// Absorbs observation y into a propagated state (standard Kalman update
/// with post-hoc symmetrization).
inline GaussianState update_state(const GaussianState& prior_state, const StateSpaceModel& ssm,
                                  double noise_variance, double mean_at_t, double y) {
    const PredictiveDistribution pred = predictive(prior_state, ssm, noise_variance, mean_at_t);
    const Eigen::VectorXd gain = (prior_state.P * ssm.h) / pred.variance;
    GaussianState posterior;
    posterior.m = prior_state.m + gain * (y - pred.mean);
    posterior.P = prior_state.P - gain * gain.transpose() * pred.variance;
    posterior.P = 0.5 * (posterior.P + posterior.P.transpose()).eval();
    posterior.t_last = prior_state.t_last;
    return posterior;
}

/// Log evidence of the dataset by prediction-error decomposition:
/// sum of per-step predictive log densities over one filtering pass.
inline double stream_loglik(const StateSpaceModel& ssm, double noise_variance,
                            double mean_constant, const GPDataset& data) {
    double total = 0.0;
    GaussianState state = init_state(ssm);
    for (std::size_t i = 0; i < data.size(); ++i) {
        state = predict_state(state, ssm, data.times[i]);
        const PredictiveDistribution pred = predictive(state, ssm, noise_variance, mean_constant);
        total += gaussian_log_density(data.values[i], pred);
        state = update_state(state, ssm, noise_variance, mean_constant, data.values[i]);
    }
    return total;
}

} // namespace lintel
