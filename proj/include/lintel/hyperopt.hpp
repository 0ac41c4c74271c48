#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "lintel/errors.hpp"
#include "lintel/kernel_gp.hpp"
#include "lintel/kernels.hpp"
#include "lintel/markov_gp.hpp"
#include "lintel/nelder_mead.hpp"
#include "lintel/random.hpp"

namespace lintel {

/// Hyperparameters in log space: [log sigma_f^2, log ell] per leaf kernel
/// (in spec order), then log sigma_n^2 last. The constant mean C is carried
/// alongside but not optimized.
struct HyperParams {
    Eigen::VectorXd log_params;
    double mean_constant = 0.0;
};

struct Candidate {
    KernelSpec spec;
    double noise_variance = 0.0;
};

/// Candidate models competing in the ensemble; all share one mean constant.
struct CandidateBank {
    std::vector<Candidate> candidates;
    double mean_constant = 0.0;
};

namespace detail {

inline std::size_t count_leaves(const KernelSpec& spec) {
    if (spec.family != KernelFamily::SumOfKernels) return 1;
    return spec.children.size();
}

inline void write_leaf_params(KernelSpec& spec, const Eigen::VectorXd& log_params,
                              Eigen::Index& cursor) {
    if (spec.family == KernelFamily::SumOfKernels) {
        for (auto& child : spec.children) write_leaf_params(child, log_params, cursor);
        return;
    }
    spec.process_variance = std::exp(log_params(cursor++));
    spec.lengthscale = std::exp(log_params(cursor++));
}

inline void read_leaf_params(const KernelSpec& spec, Eigen::VectorXd& log_params,
                             Eigen::Index& cursor) {
    if (spec.family == KernelFamily::SumOfKernels) {
        for (const auto& child : spec.children) read_leaf_params(child, log_params, cursor);
        return;
    }
    log_params(cursor++) = std::log(spec.process_variance);
    log_params(cursor++) = std::log(spec.lengthscale);
}

inline void scale_leaf_process_variance(KernelSpec& spec, double factor) {
    if (spec.family == KernelFamily::SumOfKernels) {
        for (auto& child : spec.children) scale_leaf_process_variance(child, factor);
        return;
    }
    spec.process_variance *= factor;
}

} // namespace detail

inline Eigen::Index param_count(const KernelSpec& spec) {
    return static_cast<Eigen::Index>(2 * detail::count_leaves(spec) + 1);
}

/// Rebuilds a concrete spec from the template shape and a log-parameter
/// vector; the last entry is the noise variance.
inline KernelSpec apply_params(const KernelSpec& spec_template,
                               const Eigen::VectorXd& log_params) {
    KernelSpec spec = spec_template;
    Eigen::Index cursor = 0;
    detail::write_leaf_params(spec, log_params, cursor);
    return spec;
}

inline double noise_variance_of(const Eigen::VectorXd& log_params) {
    return std::exp(log_params(log_params.size() - 1));
}

inline HyperParams pack_params(const KernelSpec& spec, double noise_variance,
                               double mean_constant) {
    HyperParams params;
    params.log_params.resize(param_count(spec));
    Eigen::Index cursor = 0;
    detail::read_leaf_params(spec, params.log_params, cursor);
    params.log_params(cursor) = std::log(noise_variance);
    params.mean_constant = mean_constant;
    return params;
}

/// Evidence of the pretraining data under the state-space route
/// (prediction-error decomposition); this is what fit_evidence maximizes.
inline double evidence(const KernelSpec& spec_template, const Eigen::VectorXd& log_params,
                       const GPDataset& pretrain) {
    const KernelSpec spec = apply_params(spec_template, log_params);
    return stream_loglik(to_state_space(spec), noise_variance_of(log_params),
                         pretrain.mean_constant, pretrain);
}

/// Maximizes the evidence over log hyperparameters with Nelder-Mead,
/// spreading the evaluation budget over the init point plus five random
/// restarts. C is pinned to the pretraining mean. Never returns a point
/// worse than `init`.
inline HyperParams fit_evidence(const KernelSpec& spec_template, const GPDataset& pretrain,
                                const HyperParams& init, int budget,
                                std::uint64_t seed = 0xf17e5eed) {
    validate(spec_template);
    if (pretrain.size() < 10)
        throw invalid_spec_error("fit_evidence needs at least 10 pretraining points");
    if (init.log_params.size() != param_count(spec_template))
        throw invalid_spec_error("init parameter vector does not match the template");

    double pretrain_mean = 0.0;
    for (double v : pretrain.values) pretrain_mean += v;
    pretrain_mean /= static_cast<double>(pretrain.size());
    GPDataset centered = pretrain;
    centered.mean_constant = pretrain_mean;

    HyperParams best = init;
    best.mean_constant = pretrain_mean;
    if (budget <= 0) return best;

    auto objective = [&](const Eigen::VectorXd& log_params) {
        if (!log_params.allFinite()) return std::numeric_limits<double>::infinity();
        try {
            const double value = evidence(spec_template, log_params, centered);
            return std::isfinite(value) ? -value : std::numeric_limits<double>::infinity();
        } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    const double init_objective = objective(init.log_params);
    double best_objective = init_objective;
    int spent = 1;

    constexpr int n_restarts = 5;
    const int per_run = std::max(1, budget / (n_restarts + 1));
    Rng rng(seed);
    bool any_finite = std::isfinite(init_objective);
    for (int run = 0; run <= n_restarts && spent < budget; ++run) {
        Eigen::VectorXd start = init.log_params;
        if (run > 0)
            for (Eigen::Index i = 0; i < start.size(); ++i) start(i) += rng.normal();
        const int allowed = std::min(per_run, budget - spent);
        const NelderMeadResult run_result =
            nelder_mead_minimize(objective, start, 0.3, allowed);
        spent += run_result.evaluations;
        if (std::isfinite(run_result.value)) any_finite = true;
        if (run_result.value < best_objective) {
            best_objective = run_result.value;
            best.log_params = run_result.x;
        }
    }
    if (!any_finite)
        throw numerical_error("fit_evidence: objective non-finite at every initialization");
    return best;
}

enum class CandidateScheme { TwoModel, CPUGrid };

/// Fitted model plus one prescribed alternative.
inline CandidateBank make_two_model_bank(const KernelSpec& fitted, double fitted_noise,
                                         const KernelSpec& alternative, double alternative_noise,
                                         double mean_constant) {
    validate(fitted);
    validate(alternative);
    return {{{fitted, fitted_noise}, {alternative, alternative_noise}}, mean_constant};
}

/// The {x2, x1, x1/2} grid over (process variance, noise variance) around
/// the fitted model, minus the identity pair: exactly eight candidates.
/// `include_fitted` adds the fitted model itself as a ninth.
inline CandidateBank make_cpu_grid_bank(const KernelSpec& fitted, double fitted_noise,
                                        double mean_constant, bool include_fitted = false) {
    validate(fitted);
    CandidateBank bank;
    bank.mean_constant = mean_constant;
    const double scales[] = {1.0, 2.0, 0.5};
    for (double process_scale : scales) {
        for (double noise_scale : scales) {
            if (process_scale == 1.0 && noise_scale == 1.0) continue;
            KernelSpec spec = fitted;
            detail::scale_leaf_process_variance(spec, process_scale);
            bank.candidates.push_back({spec, fitted_noise * noise_scale});
        }
    }
    if (include_fitted) bank.candidates.push_back({fitted, fitted_noise});
    return bank;
}

inline void to_json(nlohmann::json& j, const Candidate& candidate) {
    j = nlohmann::json{{"kernel", candidate.spec}, {"noise_variance", candidate.noise_variance}};
}

inline void from_json(const nlohmann::json& j, Candidate& candidate) {
    j.at("kernel").get_to(candidate.spec);
    j.at("noise_variance").get_to(candidate.noise_variance);
    if (!(candidate.noise_variance > 0.0))
        throw invalid_spec_error("candidate noise variance must be positive");
}

inline void to_json(nlohmann::json& j, const CandidateBank& bank) {
    j = nlohmann::json{{"schema", "lintel/bank-v1"},
                       {"mean_constant", bank.mean_constant},
                       {"candidates", bank.candidates}};
}

inline void from_json(const nlohmann::json& j, CandidateBank& bank) {
    j.at("mean_constant").get_to(bank.mean_constant);
    j.at("candidates").get_to(bank.candidates);
    if (bank.candidates.empty()) throw invalid_spec_error("candidate bank is empty");
}

} // namespace lintel
