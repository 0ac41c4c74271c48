#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lintel/errors.hpp"
#include "lintel/harness/metrics.hpp"
#include "lintel/harness/synth.hpp"
#include "lintel/harness/timeseries.hpp"
#include "lintel/hyperopt.hpp"
#include "lintel/streaming.hpp"

namespace lintel {

enum class Algorithm { Lintel, Intel };

struct DataConfig {
    enum class Source { SynthOutliers, SynthRegimes, Csv } source = Source::SynthOutliers;
    std::uint64_t seed = 0;
    std::string path;
    CsvSchema schema;
};

struct CandidateConfig {
    enum class Mode { Fit, Bank } mode = Mode::Fit;
    CandidateScheme scheme = CandidateScheme::TwoModel;
    KernelSpec template_spec = synthetic_truth_kernel();
    Candidate alternative{KernelSpec::matern52(1.0, 8.0), 0.09};
    bool include_fitted = false;
    int budget = 500;
    std::uint64_t fit_seed = 0xf17e5eed;
    CandidateBank bank; // Mode::Bank only
};

struct ExperimentConfig {
    Algorithm algorithm = Algorithm::Lintel;
    std::optional<FusionRule> fusion; // default depends on the algorithm
    DataConfig data;
    int pretrain = 250;
    double alpha = 0.9;
    int n_pcb_max = 3;
    int window = 20;
    std::size_t mean_update_period = kNeverRecenter;
    WeightVector initial_weights;
    std::optional<double> initial_mean; // default: the bank's shared C
    CandidateConfig candidates;
};

struct ExperimentResult {
    MetricsReport metrics;
    std::vector<StepRecord> records;
    CandidateBank bank;
    int pretrain = 0;
    TimeSeriesFile series;
};

namespace detail {

inline double sample_mean(const std::vector<double>& values, std::size_t count) {
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) total += values[i];
    return total / static_cast<double>(count);
}

inline double sample_variance(const std::vector<double>& values, std::size_t count) {
    const double mean = sample_mean(values, count);
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double gap = values[i] - mean;
        total += gap * gap;
    }
    return total / static_cast<double>(count);
}

// Data-driven starting point: split the sample variance across leaves and
// place lengthscales on a decade ladder above the mean spacing.
inline HyperParams heuristic_init(const KernelSpec& spec_template, const GPDataset& pretrain) {
    const std::size_t n_leaves = count_leaves(spec_template);
    const double variance = std::max(sample_variance(pretrain.values, pretrain.size()), 1e-6);
    const double spacing = (pretrain.times.back() - pretrain.times.front()) /
                           static_cast<double>(pretrain.size() - 1);
    KernelSpec init_spec = spec_template;
    double lengthscale = 10.0 * spacing;
    std::vector<KernelSpec*> leaves;
    if (init_spec.family == KernelFamily::SumOfKernels) {
        for (auto& child : init_spec.children) leaves.push_back(&child);
    } else {
        leaves.push_back(&init_spec);
    }
    for (auto* leaf : leaves) {
        leaf->process_variance = variance / static_cast<double>(n_leaves);
        leaf->lengthscale = lengthscale;
        lengthscale = std::max(lengthscale / 10.0, spacing / 10.0);
    }
    return pack_params(init_spec, variance / 10.0, 0.0);
}

} // namespace detail

inline TimeSeriesFile load_series(const DataConfig& data) {
    switch (data.source) {
    case DataConfig::Source::SynthOutliers: return synth_outliers(data.seed);
    case DataConfig::Source::SynthRegimes: return synth_regimes(data.seed);
    case DataConfig::Source::Csv: return ingest_csv(data.path, data.schema);
    }
    throw config_error("data.source: unknown source");
}

/// Fits hyperparameters on the pretraining prefix and expands them into the
/// configured candidate bank.
inline CandidateBank build_bank(const CandidateConfig& config, const TimeSeriesFile& series,
                                int pretrain) {
    if (config.mode == CandidateConfig::Mode::Bank) return config.bank;
    if (pretrain < 10)
        throw config_error("pretrain: fitting candidates needs at least 10 points");

    GPDataset prefix;
    prefix.times.assign(series.times.begin(), series.times.begin() + pretrain);
    prefix.values.assign(series.values.begin(), series.values.begin() + pretrain);
    const HyperParams init = detail::heuristic_init(config.template_spec, prefix);
    const HyperParams fitted =
        fit_evidence(config.template_spec, prefix, init, config.budget, config.fit_seed);
    const KernelSpec fitted_spec = apply_params(config.template_spec, fitted.log_params);
    const double fitted_noise = noise_variance_of(fitted.log_params);

    if (config.scheme == CandidateScheme::TwoModel)
        return make_two_model_bank(fitted_spec, fitted_noise, config.alternative.spec,
                                   config.alternative.noise_variance, fitted.mean_constant);
    return make_cpu_grid_bank(fitted_spec, fitted_noise, fitted.mean_constant,
                              config.include_fitted);
}

inline StreamConfig make_stream_config(const ExperimentConfig& config, const CandidateBank& bank) {
    StreamConfig stream;
    stream.n_pcb_max = config.n_pcb_max;
    stream.forgetting_alpha = config.alpha;
    stream.mean_update_period = config.mean_update_period;
    stream.window = config.window;
    stream.fusion_rule = config.fusion.value_or(config.algorithm == Algorithm::Lintel
                                                    ? FusionRule::Arithmetic
                                                    : FusionRule::Geometric);
    stream.initial_weights = config.initial_weights;
    stream.initial_mean = config.initial_mean.value_or(bank.mean_constant);
    return stream;
}

struct StreamOutcome {
    std::vector<StepRecord> records;
    double runtime_seconds = 0.0;
};

/// Streams series[pretrain..) through the chosen engine. The wall clock
/// covers the streaming loop only.
inline StreamOutcome run_stream(const TimeSeriesFile& series, int pretrain,
                                const CandidateBank& bank, Algorithm algorithm,
                                const StreamConfig& stream) {
    const auto n = series.size();
    if (pretrain < 0 || static_cast<std::size_t>(pretrain) >= n)
        throw config_error("pretrain: must be in [0, series length)");
    StreamOutcome outcome;
    outcome.records.reserve(n - static_cast<std::size_t>(pretrain));
    if (algorithm == Algorithm::Lintel) {
        std::vector<LintelModel> models;
        models.reserve(bank.candidates.size());
        for (const auto& candidate : bank.candidates)
            models.push_back({to_state_space(candidate.spec), candidate.noise_variance});
        LintelState state = make_lintel_state(models, stream);
        const auto start = std::chrono::steady_clock::now();
        for (std::size_t i = static_cast<std::size_t>(pretrain); i < n; ++i)
            outcome.records.push_back(
                step_lintel(state, models, stream, series.times[i], series.values[i]));
        const auto stop = std::chrono::steady_clock::now();
        outcome.runtime_seconds = std::chrono::duration<double>(stop - start).count();
    } else {
        std::vector<IntelModel> models;
        models.reserve(bank.candidates.size());
        for (const auto& candidate : bank.candidates)
            models.push_back({candidate.spec, candidate.noise_variance});
        IntelState state = make_intel_state(models, stream);
        const auto start = std::chrono::steady_clock::now();
        for (std::size_t i = static_cast<std::size_t>(pretrain); i < n; ++i)
            outcome.records.push_back(
                step_intel(state, models, stream, series.times[i], series.values[i]));
        const auto stop = std::chrono::steady_clock::now();
        outcome.runtime_seconds = std::chrono::duration<double>(stop - start).count();
    }
    return outcome;
}

/// Metrics for a finished stream; known true outliers are excluded from the
/// scoring when the series carries a truth column.
inline MetricsReport score_outcome(const TimeSeriesFile& series, int pretrain,
                                   const StreamOutcome& outcome) {
    MetricsReport metrics;
    if (series.has_outlier_truth()) {
        const std::vector<std::uint8_t> truth_slice(series.outlier_truth.begin() + pretrain,
                                                    series.outlier_truth.end());
        metrics = score(outcome.records, &truth_slice, true);
    } else {
        metrics = score(outcome.records, nullptr, false);
    }
    metrics.runtime_seconds = outcome.runtime_seconds;
    return metrics;
}

/// Runs one experiment end to end: load or generate data, fit on the
/// pretraining prefix, stream the rest, and score.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
    ExperimentResult result;
    result.series = load_series(config.data);
    if (config.pretrain < 0 || static_cast<std::size_t>(config.pretrain) >= result.series.size())
        throw config_error("pretrain: must be in [0, series length)");
    result.pretrain = config.pretrain;
    result.bank = build_bank(config.candidates, result.series, config.pretrain);
    const StreamConfig stream = make_stream_config(config, result.bank);
    StreamOutcome outcome = run_stream(result.series, config.pretrain, result.bank,
                                       config.algorithm, stream);
    result.metrics = score_outcome(result.series, config.pretrain, outcome);
    result.records = std::move(outcome.records);
    return result;
}

// --- configuration file parsing ---------------------------------------

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& what) {
    throw config_error(path + ": " + what);
}

template <typename T>
T config_get(const nlohmann::json& j, const std::string& path, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        config_fail(path + "." + key, e.what());
    }
}

} // namespace detail

/// Parses the optional "candidates" section; anything not given falls back
/// to the synthetic-experiment defaults.
inline CandidateConfig parse_candidate_config(const nlohmann::json& j) {
    CandidateConfig config;
    if (!j.contains("candidates")) return config;
    const auto& candidates = j.at("candidates");

    if (candidates.contains("bank")) {
        config.mode = CandidateConfig::Mode::Bank;
        try {
            config.bank = candidates.at("bank").get<CandidateBank>();
        } catch (const std::exception& e) {
            detail::config_fail("candidates.bank", e.what());
        }
        return config;
    }
    if (candidates.contains("bank_path")) {
        config.mode = CandidateConfig::Mode::Bank;
        const auto path = candidates.at("bank_path").get<std::string>();
        std::ifstream in(path);
        if (!in) detail::config_fail("candidates.bank_path", "cannot open " + path);
        try {
            config.bank = nlohmann::json::parse(in).get<CandidateBank>();
        } catch (const std::exception& e) {
            detail::config_fail("candidates.bank_path", e.what());
        }
        return config;
    }

    const std::string scheme =
        detail::config_get<std::string>(candidates, "candidates", "scheme", "two_model");
    if (scheme == "two_model") config.scheme = CandidateScheme::TwoModel;
    else if (scheme == "cpu_grid") config.scheme = CandidateScheme::CPUGrid;
    else detail::config_fail("candidates.scheme", "expected 'two_model' or 'cpu_grid'");
    if (candidates.contains("template")) {
        try {
            config.template_spec = candidates.at("template").get<KernelSpec>();
        } catch (const std::exception& e) {
            detail::config_fail("candidates.template", e.what());
        }
    }
    if (candidates.contains("alternative")) {
        try {
            config.alternative = candidates.at("alternative").get<Candidate>();
        } catch (const std::exception& e) {
            detail::config_fail("candidates.alternative", e.what());
        }
    }
    config.include_fitted =
        detail::config_get<bool>(candidates, "candidates", "include_fitted", false);
    config.budget = detail::config_get<int>(candidates, "candidates", "budget", 500);
    if (config.budget < 0) detail::config_fail("candidates.budget", "must be nonnegative");
    config.fit_seed =
        detail::config_get<std::uint64_t>(candidates, "candidates", "fit_seed", 0xf17e5eed);
    return config;
}

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
    ExperimentConfig config;

    const std::string algorithm = detail::config_get<std::string>(j, "", "algorithm", "lintel");
    if (algorithm == "lintel") config.algorithm = Algorithm::Lintel;
    else if (algorithm == "intel") config.algorithm = Algorithm::Intel;
    else detail::config_fail("algorithm", "expected 'lintel' or 'intel', got '" + algorithm + "'");

    if (j.contains("fusion")) {
        const std::string fusion = j.at("fusion").get<std::string>();
        if (fusion == "arithmetic") config.fusion = FusionRule::Arithmetic;
        else if (fusion == "geometric") config.fusion = FusionRule::Geometric;
        else detail::config_fail("fusion", "expected 'arithmetic' or 'geometric'");
    }

    if (j.contains("data")) {
        const auto& data = j.at("data");
        const std::string source =
            detail::config_get<std::string>(data, "data", "source", "synth_outliers");
        if (source == "synth_outliers") config.data.source = DataConfig::Source::SynthOutliers;
        else if (source == "synth_regimes") config.data.source = DataConfig::Source::SynthRegimes;
        else if (source == "csv") config.data.source = DataConfig::Source::Csv;
        else detail::config_fail("data.source", "unknown source '" + source + "'");
        config.data.seed = detail::config_get<std::uint64_t>(data, "data", "seed", 0);
        config.data.path = detail::config_get<std::string>(data, "data", "path", "");
        if (config.data.source == DataConfig::Source::Csv && config.data.path.empty())
            detail::config_fail("data.path", "required when data.source is 'csv'");
        config.data.schema.time_column =
            detail::config_get<std::string>(data, "data", "time_column", "timestamp");
        config.data.schema.value_column =
            detail::config_get<std::string>(data, "data", "value_column", "value");
        config.data.schema.outlier_column =
            detail::config_get<std::string>(data, "data", "outlier_column", "outlier");
        config.data.schema.regime_column =
            detail::config_get<std::string>(data, "data", "regime_column", "regime");
        config.data.schema.time_unit =
            detail::config_get<double>(data, "data", "time_unit", 1.0);
        if (!(config.data.schema.time_unit > 0.0))
            detail::config_fail("data.time_unit", "must be positive");
    }

    config.pretrain = detail::config_get<int>(j, "", "pretrain", 250);
    if (config.pretrain < 0) detail::config_fail("pretrain", "must be nonnegative");

    if (j.contains("stream")) {
        const auto& stream = j.at("stream");
        config.alpha = detail::config_get<double>(stream, "stream", "alpha", 0.9);
        if (config.alpha < 0.0 || config.alpha > 1.0)
            detail::config_fail("stream.alpha", "must be in [0, 1]");
        config.n_pcb_max = detail::config_get<int>(stream, "stream", "n_pcb_max", 3);
        if (config.n_pcb_max < 1) detail::config_fail("stream.n_pcb_max", "must be >= 1");
        config.window = detail::config_get<int>(stream, "stream", "tau", 20);
        if (config.window < 2) detail::config_fail("stream.tau", "must be >= 2");
        if (stream.contains("mean_update_period") && !stream.at("mean_update_period").is_null()) {
            const auto period = stream.at("mean_update_period").get<long long>();
            if (period < 1) detail::config_fail("stream.mean_update_period", "must be >= 1");
            config.mean_update_period = static_cast<std::size_t>(period);
        }
        if (stream.contains("initial_mean") && !stream.at("initial_mean").is_null())
            config.initial_mean = stream.at("initial_mean").get<double>();
        if (stream.contains("initial_weights")) {
            const auto weights = stream.at("initial_weights").get<std::vector<double>>();
            config.initial_weights.resize(static_cast<Eigen::Index>(weights.size()));
            for (std::size_t i = 0; i < weights.size(); ++i) {
                if (!(weights[i] >= 0.0))
                    detail::config_fail("stream.initial_weights", "weights must be nonnegative");
                config.initial_weights(static_cast<Eigen::Index>(i)) = weights[i];
            }
        }
    }

    config.candidates = parse_candidate_config(j);
    return config;
}

} // namespace lintel
