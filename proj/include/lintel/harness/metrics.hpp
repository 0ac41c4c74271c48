#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <json.hpp>

#include "lintel/gaussian.hpp"
#include "lintel/streaming.hpp"

namespace lintel {

struct MetricsReport {
    double mpll = 0.0;
    double nmse = 0.0;
    double runtime_seconds = 0.0;
    int n_outliers_flagged = 0;
    int n_changepoints = 0;
    int n_scored = 0;
    bool nmse_degenerate = false;
};

/// Scores a record stream: mean predictive log density and mean squared
/// error normalized by the variance of the scored observations. When truth
/// labels are supplied and exclusion is requested, known true outliers do
/// not enter either metric. A constant series has no defined nMSE; it is
/// reported as NaN with the degenerate flag set.
inline MetricsReport score(const std::vector<StepRecord>& records,
                           const std::vector<std::uint8_t>* truth = nullptr,
                           bool exclude_true_outliers = true) {
    MetricsReport report;
    double log_density_sum = 0.0;
    double value_sum = 0.0;
    int scored = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const StepRecord& record = records[i];
        report.n_outliers_flagged += record.is_outlier ? 1 : 0;
        report.n_changepoints += record.changepoint ? 1 : 0;
        if (truth && exclude_true_outliers && i < truth->size() && (*truth)[i]) continue;
        log_density_sum += gaussian_log_density(record.y, record.fused_mean, record.fused_var);
        value_sum += record.y;
        ++scored;
    }
    report.n_scored = scored;
    if (scored == 0) {
        report.mpll = std::numeric_limits<double>::quiet_NaN();
        report.nmse = std::numeric_limits<double>::quiet_NaN();
        report.nmse_degenerate = true;
        return report;
    }
    report.mpll = log_density_sum / scored;

    const double value_mean = value_sum / scored;
    double variance_sum = 0.0;
    double squared_error_sum = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const StepRecord& record = records[i];
        if (truth && exclude_true_outliers && i < truth->size() && (*truth)[i]) continue;
        const double centered = record.y - value_mean;
        variance_sum += centered * centered;
        const double error = record.fused_mean - record.y;
        squared_error_sum += error * error;
    }
    const double sample_variance = variance_sum / scored;
    if (sample_variance > 0.0) {
        report.nmse = squared_error_sum / scored / sample_variance;
    } else {
        report.nmse = std::numeric_limits<double>::quiet_NaN();
        report.nmse_degenerate = true;
    }
    return report;
}

// NaN has no JSON representation; degenerate metrics travel as null.
inline void to_json(nlohmann::json& j, const MetricsReport& report) {
    auto number_or_null = [](double v) {
        return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
    };
    j = nlohmann::json{{"mpll", number_or_null(report.mpll)},
                       {"nmse", number_or_null(report.nmse)},
                       {"runtime_seconds", report.runtime_seconds},
                       {"n_outliers_flagged", report.n_outliers_flagged},
                       {"n_changepoints", report.n_changepoints},
                       {"n_scored", report.n_scored},
                       {"nmse_degenerate", report.nmse_degenerate}};
}

inline void from_json(const nlohmann::json& j, MetricsReport& report) {
    auto read_number = [&](const char* key) {
        const auto& field = j.at(key);
        return field.is_null() ? std::numeric_limits<double>::quiet_NaN()
                               : field.get<double>();
    };
    report.mpll = read_number("mpll");
    report.nmse = read_number("nmse");
    j.at("runtime_seconds").get_to(report.runtime_seconds);
    j.at("n_outliers_flagged").get_to(report.n_outliers_flagged);
    j.at("n_changepoints").get_to(report.n_changepoints);
    j.at("n_scored").get_to(report.n_scored);
    j.at("nmse_degenerate").get_to(report.nmse_degenerate);
}

} // namespace lintel
