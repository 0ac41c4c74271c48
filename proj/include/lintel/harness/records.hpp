#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lintel/errors.hpp"
#include "lintel/harness/metrics.hpp"
#include "lintel/streaming.hpp"

namespace lintel {

inline constexpr const char* kRecordsSchema = "lintel/records-v1";

inline void to_json(nlohmann::json& j, const StepRecord& record) {
    j = nlohmann::json{{"t", record.t},
                       {"y", record.y},
                       {"mean", record.fused_mean},
                       {"var", record.fused_var},
                       {"model_means", record.model_means},
                       {"model_vars", record.model_vars},
                       {"weights", record.weights_used},
                       {"outlier", record.is_outlier},
                       {"changepoint", record.changepoint}};
}

inline void from_json(const nlohmann::json& j, StepRecord& record) {
    j.at("t").get_to(record.t);
    j.at("y").get_to(record.y);
    j.at("mean").get_to(record.fused_mean);
    j.at("var").get_to(record.fused_var);
    j.at("model_means").get_to(record.model_means);
    j.at("model_vars").get_to(record.model_vars);
    j.at("weights").get_to(record.weights_used);
    j.at("outlier").get_to(record.is_outlier);
    j.at("changepoint").get_to(record.changepoint);
}

/// Newline-delimited JSON: a schema header line, one record per line, and an
/// optional trailing summary line.
inline void write_records(std::ostream& out, const std::vector<StepRecord>& records,
                          const MetricsReport* summary = nullptr) {
    out << nlohmann::json{{"schema", kRecordsSchema}, {"count", records.size()}}.dump() << '\n';
    for (const auto& record : records) out << nlohmann::json(record).dump() << '\n';
    if (summary) out << nlohmann::json{{"summary", *summary}}.dump() << '\n';
}

struct RecordsFile {
    std::vector<StepRecord> records;
    std::optional<MetricsReport> summary;
};

inline RecordsFile read_records(std::istream& in) {
    RecordsFile file;
    std::string line;
    if (!std::getline(in, line)) throw ingestion_error("records stream is empty");
    const nlohmann::json header = nlohmann::json::parse(line);
    if (header.value("schema", "") != kRecordsSchema)
        throw ingestion_error("unexpected records schema: " + header.value("schema", "<none>"));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        if (j.contains("summary")) {
            file.summary = j.at("summary").get<MetricsReport>();
        } else {
            file.records.push_back(j.get<StepRecord>());
        }
    }
    return file;
}

} // namespace lintel
