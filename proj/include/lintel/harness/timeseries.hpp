#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lintel/errors.hpp"

namespace lintel {

/// A parsed time series: strictly increasing timestamps, one value per row,
/// optional 0/1 truth columns for injected outliers and regime membership.
struct TimeSeriesFile {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<std::uint8_t> outlier_truth; // empty if absent
    std::vector<std::uint8_t> regime_truth;  // empty if absent

    std::size_t size() const { return times.size(); }
    bool has_outlier_truth() const { return !outlier_truth.empty(); }
    bool has_regime_truth() const { return !regime_truth.empty(); }
};

struct CsvSchema {
    std::string time_column = "timestamp";
    std::string value_column = "value";
    std::string outlier_column = "outlier"; // optional in the file
    std::string regime_column = "regime";   // optional in the file
    double time_unit = 1.0;
};

namespace detail {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
inline long long days_from_civil(int year, unsigned month, unsigned day) {
    year -= month <= 2;
    const long long era = (year >= 0 ? year : year - 399) / 400;
    const unsigned year_of_era = static_cast<unsigned>(year - era * 400);
    const unsigned day_of_year = (153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const unsigned day_of_era = year_of_era * 365 + year_of_era / 4 - year_of_era / 100 + day_of_year;
    return era * 146097 + static_cast<long long>(day_of_era) - 719468;
}

inline bool parse_double(const std::string& text, double& out) {
    const char* begin = text.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end != begin && *end == '\0';
}

// "YYYY-MM-DD HH:MM:SS[.fff]" (or with 'T') to epoch seconds, timezone-free.
inline bool parse_datetime(const std::string& text, double& out) {
    int year = 0, month = 0, day = 0, hour = 0, minute = 0;
    double second = 0.0;
    char sep = 0;
    const int matched = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%lf", &year, &month, &day,
                                    &sep, &hour, &minute, &second);
    if (matched != 7 || (sep != ' ' && sep != 'T')) return false;
    if (month < 1 || month > 12 || day < 1 || day > 31) return false;
    out = static_cast<double>(days_from_civil(year, static_cast<unsigned>(month),
                                              static_cast<unsigned>(day))) *
              86400.0 +
          hour * 3600.0 + minute * 60.0 + second;
    return true;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream stream(line);
    while (std::getline(stream, field, ',')) {
        while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back())))
            field.pop_back();
        std::size_t start = 0;
        while (start < field.size() && std::isspace(static_cast<unsigned char>(field[start])))
            ++start;
        fields.push_back(field.substr(start));
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline int find_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

} // namespace detail

/// Reads a delimited time-series file. Numeric timestamps are used directly;
/// datetime timestamps are converted to seconds since the first row. Both are
/// then divided by schema.time_unit. Timestamps must be strictly increasing.
inline TimeSeriesFile ingest_csv(const std::string& path, const CsvSchema& schema = {}) {
    std::ifstream input(path);
    if (!input) throw ingestion_error("cannot open " + path);

    std::string line;
    if (!std::getline(input, line)) throw ingestion_error(path + ": empty file");
    const std::vector<std::string> header = detail::split_csv_line(line);
    const int time_idx = detail::find_column(header, schema.time_column);
    const int value_idx = detail::find_column(header, schema.value_column);
    const int outlier_idx = detail::find_column(header, schema.outlier_column);
    const int regime_idx = detail::find_column(header, schema.regime_column);
    if (time_idx < 0)
        throw ingestion_error(path + ": missing column '" + schema.time_column + "'");
    if (value_idx < 0)
        throw ingestion_error(path + ": missing column '" + schema.value_column + "'");

    TimeSeriesFile series;
    bool datetime_mode = false;
    double first_raw = 0.0;
    std::size_t row = 0;
    while (std::getline(input, line)) {
        ++row;
        if (line.empty()) continue;
        const std::vector<std::string> fields = detail::split_csv_line(line);
        const auto need = static_cast<std::size_t>(std::max(time_idx, value_idx)) + 1;
        if (fields.size() < need)
            throw ingestion_error(path + ": row " + std::to_string(row) + ": too few fields");

        double raw_time = 0.0;
        const std::string& time_text = fields[static_cast<std::size_t>(time_idx)];
        if (series.times.empty()) {
            if (detail::parse_double(time_text, raw_time)) {
                datetime_mode = false;
            } else if (detail::parse_datetime(time_text, raw_time)) {
                datetime_mode = true;
                first_raw = raw_time;
            } else {
                throw ingestion_error(path + ": row " + std::to_string(row) +
                                      ": unparseable timestamp '" + time_text + "'");
            }
        } else {
            const bool ok = datetime_mode ? detail::parse_datetime(time_text, raw_time)
                                          : detail::parse_double(time_text, raw_time);
            if (!ok)
                throw ingestion_error(path + ": row " + std::to_string(row) +
                                      ": unparseable timestamp '" + time_text + "'");
        }
        const double t = (datetime_mode ? raw_time - first_raw : raw_time) / schema.time_unit;

        double value = 0.0;
        if (!detail::parse_double(fields[static_cast<std::size_t>(value_idx)], value))
            throw ingestion_error(path + ": row " + std::to_string(row) +
                                  ": unparseable value '" +
                                  fields[static_cast<std::size_t>(value_idx)] + "'");

        if (!series.times.empty() && !(t > series.times.back()))
            throw ingestion_error(path + ": row " + std::to_string(row) +
                                  ": timestamps not strictly increasing");
        series.times.push_back(t);
        series.values.push_back(value);
        if (outlier_idx >= 0 && static_cast<std::size_t>(outlier_idx) < fields.size())
            series.outlier_truth.push_back(
                fields[static_cast<std::size_t>(outlier_idx)] == "1" ? 1 : 0);
        if (regime_idx >= 0 && static_cast<std::size_t>(regime_idx) < fields.size())
            series.regime_truth.push_back(
                fields[static_cast<std::size_t>(regime_idx)] == "1" ? 1 : 0);
    }
    if (series.times.empty()) throw ingestion_error(path + ": no data rows");
    return series;
}

/// Writes a series with full double precision so that ingest_csv round-trips.
inline void write_csv(const std::string& path, const TimeSeriesFile& series,
                      const CsvSchema& schema = {}) {
    std::ofstream out(path);
    if (!out) throw ingestion_error("cannot write " + path);
    out << schema.time_column << ',' << schema.value_column;
    if (series.has_outlier_truth()) out << ',' << schema.outlier_column;
    if (series.has_regime_truth()) out << ',' << schema.regime_column;
    out << '\n';
    char buffer[64];
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::snprintf(buffer, sizeof(buffer), "%.17g", series.times[i]);
        out << buffer << ',';
        std::snprintf(buffer, sizeof(buffer), "%.17g", series.values[i]);
        out << buffer;
        if (series.has_outlier_truth()) out << ',' << int(series.outlier_truth[i]);
        if (series.has_regime_truth()) out << ',' << int(series.regime_truth[i]);
        out << '\n';
    }
}

} // namespace lintel
