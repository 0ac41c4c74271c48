// Command-line front end: synthetic data generation, hyperparameter
// fitting, single streaming runs, and paired lintel/intel comparisons.

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <lintel/lintel.hpp>

namespace {

using nlohmann::json;

lintel::ExperimentConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream in(path);
    if (!in) throw lintel::config_error("cannot open config file " + path);
    json parsed;
    try {
        parsed = json::parse(in);
    } catch (const json::exception& e) {
        throw lintel::config_error(path + ": " + e.what());
    }
    return lintel::parse_experiment_config(parsed);
}

void apply_seed_override(lintel::ExperimentConfig& config) {
    if (const char* env = std::getenv("LINTEL_SEED")) {
        config.data.seed = std::strtoull(env, nullptr, 10);
    }
}

json run_summary(const lintel::ExperimentResult& result) {
    json out;
    out["metrics"] = result.metrics;
    out["n_records"] = result.records.size();
    out["n_candidates"] = result.bank.candidates.size();
    out["pretrain"] = result.pretrain;
    return out;
}

int cmd_synth(const std::string& kind, std::uint64_t seed, const std::string& out_path) {
    lintel::TimeSeriesFile series;
    if (kind == "outliers") {
        series = lintel::synth_outliers(seed);
    } else if (kind == "regimes") {
        series = lintel::synth_regimes(seed);
    } else {
        throw lintel::config_error("synth --kind: expected 'outliers' or 'regimes'");
    }
    lintel::write_csv(out_path, series);
    std::cout << "wrote " << series.size() << " rows to " << out_path << "\n";
    return 0;
}

int cmd_fit(const std::string& config_path, const std::string& out_path) {
    lintel::ExperimentConfig config = load_config(config_path);
    apply_seed_override(config);
    const lintel::TimeSeriesFile series = lintel::load_series(config.data);
    const lintel::CandidateBank bank =
        lintel::build_bank(config.candidates, series, config.pretrain);
    std::ofstream out(out_path);
    if (!out) throw lintel::config_error("cannot write " + out_path);
    out << json(bank).dump(2) << "\n";
    std::cout << "wrote " << bank.candidates.size() << " candidates to " << out_path << "\n";
    return 0;
}

int cmd_run(lintel::ExperimentConfig config, const std::string& records_path) {
    apply_seed_override(config);
    const lintel::ExperimentResult result = lintel::run_experiment(config);
    if (!records_path.empty()) {
        std::ofstream out(records_path);
        if (!out) throw lintel::config_error("cannot write " + records_path);
        lintel::write_records(out, result.records, &result.metrics);
    }
    if (result.metrics.nmse_degenerate)
        std::cerr << "warning: scored observations have zero variance; nMSE undefined\n";
    std::cout << run_summary(result).dump(2) << "\n";
    return 0;
}

int cmd_compare(lintel::ExperimentConfig base, int n_seeds) {
    apply_seed_override(base);
    json pairs = json::array();
    double lintel_time = 0.0;
    double intel_time = 0.0;

    std::vector<std::future<std::pair<lintel::MetricsReport, lintel::MetricsReport>>> futures;
    for (int i = 0; i < n_seeds; ++i) {
        lintel::ExperimentConfig config = base;
        config.data.seed = base.data.seed + static_cast<std::uint64_t>(i);
        futures.push_back(std::async(std::launch::async, [config]() {
            lintel::ExperimentConfig lintel_config = config;
            lintel_config.algorithm = lintel::Algorithm::Lintel;
            lintel::ExperimentConfig intel_config = config;
            intel_config.algorithm = lintel::Algorithm::Intel;
            return std::make_pair(lintel::run_experiment(lintel_config).metrics,
                                  lintel::run_experiment(intel_config).metrics);
        }));
    }
    for (int i = 0; i < n_seeds; ++i) {
        const auto [lintel_metrics, intel_metrics] = futures[static_cast<std::size_t>(i)].get();
        pairs.push_back(json{{"seed", base.data.seed + static_cast<std::uint64_t>(i)},
                             {"lintel", lintel_metrics},
                             {"intel", intel_metrics}});
        lintel_time += lintel_metrics.runtime_seconds;
        intel_time += intel_metrics.runtime_seconds;
    }

    json report;
    report["pairs"] = pairs;
    report["lintel_streaming_seconds"] = lintel_time;
    report["intel_streaming_seconds"] = intel_time;
    report["speedup"] = lintel_time > 0.0 ? intel_time / lintel_time : 0.0;
    std::cout << report.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming GP prediction with outlier rejection and regime resets"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark series");
    std::string synth_kind = "outliers";
    std::uint64_t synth_seed = 0;
    std::string synth_out = "synth.csv";
    synth->add_option("--kind", synth_kind, "outliers|regimes");
    synth->add_option("--seed", synth_seed, "RNG seed");
    synth->add_option("--out", synth_out, "Output CSV path")->required();

    auto* fit = app.add_subcommand("fit", "Fit hyperparameters and write a candidate bank");
    std::string fit_config;
    std::string fit_out = "bank.json";
    fit->add_option("--config", fit_config, "Experiment config (JSON)");
    fit->add_option("--out", fit_out, "Output bank path")->required();

    auto* run = app.add_subcommand("run", "Stream one experiment and print the summary");
    std::string run_config;
    std::string run_records;
    std::string run_algorithm;
    std::string run_fusion;
    std::int64_t run_seed = -1;
    run->add_option("--config", run_config, "Experiment config (JSON)");
    run->add_option("--records", run_records, "Write per-step records (NDJSON)");
    run->add_option("--algorithm", run_algorithm, "Override: lintel|intel");
    run->add_option("--fusion", run_fusion, "Override: arithmetic|geometric");
    run->add_option("--seed", run_seed, "Override data seed");

    auto* compare = app.add_subcommand("compare", "Run lintel and intel on the same data");
    std::string compare_config;
    int compare_seeds = 1;
    compare->add_option("--config", compare_config, "Experiment config (JSON)");
    compare->add_option("--seeds", compare_seeds, "Number of consecutive seeds")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);

        if (synth->parsed()) {
            std::uint64_t seed = synth_seed;
            if (const char* env = std::getenv("LINTEL_SEED"))
                seed = std::strtoull(env, nullptr, 10);
            return cmd_synth(synth_kind, seed, synth_out);
        }
        if (fit->parsed()) return cmd_fit(fit_config, fit_out);
        if (run->parsed()) {
            lintel::ExperimentConfig config = load_config(run_config);
            if (!run_algorithm.empty()) {
                if (run_algorithm == "lintel") config.algorithm = lintel::Algorithm::Lintel;
                else if (run_algorithm == "intel") config.algorithm = lintel::Algorithm::Intel;
                else throw lintel::config_error("--algorithm: expected 'lintel' or 'intel'");
            }
            if (!run_fusion.empty()) {
                if (run_fusion == "arithmetic") config.fusion = lintel::FusionRule::Arithmetic;
                else if (run_fusion == "geometric") config.fusion = lintel::FusionRule::Geometric;
                else throw lintel::config_error("--fusion: expected 'arithmetic' or 'geometric'");
            }
            if (run_seed >= 0) config.data.seed = static_cast<std::uint64_t>(run_seed);
            return cmd_run(std::move(config), run_records);
        }
        if (compare->parsed()) return cmd_compare(load_config(compare_config), compare_seeds);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const lintel::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const lintel::ingestion_error& e) {
        std::cerr << "ingestion error: " << e.what() << "\n";
        return 2;
    } catch (const lintel::invalid_spec_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const lintel::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
