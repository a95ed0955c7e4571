// beacon-lab: seeded randomness-beacon experiments from a JSON config.
//
//   beacon-lab <experiment> --config FILE [--trials N] [--seed S]
//              [--out PATH] [--format csv|json] [--jobs J]
//              [--no-timestamp] [--trace PATH]
//
// The BEACON_LAB_SEED environment variable overrides the config seed; the
// --seed flag overrides both. Exit codes: 0 success, 1 config error,
// 2 bound violation.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "beacon/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"beacon-lab: randomness-beacon laboratory"};
    app.get_formatter()->column_width(28);

    std::string experiment;
    std::string config_path;
    std::string out_path;
    std::string format;
    std::string trace_path;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    unsigned jobs = 0;
    bool no_timestamp = false;

    app.add_option("experiment", experiment, "one of: lowerbound, forkless, backbone, hybrid, multichain, verify")
        ->required();
    app.add_option("--config", config_path, "JSON experiment config")->required();
    auto* trials_opt = app.add_option("--trials", trials, "override trial count");
    auto* seed_opt = app.add_option("--seed", seed, "override seed");
    auto* out_opt = app.add_option("--out", out_path, "report file path");
    auto* format_opt =
        app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    auto* jobs_opt = app.add_option("--jobs", jobs, "worker threads (0 = all cores)");
    app.add_flag("--no-timestamp", no_timestamp, "omit the timestamp for byte-stable reports");
    auto* trace_opt = app.add_option("--trace", trace_path, "dump the first run's trace (backbone)");

    CLI11_PARSE(app, argc, argv);

    nlohmann::json config;
    {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "config: cannot open '" << config_path << "'\n";
            return 1;
        }
        try {
            in >> config;
        } catch (const std::exception& err) {
            std::cerr << "config: parse error: " << err.what() << "\n";
            return 1;
        }
    }
    if (!config.is_object()) {
        std::cerr << "config: top level must be an object\n";
        return 1;
    }
    if (config.contains("experiment") && config.at("experiment") != experiment) {
        std::cerr << "experiment: config file says '" << config.at("experiment").get<std::string>()
                  << "' but the command line asked for '" << experiment << "'\n";
        return 1;
    }
    config["experiment"] = experiment;

    if (const char* env_seed = std::getenv("BEACON_LAB_SEED")) {
        char* end = nullptr;
        const unsigned long long value = std::strtoull(env_seed, &end, 10);
        if (end == env_seed || *end != '\0') {
            std::cerr << "BEACON_LAB_SEED: not an integer\n";
            return 1;
        }
        config["seed"] = static_cast<std::uint64_t>(value);
    }
    if (*seed_opt) config["seed"] = seed;
    if (*trials_opt) config["trials"] = trials;
    if (*format_opt) config["format"] = format;
    if (*jobs_opt) config["jobs"] = jobs;
    if (*out_opt) config["output_path"] = out_path;
    if (*trace_opt) config["trace_path"] = trace_path;

    std::vector<std::string> errors;
    beacon::exp::ExperimentConfig cfg = beacon::exp::parse_experiment_config(config, errors);
    cfg.with_timestamp = !no_timestamp;
    if (!errors.empty()) {
        for (const auto& e : errors) std::cerr << e << "\n";
        return 1;
    }

    beacon::exp::ExperimentOutcome outcome;
    try {
        outcome = beacon::exp::run_experiment(cfg);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    if (outcome.exit_code == 1) {
        for (const auto& e : outcome.errors) std::cerr << e << "\n";
        return 1;
    }

    if (cfg.format == "json") std::cout << beacon::exp::to_json(outcome.report).dump(2) << "\n";
    else std::cout << beacon::exp::to_csv(outcome.report);
    return outcome.exit_code;
}
