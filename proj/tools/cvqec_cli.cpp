// Command-line front end: run scenarios, list them, or run the invariant suite.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cvqec/config.hpp"
#include "cvqec/output.hpp"
#include "cvqec/validation.hpp"

namespace {

constexpr int kExitFlagged = 1;
constexpr int kExitError = 2;

std::string flag_name(const std::string& key) {
    std::string out = key;
    for (auto& c : out) {
        if (c == '_') c = '-';
    }
    return "--" + out;
}

const std::map<std::string, std::string>& scenario_help() {
    static const std::map<std::string, std::string> help{
        {"fig2e", "deterministic correction fidelity versus feedforward gain"},
        {"fig3", "density-matrix snapshots: input, uncorrected, corrected arms"},
        {"fig4", "post-selected fidelity versus erasure probability and threshold"},
        {"tomography", "homodyne sampling and MaxLik reconstruction of the corrected output"},
    };
    return help;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous-variable erasure-code simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a scenario and write its result files");
    std::string scenario;
    std::string config_file;
    std::vector<std::string> set_pairs;
    bool echo_only = false;
    std::map<std::string, std::string> flag_values;
    run->add_option("scenario", scenario, "fig2e, fig3, fig4 or tomography");
    run->add_option("--config", config_file, "key=value configuration file")->check(CLI::ExistingFile);
    run->add_option("--set", set_pairs, "override key=value (repeatable)");
    run->add_flag("--echo-config", echo_only, "print the resolved configuration and exit");
    for (const auto& info : cvqec::config_keys()) {
        if (info.key == "scenario") continue;
        std::string names = flag_name(info.key);
        if (info.key == "output_dir") names += ",--out";
        run->add_option_function<std::string>(
               names, [&flag_values, key = info.key](const std::string& v) { flag_values[key] = v; }, info.help)
            ->multi_option_policy(CLI::MultiOptionPolicy::Throw);
    }

    app.add_subcommand("list-scenarios", "list the registered scenarios");

    auto* validate = app.add_subcommand("validate", "run the invariant suite");
    std::uint64_t validate_seed = 0;
    validate->add_option("--seed", validate_seed, "seed for the randomized checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("list-scenarios")) {
            for (const auto& name : cvqec::registered_scenarios()) {
                fmt::print("{:<12}{}\n", name, scenario_help().at(name));
            }
            return 0;
        }

        if (app.got_subcommand("validate")) {
            bool all_passed = true;
            for (const auto& check : cvqec::run_property_suite(validate_seed)) {
                fmt::print("{} {}: {}\n", check.passed ? "PASS" : "FAIL", check.name, check.detail);
                all_passed = all_passed && check.passed;
            }
            return all_passed ? 0 : kExitFlagged;
        }

        cvqec::Settings flags = flag_values;
        for (const auto& pair : set_pairs) {
            const auto eq = pair.find('=');
            if (eq == std::string::npos) throw std::invalid_argument(fmt::format("--set expects key=value, got '{}'", pair));
            const std::string key = pair.substr(0, eq);
            if (!flags.emplace(key, pair.substr(eq + 1)).second) {
                throw std::invalid_argument(fmt::format("conflicting command-line values for '{}'", key));
            }
        }
        if (auto it = flags.find("scenario"); it != flags.end()) {
            if (!scenario.empty() && it->second != scenario) {
                throw std::invalid_argument(
                    fmt::format("conflicting scenarios '{}' and '{}'", scenario, it->second));
            }
        }
        const cvqec::Settings file = config_file.empty() ? cvqec::Settings{} : cvqec::read_settings_file(config_file);
        const auto config = cvqec::resolve_config(scenario, file, flags, std::getenv(cvqec::kOutputDirEnv));

        if (echo_only) {
            fmt::print("{}", cvqec::format_settings(cvqec::echo_config(config)));
            return 0;
        }

        const auto outcome = cvqec::run_scenario(config, cvqec::utc_timestamp());
        for (const auto& path : outcome.files) fmt::print("wrote {}\n", path.string());
        std::size_t flagged = 0;
        for (const auto& r : outcome.results) flagged += r.flagged ? 1 : 0;
        if (flagged > 0) {
            fmt::print(stderr, "{} of {} results flagged as degenerate or unreliable\n", flagged,
                       outcome.results.size());
            return kExitFlagged;
        }
        return 0;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitError;
    }
}
