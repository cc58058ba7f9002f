#pragma once

// Flat key=value run configuration.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cvqec/experiments.hpp"

namespace cvqec {

enum class OutputFormat { csv, json };

struct RunConfig {
    std::string scenario;
    ExperimentParams params;
    std::filesystem::path output_dir = ".";
    OutputFormat format = OutputFormat::csv;
    /// Worker threads for sweeps; 0 uses every hardware thread.
    unsigned threads = 0;
};

/// Ordered key/value pairs; a key appears at most once.
using Settings = std::map<std::string, std::string>;

/// Environment variable overriding the output directory of file settings.
inline constexpr const char* kOutputDirEnv = "CVQEC_OUTPUT_DIR";

const std::vector<std::string>& registered_scenarios();

struct KeyInfo {
    std::string key;
    std::string help;
};

/// Every recognized configuration key, in echo order.
const std::vector<KeyInfo>& config_keys();

/// Throws std::invalid_argument on an unknown key or malformed value.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Current value of every key, formatted so that applying it back gives the
/// same configuration.
Settings echo_config(const RunConfig& config);

/// "key=value" lines; blank lines and lines starting with '#' are ignored.
/// Throws on malformed lines and repeated keys.
Settings parse_settings(std::string_view text);
std::string format_settings(const Settings& settings);

Settings read_settings_file(const std::filesystem::path& path);

/// Defaults, then `file`, then the output-directory environment override,
/// then `flags`. Throws on unknown keys, malformed values or an
/// unregistered scenario.
RunConfig resolve_config(std::string_view scenario, const Settings& file, const Settings& flags,
                         const char* env_output_dir);

/// Expands "a:b:step" or a comma-separated list.
std::vector<double> parse_grid(std::string_view text);

}  // namespace cvqec
