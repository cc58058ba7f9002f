#pragma once

// Result serialization and scenario dispatch for the command line.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvqec/config.hpp"
#include "cvqec/experiments.hpp"

namespace cvqec {

inline constexpr std::string_view kCsvHeader =
    "scenario,arm,param_name,param_value,fidelity,success_prob,trace_deficit,seed";

/// Header line plus one row per result; an absent success_prob is empty.
std::string results_csv(std::span<const ScenarioResult> results);

/// {"scenario", "config": {...}, "results": [...]}; wall time is left out so
/// repeated runs produce identical bytes.
std::string results_json(std::string_view scenario, std::span<const ScenarioResult> results,
                         const Settings& config_echo);

/// {"dim": D, "entries": [[re, im], ...]} in row-major order.
std::string density_matrix_json(const FockDensityMatrix& rho);

/// Lines "x,p,w" under a header.
std::string wigner_csv(const Eigen::MatrixXd& w, const PhaseSpaceGrid& grid);

/// Lines "theta,value" under a header.
std::string samples_csv(std::span<const QuadratureSample> samples);

/// UTC, e.g. 20261015T093000Z.
std::string utc_timestamp();

/// `<stem>_<timestamp>_<seed>.<ext>` inside `dir`.
std::filesystem::path result_path(const std::filesystem::path& dir, std::string_view stem,
                                  std::string_view timestamp, std::uint64_t seed, std::string_view ext);

/// Throws std::runtime_error naming the path on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

struct RunOutcome {
    std::vector<ScenarioResult> results;
    std::vector<std::filesystem::path> files;
    bool flagged = false;
};

/// Runs `config.scenario` and writes its files.
RunOutcome run_scenario(const RunConfig& config, std::string_view timestamp);

}  // namespace cvqec
