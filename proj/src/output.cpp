#include "cvqec/output.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "cvqec/parallel.hpp"

namespace cvqec {

namespace {

using nlohmann::json;

// Restores the previous default worker count on scope exit.
class ThreadScope {
public:
    explicit ThreadScope(unsigned threads) : saved_(default_threads()) { set_default_threads(threads); }
    ~ThreadScope() { set_default_threads(saved_); }
    ThreadScope(const ThreadScope&) = delete;
    ThreadScope& operator=(const ThreadScope&) = delete;

private:
    unsigned saved_;
};

std::string scenario_stem(std::string_view scenario, std::string_view label) {
    return fmt::format("{}-{}", scenario, label);
}

}  // namespace

std::string results_csv(std::span<const ScenarioResult> results) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : results) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", r.scenario, r.arm, r.param_name, r.param_value, r.fidelity,
                           r.success_prob ? fmt::format("{}", *r.success_prob) : std::string(), r.trace_deficit,
                           r.seed);
    }
    return out;
}

std::string results_json(std::string_view scenario, std::span<const ScenarioResult> results,
                         const Settings& config_echo) {
    json doc;
    doc["scenario"] = scenario;
    doc["config"] = json::object();
    for (const auto& [k, v] : config_echo) doc["config"][k] = v;
    doc["results"] = json::array();
    for (const auto& r : results) {
        json row{{"scenario", r.scenario},     {"arm", r.arm},
                 {"param_name", r.param_name}, {"param_value", r.param_value},
                 {"fidelity", r.fidelity},     {"success_prob", nullptr},
                 {"trace_deficit", r.trace_deficit}, {"seed", r.seed},
                 {"flagged", r.flagged}};
        if (r.success_prob) row["success_prob"] = *r.success_prob;
        doc["results"].push_back(std::move(row));
    }
    return doc.dump(2) + "\n";
}

std::string density_matrix_json(const FockDensityMatrix& rho) {
    json entries = json::array();
    for (int n = 0; n < rho.dim(); ++n) {
        for (int m = 0; m < rho.dim(); ++m) {
            entries.push_back({rho.entries(n, m).real(), rho.entries(n, m).imag()});
        }
    }
    json doc{{"dim", rho.dim()}, {"trace_deficit", rho.trace_deficit}, {"entries", std::move(entries)}};
    return doc.dump() + "\n";
}

std::string wigner_csv(const Eigen::MatrixXd& w, const PhaseSpaceGrid& grid) {
    if (w.rows() != grid.nx || w.cols() != grid.np) {
        throw std::invalid_argument("Wigner matrix does not match its grid");
    }
    std::string out = "x,p,w\n";
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.np; ++j) out += fmt::format("{},{},{}\n", grid.x(i), grid.p(j), w(i, j));
    }
    return out;
}

std::string samples_csv(std::span<const QuadratureSample> samples) {
    std::string out = "theta,value\n";
    for (const auto& s : samples) out += fmt::format("{},{}\n", s.theta, s.value);
    return out;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

std::filesystem::path result_path(const std::filesystem::path& dir, std::string_view stem,
                                  std::string_view timestamp, std::uint64_t seed, std::string_view ext) {
    return dir / fmt::format("{}_{}_{}.{}", stem, timestamp, seed, ext);
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error(fmt::format("cannot create directory {}: {}", path.parent_path().string(), ec.message()));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error(fmt::format("failed writing {}", path.string()));
}

RunOutcome run_scenario(const RunConfig& config, std::string_view timestamp) {
    const ThreadScope threads(config.threads);
    const auto& p = config.params;
    const auto seed = p.seed;
    RunOutcome outcome;
    std::vector<std::pair<std::filesystem::path, std::string>> files;

    if (config.scenario == "fig2e") {
        outcome.results = run_fig2e(p);
    } else if (config.scenario == "fig3") {
        auto report = run_fig3(p);
        outcome.results = std::move(report.results);
        for (const auto& snap : report.snapshots) {
            files.emplace_back(result_path(config.output_dir, scenario_stem("fig3", snap.label), timestamp, seed, "json"),
                               density_matrix_json(snap.rho));
        }
    } else if (config.scenario == "fig4") {
        outcome.results = run_fig4(p);
    } else if (config.scenario == "tomography") {
        auto report = run_tomography_demo(p);
        outcome.results = std::move(report.results);
        if (report.reconstruction.rho.dim() > 0) {
            files.emplace_back(
                result_path(config.output_dir, scenario_stem("tomography", "reconstruction"), timestamp, seed, "json"),
                density_matrix_json(report.reconstruction.rho));
            files.emplace_back(
                result_path(config.output_dir, scenario_stem("tomography", "analytic"), timestamp, seed, "json"),
                density_matrix_json(report.analytic));
            files.emplace_back(
                result_path(config.output_dir, scenario_stem("tomography", "wigner"), timestamp, seed, "csv"),
                wigner_csv(report.wigner, p.wigner_grid));
        }
    } else {
        throw std::invalid_argument(fmt::format("unknown scenario '{}'", config.scenario));
    }

    const bool csv = config.format == OutputFormat::csv;
    files.emplace(files.begin(), result_path(config.output_dir, config.scenario, timestamp, seed, csv ? "csv" : "json"),
                  csv ? results_csv(outcome.results)
                      : results_json(config.scenario, outcome.results, echo_config(config)));
    for (const auto& [path, content] : files) {
        write_text_file(path, content);
        outcome.files.push_back(path);
    }
    for (const auto& r : outcome.results) outcome.flagged = outcome.flagged || r.flagged;
    return outcome;
}

}  // namespace cvqec
