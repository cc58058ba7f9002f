#include "cvqec/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace cvqec {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void malformed(std::string_view key, std::string_view value, std::string_view expected) {
    throw std::invalid_argument(fmt::format("malformed value '{}' for {}: expected {}", value, key, expected));
}

double to_double(std::string_view key, std::string_view text) {
    const auto s = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        malformed(key, text, "a finite number");
    }
    return v;
}

template <class Int>
Int to_integer(std::string_view key, std::string_view text) {
    const auto s = trim(text);
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) malformed(key, text, "an integer");
    return v;
}

std::string number(double v) { return fmt::format("{}", v); }

std::string join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ',';
        out += number(values[i]);
    }
    return out;
}

struct KeyHandler {
    KeyInfo info;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

KeyHandler real_key(std::string key, std::string help, double ExperimentParams::*field) {
    return {{key, std::move(help)},
            [key, field](RunConfig& c, std::string_view v) { c.params.*field = to_double(key, v); },
            [field](const RunConfig& c) { return number(c.params.*field); }};
}

KeyHandler int_key(std::string key, std::string help, int ExperimentParams::*field) {
    return {{key, std::move(help)},
            [key, field](RunConfig& c, std::string_view v) { c.params.*field = to_integer<int>(key, v); },
            [field](const RunConfig& c) { return std::to_string(c.params.*field); }};
}

KeyHandler grid_key(std::string key, std::string help, std::vector<double> ExperimentParams::*field) {
    return {{key, std::move(help)},
            [key, field](RunConfig& c, std::string_view v) {
                try {
                    c.params.*field = parse_grid(v);
                } catch (const std::invalid_argument& e) {
                    throw std::invalid_argument(fmt::format("{}: {}", key, e.what()));
                }
            },
            [field](const RunConfig& c) { return join(c.params.*field); }};
}

std::optional<double> optional_real(std::string_view key, std::string_view v) {
    if (trim(v).empty() || trim(v) == "pure") return std::nullopt;
    return to_double(key, v);
}

std::string optional_text(const std::optional<double>& v) { return v ? number(*v) : "pure"; }

const std::vector<KeyHandler>& handlers() {
    static const std::vector<KeyHandler> table = [] {
        std::vector<KeyHandler> h;
        h.push_back({{"scenario", "scenario name"},
                     [](RunConfig& c, std::string_view v) { c.scenario = trim(v); },
                     [](const RunConfig& c) { return c.scenario; }});
        h.push_back({{"seed", "master seed (64-bit unsigned)"},
                     [](RunConfig& c, std::string_view v) { c.params.seed = to_integer<std::uint64_t>("seed", v); },
                     [](const RunConfig& c) { return std::to_string(c.params.seed); }});
        h.push_back({{"output_dir", "directory for result files"},
                     [](RunConfig& c, std::string_view v) {
                         if (trim(v).empty()) malformed("output_dir", v, "a path");
                         c.output_dir = std::string(trim(v));
                     },
                     [](const RunConfig& c) { return c.output_dir.string(); }});
        h.push_back({{"format", "csv or json"},
                     [](RunConfig& c, std::string_view v) {
                         const auto s = trim(v);
                         if (s == "csv") {
                             c.format = OutputFormat::csv;
                         } else if (s == "json") {
                             c.format = OutputFormat::json;
                         } else {
                             malformed("format", v, "csv or json");
                         }
                     },
                     [](const RunConfig& c) { return std::string(c.format == OutputFormat::csv ? "csv" : "json"); }});
        h.push_back({{"threads", "worker threads, 0 = all hardware threads"},
                     [](RunConfig& c, std::string_view v) { c.threads = to_integer<unsigned>("threads", v); },
                     [](const RunConfig& c) { return std::to_string(c.threads); }});
        h.push_back({{"alpha_re", "real part of the input amplitude"},
                     [](RunConfig& c, std::string_view v) { c.params.alpha.real(to_double("alpha_re", v)); },
                     [](const RunConfig& c) { return number(c.params.alpha.real()); }});
        h.push_back({{"alpha_im", "imaginary part of the input amplitude"},
                     [](RunConfig& c, std::string_view v) { c.params.alpha.imag(to_double("alpha_im", v)); },
                     [](const RunConfig& c) { return number(c.params.alpha.imag()); }});
        h.push_back(real_key("two_mode_db", "squeezing of the pure entangled arm, dB", &ExperimentParams::two_mode_db));
        h.push_back({{"squeezer1_db", "lab squeezer 1 squeezing, dB"},
                     [](RunConfig& c, std::string_view v) {
                         c.params.lab_squeezer1.squeeze_db = to_double("squeezer1_db", v);
                     },
                     [](const RunConfig& c) { return number(c.params.lab_squeezer1.squeeze_db); }});
        h.push_back({{"squeezer1_anti_db", "lab squeezer 1 antisqueezing, dB, or 'pure'"},
                     [](RunConfig& c, std::string_view v) {
                         c.params.lab_squeezer1.antisqueeze_db = optional_real("squeezer1_anti_db", v);
                     },
                     [](const RunConfig& c) { return optional_text(c.params.lab_squeezer1.antisqueeze_db); }});
        h.push_back({{"squeezer2_db", "lab squeezer 2 squeezing, dB"},
                     [](RunConfig& c, std::string_view v) {
                         c.params.lab_squeezer2.squeeze_db = to_double("squeezer2_db", v);
                     },
                     [](const RunConfig& c) { return number(c.params.lab_squeezer2.squeeze_db); }});
        h.push_back({{"squeezer2_anti_db", "lab squeezer 2 antisqueezing, dB, or 'pure'"},
                     [](RunConfig& c, std::string_view v) {
                         c.params.lab_squeezer2.antisqueeze_db = optional_real("squeezer2_anti_db", v);
                     },
                     [](const RunConfig& c) { return optional_text(c.params.lab_squeezer2.antisqueeze_db); }});
        h.push_back(real_key("visibility", "EPR interference visibility", &ExperimentParams::visibility));
        h.push_back(real_key("efficiency", "syndrome detector efficiency", &ExperimentParams::detection_efficiency));
        h.push_back(real_key("pe", "erasure probability per channel", &ExperimentParams::p_erase));
        h.push_back({{"threshold", "post-selection threshold"},
                     [](RunConfig& c, std::string_view v) { c.params.rule.threshold = to_double("threshold", v); },
                     [](const RunConfig& c) { return number(c.params.rule.threshold); }});
        h.push_back({{"region", "corner_reject or box_accept"},
                     [](RunConfig& c, std::string_view v) {
                         const auto s = trim(v);
                         if (s == "corner_reject") {
                             c.params.rule.region = AcceptanceRegion::corner_reject;
                         } else if (s == "box_accept") {
                             c.params.rule.region = AcceptanceRegion::box_accept;
                         } else {
                             malformed("region", v, "corner_reject or box_accept");
                         }
                     },
                     [](const RunConfig& c) {
                         return std::string(c.params.rule.region == AcceptanceRegion::corner_reject ? "corner_reject"
                                                                                                   : "box_accept");
                     }});
        h.push_back({{"threshold_units", "canonical (vacuum variance 1/2) or shot_noise"},
                     [](RunConfig& c, std::string_view v) {
                         const auto s = trim(v);
                         if (s == "canonical") {
                             c.params.rule.units = ThresholdUnits::canonical;
                         } else if (s == "shot_noise") {
                             c.params.rule.units = ThresholdUnits::shot_noise;
                         } else {
                             malformed("threshold_units", v, "canonical or shot_noise");
                         }
                     },
                     [](const RunConfig& c) {
                         return std::string(c.params.rule.units == ThresholdUnits::canonical ? "canonical"
                                                                                            : "shot_noise");
                     }});
        h.push_back({{"grid_cells", "syndrome grid cells per axis"},
                     [](RunConfig& c, std::string_view v) { c.params.grid.cells = to_integer<int>("grid_cells", v); },
                     [](const RunConfig& c) { return std::to_string(c.params.grid.cells); }});
        h.push_back({{"grid_half_width", "syndrome grid half width, 0 = automatic"},
                     [](RunConfig& c, std::string_view v) {
                         c.params.grid.half_width = to_double("grid_half_width", v);
                     },
                     [](const RunConfig& c) { return number(c.params.grid.half_width); }});
        h.push_back(int_key("cutoff", "Fock cutoff", &ExperimentParams::cutoff));
        h.push_back(int_key("validation_cutoff", "second Fock cutoff for truncation checks",
                            &ExperimentParams::validation_cutoff));
        h.push_back(int_key("erased_channel", "erased channel for the gain sweep (1-4)",
                            &ExperimentParams::erased_channel));
        h.push_back({{"ancilla", "both, entangled, vacuum, experimental or all"},
                     [](RunConfig& c, std::string_view v) { c.params.ancilla = parse_ancilla(trim(v)); },
                     [](const RunConfig& c) { return std::string(to_string(c.params.ancilla)); }});
        h.push_back(grid_key("gains", "feedforward gains, a:b:step or list", &ExperimentParams::gains));
        h.push_back(grid_key("pe_grid", "erasure probabilities, a:b:step or list", &ExperimentParams::pe_grid));
        h.push_back(grid_key("threshold_grid", "thresholds, a:b:step or list", &ExperimentParams::threshold_grid));
        h.push_back({{"samples", "homodyne samples per reconstruction"},
                     [](RunConfig& c, std::string_view v) {
                         c.params.tomography_samples = to_integer<std::size_t>("samples", v);
                     },
                     [](const RunConfig& c) { return std::to_string(c.params.tomography_samples); }});
        h.push_back(int_key("replicates", "tomography replicates", &ExperimentParams::tomography_replicates));
        h.push_back({{"tomo_cutoff", "reconstruction Fock cutoff"},
                     [](RunConfig& c, std::string_view v) {
                         c.params.tomography.cutoff = to_integer<int>("tomo_cutoff", v);
                     },
                     [](const RunConfig& c) { return std::to_string(c.params.tomography.cutoff); }});
        h.push_back({{"tomo_max_iters", "MaxLik iteration cap"},
                     [](RunConfig& c, std::string_view v) {
                         c.params.tomography.max_iters = to_integer<int>("tomo_max_iters", v);
                     },
                     [](const RunConfig& c) { return std::to_string(c.params.tomography.max_iters); }});
        h.push_back({{"tomo_tolerance", "MaxLik mean log-likelihood tolerance"},
                     [](RunConfig& c, std::string_view v) {
                         c.params.tomography.tolerance = to_double("tomo_tolerance", v);
                     },
                     [](const RunConfig& c) { return number(c.params.tomography.tolerance); }});
        h.push_back({{"tomo_phase_bins", "MaxLik phase bins"},
                     [](RunConfig& c, std::string_view v) {
                         c.params.tomography.phase_bins = to_integer<int>("tomo_phase_bins", v);
                     },
                     [](const RunConfig& c) { return std::to_string(c.params.tomography.phase_bins); }});
        h.push_back({{"tomo_value_bins", "MaxLik value bins"},
                     [](RunConfig& c, std::string_view v) {
                         c.params.tomography.value_bins = to_integer<int>("tomo_value_bins", v);
                     },
                     [](const RunConfig& c) { return std::to_string(c.params.tomography.value_bins); }});
        h.push_back({{"tomo_value_range", "MaxLik value range (+-, shot-noise units)"},
                     [](RunConfig& c, std::string_view v) {
                         c.params.tomography.value_range = to_double("tomo_value_range", v);
                     },
                     [](const RunConfig& c) { return number(c.params.tomography.value_range); }});
        return h;
    }();
    return table;
}

const KeyHandler& handler(std::string_view key) {
    for (const auto& h : handlers()) {
        if (h.info.key == key) return h;
    }
    throw std::invalid_argument(fmt::format("unknown configuration key '{}'", key));
}

}  // namespace

const std::vector<std::string>& registered_scenarios() {
    static const std::vector<std::string> names{"fig2e", "fig3", "fig4", "tomography"};
    return names;
}

const std::vector<KeyInfo>& config_keys() {
    static const std::vector<KeyInfo> keys = [] {
        std::vector<KeyInfo> out;
        for (const auto& h : handlers()) out.push_back(h.info);
        return out;
    }();
    return keys;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
    handler(trim(key)).set(config, value);
}

Settings echo_config(const RunConfig& config) {
    Settings out;
    for (const auto& h : handlers()) out[h.info.key] = h.get(config);
    return out;
}

Settings parse_settings(std::string_view text) {
    Settings out;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument(fmt::format("line {}: expected key=value, got '{}'", line_no, s));
        }
        const std::string key(trim(s.substr(0, eq)));
        if (key.empty()) throw std::invalid_argument(fmt::format("line {}: empty key", line_no));
        if (!out.emplace(key, std::string(trim(s.substr(eq + 1)))).second) {
            throw std::invalid_argument(fmt::format("line {}: key '{}' given twice", line_no, key));
        }
    }
    return out;
}

std::string format_settings(const Settings& settings) {
    std::string out;
    for (const auto& [k, v] : settings) out += fmt::format("{}={}\n", k, v);
    return out;
}

Settings read_settings_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot read config file {}", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_settings(buf.str());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(fmt::format("{}: {}", path.string(), e.what()));
    }
}

RunConfig resolve_config(std::string_view scenario, const Settings& file, const Settings& flags,
                         const char* env_output_dir) {
    RunConfig config;
    for (const auto& [k, v] : file) apply_setting(config, k, v);
    if (env_output_dir != nullptr && *env_output_dir != '\0') apply_setting(config, "output_dir", env_output_dir);
    for (const auto& [k, v] : flags) apply_setting(config, k, v);
    if (!scenario.empty()) config.scenario = scenario;
    const auto& names = registered_scenarios();
    if (std::find(names.begin(), names.end(), config.scenario) == names.end()) {
        throw std::invalid_argument(fmt::format("unknown scenario '{}' (expected fig2e, fig3, fig4 or tomography)",
                                                config.scenario));
    }
    config.params.validate();
    return config;
}

std::vector<double> parse_grid(std::string_view text) {
    const auto s = trim(text);
    if (s.empty()) throw std::invalid_argument("empty grid");
    if (s.find(':') != std::string_view::npos) {
        std::vector<double> parts;
        std::string_view rest = s;
        while (true) {
            const auto colon = rest.find(':');
            parts.push_back(to_double("grid", rest.substr(0, colon)));
            if (colon == std::string_view::npos) break;
            rest = rest.substr(colon + 1);
        }
        if (parts.size() != 3) malformed("grid", text, "start:stop:step");
        return linear_grid(parts[0], parts[1], parts[2]);
    }
    std::vector<double> out;
    std::string_view rest = s;
    while (true) {
        const auto comma = rest.find(',');
        out.push_back(to_double("grid", rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

}  // namespace cvqec
