#include "cvqec/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "cvqec/parallel.hpp"

namespace cvqec {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

bool deficit_flag(const FockDensityMatrix& rho) { return rho.trace_deficit >= kTraceDeficitWarning; }

ScenarioResult make_row(std::string_view scenario, std::string_view arm, std::string_view param_name,
                        double param_value, double fidelity) {
    ScenarioResult r;
    r.scenario = scenario;
    r.arm = arm;
    r.param_name = param_name;
    r.param_value = param_value;
    r.fidelity = std::clamp(fidelity, 0.0, 1.0);
    return r;
}

}  // namespace

std::string_view to_string(AncillaSelection a) {
    switch (a) {
        case AncillaSelection::both: return "both";
        case AncillaSelection::entangled: return "entangled";
        case AncillaSelection::vacuum: return "vacuum";
        case AncillaSelection::experimental: return "experimental";
        case AncillaSelection::all: return "all";
    }
    return "both";
}

AncillaSelection parse_ancilla(std::string_view name) {
    for (const auto a : {AncillaSelection::both, AncillaSelection::entangled, AncillaSelection::vacuum,
                         AncillaSelection::experimental, AncillaSelection::all}) {
        if (to_string(a) == name) return a;
    }
    throw std::invalid_argument(fmt::format(
        "unknown ancilla selection '{}' (expected both, entangled, vacuum, experimental or all)", name));
}

ExperimentParams::ExperimentParams()
    : gains(linear_grid(0.0, 4.0, 0.01)),
      pe_grid(linear_grid(0.0, 0.5, 0.05)),
      threshold_grid(linear_grid(0.1, 2.0, 0.1)) {}

void ExperimentParams::validate() const {
    if (two_mode_db < 0.0) throw std::invalid_argument("two_mode_db must be non-negative");
    for (const auto& arm : {"entangled", "vacuum", "experimental"}) arm_params(*this, arm).validate();
    if (!(p_erase >= 0.0 && p_erase <= 1.0)) {
        throw std::invalid_argument(fmt::format("p_erase {} outside [0, 1]", p_erase));
    }
    rule.validate();
    if (grid.cells < 1) throw std::invalid_argument("grid cells must be positive");
    if (grid.half_width < 0.0) throw std::invalid_argument("grid half width must be non-negative");
    if (cutoff < 2 || validation_cutoff < 2) throw std::invalid_argument("Fock cutoffs must be at least 2");
    if (erased_channel < 1 || erased_channel > kNumChannels) {
        throw std::invalid_argument(fmt::format("erased channel {} outside 1..4", erased_channel));
    }
    for (const double g : gains) {
        if (!(g >= 0.0)) throw std::invalid_argument(fmt::format("gain {} must be non-negative", g));
    }
    for (const double pe : pe_grid) {
        if (!(pe >= 0.0 && pe <= 1.0)) throw std::invalid_argument(fmt::format("p_e {} outside [0, 1]", pe));
    }
    for (const double th : threshold_grid) {
        if (!(th >= 0.0)) throw std::invalid_argument(fmt::format("threshold {} must be non-negative", th));
    }
    if (tomography_samples == 0) throw std::invalid_argument("tomography needs at least one sample");
    if (tomography_replicates < 1) throw std::invalid_argument("tomography replicates must be positive");
    tomography.validate();
    if (wigner_grid.nx < 1 || wigner_grid.np < 1) throw std::invalid_argument("empty Wigner grid");
}

std::vector<std::string> selected_arms(AncillaSelection a) {
    switch (a) {
        case AncillaSelection::both: return {"entangled", "vacuum"};
        case AncillaSelection::entangled: return {"entangled"};
        case AncillaSelection::vacuum: return {"vacuum"};
        case AncillaSelection::experimental: return {"experimental"};
        case AncillaSelection::all: return {"entangled", "vacuum", "experimental"};
    }
    return {};
}

CodeParams arm_params(const ExperimentParams& params, std::string_view arm) {
    CodeParams code;
    code.alpha = params.alpha;
    if (arm == "entangled") {
        code.squeezer1 = SqueezerSpec::pure(params.two_mode_db);
        code.squeezer2 = SqueezerSpec::pure(params.two_mode_db);
    } else if (arm == "vacuum") {
        code.squeezer1 = SqueezerSpec::pure(0.0);
        code.squeezer2 = SqueezerSpec::pure(0.0);
    } else if (arm == "experimental") {
        code.squeezer1 = params.lab_squeezer1;
        code.squeezer2 = params.lab_squeezer2;
        code.visibility = params.visibility;
        code.detection_efficiency = params.detection_efficiency;
    } else {
        throw std::invalid_argument(fmt::format("unknown arm '{}'", arm));
    }
    return code;
}

std::vector<double> linear_grid(double start, double stop, double step) {
    if (!(step > 0.0)) throw std::invalid_argument(fmt::format("grid step {} must be positive", step));
    if (stop < start) throw std::invalid_argument(fmt::format("grid stop {} below start {}", stop, start));
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = start + step * static_cast<double>(i);
    return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view scenario, std::uint64_t index) {
    return splitmix64(splitmix64(master ^ fnv1a(scenario)) + index);
}

GaussianMixture single_channel_mixture(Complex alpha, double p_erase) {
    GaussianMixture mix;
    if (p_erase < 1.0) mix.add(1.0 - p_erase, coherent_state(alpha));
    if (p_erase > 0.0) mix.add(p_erase, GaussianState::vacuum(1));
    return mix;
}

std::vector<ScenarioResult> run_fig2e(const ExperimentParams& params) {
    params.validate();
    const auto arms = selected_arms(params.ancilla);
    const auto pattern = ErasurePattern::single(params.erased_channel);
    const std::size_t n_gain = params.gains.size();
    std::vector<ScenarioResult> out(arms.size() * n_gain);
    parallel_for(out.size(), [&](std::size_t i) {
        const auto start = Clock::now();
        const auto& arm = arms[i / n_gain];
        const double g = params.gains[i % n_gain];
        const auto f = deterministic_fidelity(arm_params(params, arm), pattern, FeedforwardGain(g));
        auto row = make_row("fig2e", arm, "gain", g, f.output1);
        row.seed = derive_seed(params.seed, "fig2e", i);
        row.wall_time = seconds_since(start);
        out[i] = std::move(row);
    });
    return out;
}

Fig3Report run_fig3(const ExperimentParams& params) {
    params.validate();
    Fig3Report report;

    struct Source {
        std::string label;
        GaussianMixture mixture;
        std::optional<double> success_prob;
    };
    std::vector<Source> sources;
    GaussianMixture input;
    input.add(1.0, coherent_state(params.alpha));
    sources.push_back({"input", input, std::nullopt});
    sources.push_back({"single_channel", single_channel_mixture(params.alpha, params.p_erase), std::nullopt});
    for (const auto& arm : selected_arms(params.ancilla)) {
        auto res = probabilistic_protocol(arm_params(params, arm), params.p_erase, params.rule, params.grid);
        sources.push_back({arm, std::move(res.accepted), res.success_prob});
    }

    std::uint64_t index = 0;
    std::vector<int> cutoffs{params.cutoff};
    if (params.validation_cutoff != params.cutoff) cutoffs.push_back(params.validation_cutoff);
    for (const int cutoff : cutoffs) {
        const auto reference = coherent_fock(params.alpha, cutoff);
        for (const auto& src : sources) {
            const auto point_start = Clock::now();
            ScenarioResult row;
            if (src.mixture.empty()) {
                row = make_row("fig3", src.label, "cutoff", cutoff, 0.0);
                row.flagged = true;
            } else {
                auto rho = mixture_to_fock(src.mixture, cutoff);
                row = make_row("fig3", src.label, "cutoff", cutoff, uhlmann_fidelity(rho, reference));
                row.trace_deficit = rho.trace_deficit;
                row.flagged = deficit_flag(rho);
                if (cutoff == params.cutoff) report.snapshots.push_back({src.label, std::move(rho)});
            }
            row.success_prob = src.success_prob;
            row.seed = derive_seed(params.seed, "fig3", index++);
            row.wall_time = seconds_since(point_start);
            report.results.push_back(std::move(row));
        }
    }
    return report;
}

std::optional<double> crossover_pe(const ExperimentParams& params, std::string_view arm) {
    const auto patterns = pattern_acceptance(arm_params(params, arm), params.rule, params.grid);
    const auto gap = [&](double pe) {
        return combine_patterns(patterns, pe).fidelity - single_channel_baseline(params.alpha, pe);
    };
    constexpr double step = 0.005;
    double lo = step;
    if (gap(lo) <= 0.0) return std::nullopt;
    for (double hi = lo + step; hi < 1.0 - 0.5 * step; lo = hi, hi += step) {
        if (gap(hi) > 0.0) continue;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (gap(mid) > 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
    return std::nullopt;
}

std::vector<ScenarioResult> run_fig4(const ExperimentParams& params) {
    params.validate();
    const auto arms = selected_arms(params.ancilla);
    std::vector<ScenarioResult> out;
    std::uint64_t index = 0;
    const auto stamp = [&](ScenarioResult& row, Clock::time_point start) {
        row.seed = derive_seed(params.seed, "fig4", index++);
        row.wall_time = seconds_since(start);
    };

    // Erasure-probability sweep. Per-pattern acceptance does not depend on p_e.
    for (const auto& arm : arms) {
        const auto start = Clock::now();
        const auto patterns = pattern_acceptance(arm_params(params, arm), params.rule, params.grid);
        for (const double pe : params.pe_grid) {
            const auto s = combine_patterns(patterns, pe);
            auto row = make_row("fig4", arm, "p_erase", pe, s.fidelity);
            row.success_prob = s.success_prob;
            row.flagged = s.success_prob <= 0.0;
            stamp(row, start);
            out.push_back(std::move(row));
        }
    }
    for (const double pe : params.pe_grid) {
        auto row = make_row("fig4", "baseline", "p_erase", pe, single_channel_baseline(params.alpha, pe));
        stamp(row, Clock::now());
        out.push_back(std::move(row));
    }

    // Threshold sweep at the configured erasure probability.
    const std::size_t n_th = params.threshold_grid.size();
    std::vector<ScenarioResult> sweep(arms.size() * n_th);
    parallel_for(sweep.size(), [&](std::size_t i) {
        const auto start = Clock::now();
        AcceptanceRule rule = params.rule;
        rule.threshold = params.threshold_grid[i % n_th];
        const auto& arm = arms[i / n_th];
        const auto s = combine_patterns(pattern_acceptance(arm_params(params, arm), rule, params.grid),
                                        params.p_erase);
        auto row = make_row("fig4", arm, "threshold", rule.threshold, s.fidelity);
        row.success_prob = s.success_prob;
        row.flagged = s.success_prob <= 0.0;
        row.wall_time = seconds_since(start);
        sweep[i] = std::move(row);
    });
    for (auto& row : sweep) {
        row.seed = derive_seed(params.seed, "fig4", index++);
        out.push_back(std::move(row));
    }
    for (const double th : params.threshold_grid) {
        auto row = make_row("fig4", "baseline", "threshold", th,
                            single_channel_baseline(params.alpha, params.p_erase));
        stamp(row, Clock::now());
        out.push_back(std::move(row));
    }

    for (const auto& arm : arms) {
        const auto start = Clock::now();
        const auto pe = crossover_pe(params, arm);
        if (!pe) continue;
        auto row = make_row("fig4", arm, "crossover_pe", *pe, single_channel_baseline(params.alpha, *pe));
        stamp(row, start);
        out.push_back(std::move(row));
    }
    return out;
}

TomographyReport run_tomography_demo(const ExperimentParams& params) {
    params.validate();
    TomographyReport report;
    std::uint64_t index = 0;
    bool first = true;
    for (const auto& arm : selected_arms(params.ancilla)) {
        const auto res =
            probabilistic_protocol(arm_params(params, arm), params.p_erase, params.rule, params.grid);
        if (res.accepted.empty()) {
            auto row = make_row("tomography", arm, "replicate", 0, 0.0);
            row.flagged = true;
            row.seed = derive_seed(params.seed, "tomography", index++);
            report.results.push_back(std::move(row));
            continue;
        }
        const auto analytic = mixture_to_fock(res.accepted, params.tomography.cutoff);
        for (int rep = 0; rep < params.tomography_replicates; ++rep) {
            const auto start = Clock::now();
            const auto seed = derive_seed(params.seed, "tomography", index++);
            const auto samples = sample_homodyne(res.accepted, params.tomography_samples, seed);
            auto rec = maxlik_reconstruct(samples, params.tomography);
            auto row = make_row("tomography", arm, "replicate", rep, uhlmann_fidelity(rec.rho, analytic));
            row.success_prob = res.success_prob;
            row.trace_deficit = analytic.trace_deficit;
            row.flagged = deficit_flag(analytic) || !rec.converged || !rec.monotone || rec.degenerate;
            row.seed = seed;
            row.wall_time = seconds_since(start);
            report.results.push_back(std::move(row));
            if (first) {
                report.analytic = analytic;
                report.wigner = wigner_from_fock(rec.rho, params.wigner_grid);
                report.reconstruction = std::move(rec);
                first = false;
            }
        }
    }
    return report;
}

}  // namespace cvqec
