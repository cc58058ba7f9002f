#pragma once

// Scenario runners producing the data behind each figure.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvqec/erasure_code.hpp"
#include "cvqec/fock.hpp"
#include "cvqec/tomography.hpp"

namespace cvqec {

struct ScenarioResult {
    std::string scenario;
    std::string arm;
    std::string param_name;
    double param_value = 0.0;
    double fidelity = 0.0;
    std::optional<double> success_prob;
    double trace_deficit = 0.0;
    std::uint64_t seed = 0;
    double wall_time = 0.0;  // seconds
    /// Degenerate or unreliable point (truncation, failed convergence, ...).
    bool flagged = false;
};

/// Which ancilla arms a scenario evaluates.
enum class AncillaSelection {
    both,          // entangled and vacuum
    entangled,
    vacuum,
    experimental,  // lab squeezers with visibility and detector efficiency
    all,
};

std::string_view to_string(AncillaSelection a);
/// Throws std::invalid_argument on an unknown name.
AncillaSelection parse_ancilla(std::string_view name);

struct ExperimentParams {
    Complex alpha{3.0, 3.0};
    /// Pure two-mode resource of the theory arm.
    double two_mode_db = 2.0;
    SqueezerSpec lab_squeezer1{3.4, 5.0};
    SqueezerSpec lab_squeezer2{2.7, 5.0};
    double visibility = 0.98;
    double detection_efficiency = 1.0;

    double p_erase = 0.25;
    AcceptanceRule rule;
    QuadratureGrid grid;
    int cutoff = kDefaultCutoff;
    /// Second cutoff used to check truncation of the snapshots.
    int validation_cutoff = 45;
    int erased_channel = 2;
    AncillaSelection ancilla = AncillaSelection::both;

    std::vector<double> gains;
    std::vector<double> pe_grid;
    std::vector<double> threshold_grid;

    std::size_t tomography_samples = 220000;
    int tomography_replicates = 1;
    TomographyConfig tomography;
    PhaseSpaceGrid wigner_grid{-4.0, 10.0, 71, -4.0, 10.0, 71};

    std::uint64_t seed = 0;

    ExperimentParams();
    void validate() const;
};

/// Arm names ("entangled", "vacuum", "experimental") selected by `a`.
std::vector<std::string> selected_arms(AncillaSelection a);

/// Code parameters of a named arm.
CodeParams arm_params(const ExperimentParams& params, std::string_view arm);

/// a:b:step inclusive of b up to rounding.
std::vector<double> linear_grid(double start, double stop, double step);

/// Per-point seed from the master seed, scenario name and point index.
std::uint64_t derive_seed(std::uint64_t master, std::string_view scenario, std::uint64_t index);

/// (1 - p_e)|alpha><alpha| + p_e|0><0|.
GaussianMixture single_channel_mixture(Complex alpha, double p_erase);

std::vector<ScenarioResult> run_fig2e(const ExperimentParams& params);

struct Snapshot {
    std::string label;
    FockDensityMatrix rho;
};

struct Fig3Report {
    std::vector<ScenarioResult> results;
    std::vector<Snapshot> snapshots;  // at params.cutoff
};

Fig3Report run_fig3(const ExperimentParams& params);

/// Erasure-probability sweep, threshold sweep and the p_e at which each
/// arm falls to the single-channel baseline (param_name "crossover_pe").
std::vector<ScenarioResult> run_fig4(const ExperimentParams& params);

/// Smallest p_e in (0, 1) where the arm's post-selected fidelity meets the
/// baseline; nullopt when it stays above.
std::optional<double> crossover_pe(const ExperimentParams& params, std::string_view arm);

struct TomographyReport {
    std::vector<ScenarioResult> results;
    FockDensityMatrix analytic;       // first arm, cutoff params.tomography.cutoff
    Reconstruction reconstruction;    // first arm, first replicate
    Eigen::MatrixXd wigner;           // of `reconstruction` on params.wigner_grid
};

TomographyReport run_tomography_demo(const ExperimentParams& params);

}  // namespace cvqec
