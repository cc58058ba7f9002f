#pragma once

// Invariant suite behind the `validate` subcommand.

#include <cstdint>
#include <string>
#include <vector>

namespace cvqec {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

CheckResult check_symplectic_invariants(std::uint64_t seed);
/// Covariance/mean laws of homodyne conditioning plus a Monte Carlo check of
/// the conditional mean, and normalization of the erasure-pattern weights.
CheckResult check_conditioning_laws(std::uint64_t seed);
/// coherent_overlap against Uhlmann fidelity of the Fock conversions.
CheckResult check_gaussian_fock_agreement(std::uint64_t seed);
/// Post-selected fidelity at 101 vs 201 grid cells.
CheckResult check_grid_convergence();
/// Fixed seeds and differing worker counts give identical results.
CheckResult check_reproducibility(std::uint64_t seed);

std::vector<CheckResult> run_property_suite(std::uint64_t seed = 0);

}  // namespace cvqec
