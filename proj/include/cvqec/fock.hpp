#pragma once

// Truncated Fock-basis backend for single-mode states.

#include <Eigen/Dense>

#include "cvqec/gaussian.hpp"

namespace cvqec {

constexpr int kDefaultCutoff = 30;

/// Above this truncation loss the conversion is flagged as unreliable.
constexpr double kTraceDeficitWarning = 0.05;

struct FockDensityMatrix {
    Eigen::MatrixXcd entries;
    /// 1 - trace of the state before cropping to `dim()` levels.
    double trace_deficit = 0.0;
    bool cutoff_warning = false;

    int dim() const { return static_cast<int>(entries.rows()); }
    double trace() const { return entries.trace().real(); }
    double mean_photon_number() const;
    FockDensityMatrix normalized() const;

    /// Throws std::domain_error when not Hermitian to `tol` or when an
    /// eigenvalue is below -1e-9.
    void check_valid(double tol = 1e-10) const;
};

FockDensityMatrix coherent_fock(Complex alpha, int dim);

/// rho = D(alpha) S(xi) rho_thermal(nbar) S(xi)^dagger D(alpha)^dagger.
struct GaussianParameters {
    Complex displacement;
    double squeeze_r = 0.0;
    /// Phase-space angle of the squeezed quadrature.
    double squeeze_angle = 0.0;
    double thermal_photons = 0.0;
};

GaussianParameters decompose(const GaussianState& s);

/// Operators are exponentiated at working dimension 2 * dim, then cropped.
FockDensityMatrix gaussian_to_fock(const GaussianState& s, int dim = kDefaultCutoff);

/// Normalized weighted sum of the branch conversions. Branches carrying less
/// than 1e-12 of the total weight are skipped.
FockDensityMatrix mixture_to_fock(const GaussianMixture& mix, int dim = kDefaultCutoff);

/// [Tr sqrt(sqrt(a) b sqrt(a))]^2 after renormalizing both to unit trace.
double uhlmann_fidelity(const FockDensityMatrix& a, const FockDensityMatrix& b);

struct PhaseSpaceGrid {
    double x_min = -6.0;
    double x_max = 6.0;
    int nx = 121;
    double p_min = -6.0;
    double p_max = 6.0;
    int np = 121;

    double x(int i) const { return nx == 1 ? x_min : x_min + (x_max - x_min) * i / (nx - 1); }
    double p(int j) const { return np == 1 ? p_min : p_min + (p_max - p_min) * j / (np - 1); }
    double dx() const { return nx == 1 ? 0.0 : (x_max - x_min) / (nx - 1); }
    double dp() const { return np == 1 ? 0.0 : (p_max - p_min) / (np - 1); }
};

/// W(x_i, p_j) in shot-noise coordinates, normalized so that the integral
/// over dx dp equals the trace.
Eigen::MatrixXd wigner_from_fock(const FockDensityMatrix& rho, const PhaseSpaceGrid& grid);

}  // namespace cvqec
