#pragma once

// Simulated homodyne tomography and maximum-likelihood reconstruction.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cvqec/fock.hpp"
#include "cvqec/gaussian.hpp"

namespace cvqec {

struct QuadratureSample {
    double theta;  // local-oscillator phase, radians
    double value;  // x cos(theta) + p sin(theta), shot-noise units
};

struct TomographyConfig {
    int cutoff = kDefaultCutoff;
    int max_iters = 2000;
    /// Stop once the mean log-likelihood gains less than this.
    double tolerance = 1e-9;
    int phase_bins = 64;
    int value_bins = 240;
    /// Value bins cover [-value_range, value_range]; samples outside are dropped.
    double value_range = 12.0;

    void validate() const;
};

/// Phases follow a uniform linear sweep over [0, 2 pi); each value comes from
/// the branch picked by weight. Deterministic in `seed` on every platform.
std::vector<QuadratureSample> sample_homodyne(const GaussianMixture& mix, std::size_t n, std::uint64_t seed);

/// <n|x_theta> = e^{i n theta} psi_n(x), n < dim, with psi_n the Hermite
/// functions for vacuum variance 1.
Eigen::VectorXcd quadrature_projector(double theta, double x, int dim);

struct Reconstruction {
    FockDensityMatrix rho;
    int iterations = 0;
    /// Mean log-likelihood before the first and after every iteration.
    std::vector<double> log_likelihood;
    bool converged = false;
    bool monotone = true;
    /// Iterations that fell back to a diluted step to keep the likelihood rising.
    int diluted_steps = 0;
    /// Fewer than two occupied phase bins or value bins.
    bool degenerate = false;
    std::size_t dropped_samples = 0;
};

/// Iterates rho <- N[R rho R] with R = sum_k (f_k / p_k) Pi_k over
/// phase/value bins, starting from the maximally mixed state.
Reconstruction maxlik_reconstruct(std::span<const QuadratureSample> samples, const TomographyConfig& config);

}  // namespace cvqec
