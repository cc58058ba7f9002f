#pragma once

// Gaussian-state engine for N bosonic modes.
//
// Quadratures are interleaved (x1, p1, ..., xN, pN) with x = a + a^dagger,
// so the vacuum has unit variance in every quadrature (shot-noise units) and
// a coherent state |alpha> has mean (2 Re alpha, 2 Im alpha).

#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cvqec {

using Complex = std::complex<double>;

class GaussianState {
public:
    /// Throws std::invalid_argument on odd/mismatched dimensions or a
    /// covariance that is not symmetric to 1e-12 (relative to its scale).
    GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov);

    static GaussianState vacuum(int num_modes);

    int num_modes() const { return static_cast<int>(mean_.size() / 2); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& cov() const { return cov_; }

    /// Reduced state of the listed modes, in the listed order.
    GaussianState marginal(std::span<const int> modes) const;
    GaussianState mode(int k) const;

    /// All symplectic eigenvalues >= 1 - tol.
    bool is_physical(double tol = 1e-9) const;

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
};

/// Affine symplectic map r -> S r + d.
struct SymplecticTransform {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd displacement;

    static SymplecticTransform identity(int num_modes);
    static SymplecticTransform displace(const Eigen::VectorXd& d);
    int num_modes() const { return static_cast<int>(matrix.rows() / 2); }

    /// (*this) after `first`.
    SymplecticTransform after(const SymplecticTransform& first) const;
    SymplecticTransform inverse() const;
};

/// Standard symplectic form for the interleaved ordering.
Eigen::MatrixXd symplectic_form(int num_modes);

/// Sorted ascending, one value per mode.
Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& cov);

/// max-norm of S Omega S^T - Omega.
double symplectic_residual(const Eigen::MatrixXd& s);

Eigen::Vector2d coherent_mean(Complex alpha);
Eigen::Matrix2d rotation(double angle);

GaussianState coherent_state(Complex alpha);

/// Single-mode squeezed vacuum. `squeeze_db` > 0 puts the variance of the
/// quadrature at `angle` below shot noise; `antisqueeze_db` sets the
/// conjugate variance. Equal values give a pure state.
GaussianState squeezed_vacuum(double squeeze_db, double antisqueeze_db, double angle = 0.0);

GaussianState tensor(std::span<const GaussianState> states);
GaussianState tensor(std::initializer_list<GaussianState> states);

/// Two-mode beam splitter on modes (i, j):
///   a_i -> t a_i + r e^{i phase} a_j,  a_j -> -r e^{-i phase} a_i + t a_j
/// with t = sqrt(transmittance), r = sqrt(1 - transmittance).
SymplecticTransform beam_splitter(int num_modes, int i, int j, double transmittance,
                                  double phase = 0.0);

/// a_k -> e^{i angle} a_k.
SymplecticTransform phase_shift(int num_modes, int k, double angle);

/// Scales the quadrature at phase-space `angle` by e^{-r} and the orthogonal
/// one by e^{r}.
SymplecticTransform single_mode_squeezer(int num_modes, int k, double r, double angle = 0.0);

GaussianState apply(const SymplecticTransform& t, const GaussianState& s);

/// Trace out `mode` and put a vacuum in its place.
GaussianState replace_with_vacuum(const GaussianState& s, int mode);

/// Pure-loss channel with transmissivity eta on `mode`.
GaussianState loss_channel(const GaussianState& s, int mode, double eta);

/// Post-measurement state of the unmeasured modes as an affine function of
/// the measurement record: mean = base_mean + gain * (outcome - outcome_mean),
/// covariance = cond_cov for every outcome.
struct AffineConditional {
    Eigen::VectorXd base_mean;
    Eigen::MatrixXd gain;
    Eigen::MatrixXd cond_cov;

    int num_modes() const { return static_cast<int>(base_mean.size() / 2); }
    int num_outcomes() const { return static_cast<int>(gain.cols()); }
    GaussianState state_at(const Eigen::VectorXd& deviation) const;
};

struct HomodyneOutcome {
    double outcome_mean = 0.0;
    double outcome_var = 0.0;
    AffineConditional conditional;
    /// Outcome variance fell below 1e-12 and the pseudoinverse was used.
    bool degenerate = false;
};

/// Ideal homodyne detection of x cos(angle) + p sin(angle) on `mode`. The
/// measured mode is removed from the conditional state. Requires N >= 2.
HomodyneOutcome homodyne_condition(const GaussianState& s, int mode, double angle);

/// <alpha| rho |alpha> for a single-mode Gaussian rho.
double coherent_overlap(const GaussianState& s, Complex alpha);

struct MixtureBranch {
    double weight;
    GaussianState state;
};

/// Unnormalized convex combination of Gaussian states.
class GaussianMixture {
public:
    GaussianMixture() = default;
    explicit GaussianMixture(std::vector<MixtureBranch> branches);

    void add(double weight, GaussianState state);
    void append(const GaussianMixture& other, double scale = 1.0);

    const std::vector<MixtureBranch>& branches() const { return branches_; }
    std::size_t size() const { return branches_.size(); }
    bool empty() const { return branches_.empty(); }
    double total_weight() const;
    /// Mode count of the first branch; 0 when empty.
    int num_modes() const;

private:
    std::vector<MixtureBranch> branches_;
};

}  // namespace cvqec
