#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cvqec/experiments.hpp"
#include "cvqec/fock.hpp"

using namespace cvqec;

namespace {

// |alpha> amplitudes from the Poisson series, independent of the library.
Eigen::VectorXcd coherent_ket(Complex alpha, int dim) {
    Eigen::VectorXcd v(dim);
    v(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    return v;
}

FockDensityMatrix from_matrix(Eigen::MatrixXcd m) {
    FockDensityMatrix rho;
    rho.entries = std::move(m);
    return rho;
}

double integrate(const Eigen::MatrixXd& w, const PhaseSpaceGrid& g) { return w.sum() * g.dx() * g.dp(); }

}  // namespace

TEST(Fock, CoherentMatchesPoissonAmplitudes) {
    const Complex a{0.7, -0.4};
    const auto rho = coherent_fock(a, 20);
    const auto ket = coherent_ket(a, 20);
    EXPECT_TRUE(rho.entries.isApprox(ket * ket.adjoint(), 1e-12));
    EXPECT_NEAR(rho.mean_photon_number(), std::norm(a), 1e-10);
}

TEST(Fock, GaussianCoherentMatchesDirectCoherent) {
    const Complex a{1.2, 0.5};
    const auto rho = gaussian_to_fock(coherent_state(a), 25);
    EXPECT_LT((rho.entries - coherent_fock(a, 25).entries).norm(), 1e-10);
    EXPECT_LT(rho.trace_deficit, 1e-10);
    EXPECT_FALSE(rho.cutoff_warning);
}

TEST(Fock, SqueezedVacuumPhotonStatistics) {
    const double db = 6.0;
    const double r = db / 20.0 * std::log(10.0);
    const auto rho = gaussian_to_fock(squeezed_vacuum(db, db), 40);
    EXPECT_NEAR(rho.entries(0, 0).real(), 1.0 / std::cosh(r), 1e-10);
    // P(2) = tanh^2 r / (2 cosh r).
    EXPECT_NEAR(rho.entries(2, 2).real(), std::pow(std::tanh(r), 2) / (2.0 * std::cosh(r)), 1e-10);
    for (int n = 1; n < 40; n += 2) EXPECT_NEAR(rho.entries(n, n).real(), 0.0, 1e-12);
    EXPECT_NEAR(rho.mean_photon_number(), std::pow(std::sinh(r), 2), 1e-6);
}

TEST(Fock, ThermalStateIsGeometric) {
    const double nbar = 0.6;
    const GaussianState thermal(Eigen::Vector2d::Zero(), (2 * nbar + 1) * Eigen::Matrix2d::Identity());
    const auto rho = gaussian_to_fock(thermal, 30);
    for (int n = 0; n < 10; ++n) {
        EXPECT_NEAR(rho.entries(n, n).real(), std::pow(nbar, n) / std::pow(nbar + 1, n + 1), 1e-10) << n;
    }
    EXPECT_LT(rho.entries.imag().norm() + (rho.entries.real() - Eigen::MatrixXd(rho.entries.real().diagonal().asDiagonal())).norm(),
              1e-10);
}

TEST(Fock, DecomposeRecoversConstruction) {
    const double r = 0.4;
    const double angle = 0.3;
    const double nbar = 0.25;
    const GaussianState thermal(Eigen::Vector2d::Zero(), (2 * nbar + 1) * Eigen::Matrix2d::Identity());
    auto t = single_mode_squeezer(1, 0, r, angle);
    t = SymplecticTransform::displace(coherent_mean({0.5, -1.0})).after(t);
    const auto p = decompose(apply(t, thermal));
    EXPECT_NEAR(p.displacement.real(), 0.5, 1e-12);
    EXPECT_NEAR(p.displacement.imag(), -1.0, 1e-12);
    EXPECT_NEAR(p.squeeze_r, r, 1e-10);
    EXPECT_NEAR(p.thermal_photons, nbar, 1e-10);
    EXPECT_NEAR(std::remainder(p.squeeze_angle - angle, std::numbers::pi), 0.0, 1e-9);
}

TEST(Fock, GaussianOverlapAgreesWithFockOverlap) {
    const GaussianState thermal(Eigen::Vector2d::Zero(), 1.4 * Eigen::Matrix2d::Identity());
    const auto s = apply(SymplecticTransform::displace(coherent_mean({0.8, 0.3})).after(single_mode_squeezer(1, 0, 0.3, 1.0)),
                         thermal);
    for (const Complex beta : {Complex{0.0, 0.0}, Complex{1.0, 0.5}, Complex{-0.5, 1.2}}) {
        const auto ket = coherent_ket(beta, 35);
        const double fock = (ket.adjoint() * gaussian_to_fock(s, 35).entries * ket)(0, 0).real();
        EXPECT_NEAR(coherent_overlap(s, beta), fock, 1e-8);
    }
}

TEST(Fock, LargeAmplitudeFlagsTruncation) {
    const auto rho = gaussian_to_fock(coherent_state({4.0, 4.0}), 20);
    EXPECT_GT(rho.trace_deficit, kTraceDeficitWarning);
    EXPECT_TRUE(rho.cutoff_warning);
}

TEST(Fock, MixtureOfSingleChannelBaseline) {
    const auto mix = single_channel_mixture({3.0, 3.0}, 0.25);
    const double analytic = 1.0 - 0.25 * (1.0 - std::exp(-18.0));
    const auto rho45 = mixture_to_fock(mix, 45);
    EXPECT_NEAR(uhlmann_fidelity(rho45, coherent_fock({3.0, 3.0}, 45)), analytic, 1e-6);
    const auto rho30 = mixture_to_fock(mix, 30);
    EXPECT_NEAR(uhlmann_fidelity(rho30, coherent_fock({3.0, 3.0}, 30)), analytic, 5e-3);
    EXPECT_NEAR(rho45.entries(0, 0).real(), 0.25 + 0.75 * std::exp(-18.0), 1e-9);
}

TEST(Fock, MixtureMatchesBranchSum) {
    GaussianMixture mix;
    mix.add(0.3, coherent_state({0.5, 0.2}));
    mix.add(0.7, squeezed_vacuum(3.0, 4.0, 0.4));
    const auto rho = mixture_to_fock(mix, 25);
    const Eigen::MatrixXcd expected =
        0.3 * gaussian_to_fock(mix.branches()[0].state, 25).entries + 0.7 * gaussian_to_fock(mix.branches()[1].state, 25).entries;
    EXPECT_LT((rho.entries - expected).norm(), 1e-9);
    EXPECT_THROW(mixture_to_fock(GaussianMixture{}, 10), std::domain_error);
}

TEST(Uhlmann, PureStatesGiveSquaredOverlap) {
    const Complex a{0.4, 0.1};
    const Complex b{-0.2, 0.6};
    EXPECT_NEAR(uhlmann_fidelity(coherent_fock(a, 30), coherent_fock(b, 30)), std::exp(-std::norm(a - b)), 1e-10);
}

TEST(Uhlmann, SymmetricBoundedAndReflexive) {
    const auto a = gaussian_to_fock(squeezed_vacuum(2.0, 4.0), 20);
    const auto b = gaussian_to_fock(GaussianState(Eigen::Vector2d(0.3, 0.1), 1.3 * Eigen::Matrix2d::Identity()), 20);
    const double ab = uhlmann_fidelity(a, b);
    EXPECT_NEAR(ab, uhlmann_fidelity(b, a), 1e-8);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_NEAR(uhlmann_fidelity(b, b), 1.0, 1e-8);
}

TEST(Uhlmann, RejectsNonHermitianInput) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(3, 3) / 3.0;
    m(0, 1) = Complex{0.1, 0.0};
    EXPECT_THROW(uhlmann_fidelity(from_matrix(m), coherent_fock({0.1, 0.0}, 3)), std::domain_error);
    EXPECT_THROW(uhlmann_fidelity(coherent_fock({0.1, 0.0}, 4), coherent_fock({0.1, 0.0}, 3)), std::invalid_argument);
}

TEST(Density, ValidityChecks) {
    EXPECT_NO_THROW(coherent_fock({1.0, 0.0}, 10).check_valid());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 0) = 1.2;
    m(1, 1) = -0.2;
    EXPECT_THROW(from_matrix(m).check_valid(), std::domain_error);
    auto half = coherent_fock({0.5, 0.0}, 10);
    half.entries *= 0.5;
    EXPECT_NEAR(half.normalized().trace(), 1.0, 1e-14);
}

TEST(Wigner, VacuumPeakAndNormalization) {
    PhaseSpaceGrid grid{-6.0, 6.0, 121, -6.0, 6.0, 121};
    const auto w = wigner_from_fock(coherent_fock({0.0, 0.0}, 10), grid);
    EXPECT_NEAR(w(60, 60), 1.0 / (2.0 * std::numbers::pi), 1e-12);
    EXPECT_NEAR(integrate(w, grid), 1.0, 1e-6);
}

TEST(Wigner, CoherentStateIsDisplacedGaussian) {
    PhaseSpaceGrid grid{-2.0, 6.0, 81, -4.0, 4.0, 81};
    const Complex a{1.0, 0.5};
    const auto w = wigner_from_fock(coherent_fock(a, 30), grid);
    for (int i = 0; i < grid.nx; i += 10) {
        for (int j = 0; j < grid.np; j += 10) {
            const double dx = grid.x(i) - 2.0;
            const double dp = grid.p(j) - 1.0;
            EXPECT_NEAR(w(i, j), std::exp(-0.5 * (dx * dx + dp * dp)) / (2.0 * std::numbers::pi), 1e-10);
        }
    }
}

TEST(Wigner, SinglePhotonIsNegativeAtOrigin) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(5, 5);
    m(1, 1) = 1.0;
    PhaseSpaceGrid grid{-6.0, 6.0, 121, -6.0, 6.0, 121};
    const auto w = wigner_from_fock(from_matrix(m), grid);
    EXPECT_NEAR(w(60, 60), -1.0 / (2.0 * std::numbers::pi), 1e-12);
    EXPECT_NEAR(integrate(w, grid), 1.0, 1e-6);
}
