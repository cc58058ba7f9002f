#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cvqec/tomography.hpp"

using namespace cvqec;

namespace {

GaussianMixture single(const GaussianState& s) {
    GaussianMixture m;
    m.add(1.0, s);
    return m;
}

TomographyConfig small_config(int cutoff) {
    TomographyConfig c;
    c.cutoff = cutoff;
    c.value_range = 8.0;
    c.value_bins = 160;
    c.phase_bins = 32;
    return c;
}

}  // namespace

TEST(Projector, HermiteFunctionsAreOrthonormal) {
    const int dim = 12;
    const double h = 0.01;
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(dim, dim);
    for (double x = -15.0; x <= 15.0; x += h) {
        const auto v = quadrature_projector(0.0, x, dim);
        gram += h * v * v.adjoint();
    }
    EXPECT_TRUE(gram.isApprox(Eigen::MatrixXcd::Identity(dim, dim), 1e-8));
}

TEST(Projector, VacuumQuadratureDensity) {
    // |<0|x>|^2 is the N(0, 1) density in shot-noise units.
    for (const double x : {-1.5, 0.0, 0.7}) {
        const auto v = quadrature_projector(0.3, x, 4);
        EXPECT_NEAR(std::norm(v(0)), std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi), 1e-14);
    }
    EXPECT_NEAR(std::arg(quadrature_projector(0.3, 1.0, 4)(1)), 0.3, 1e-14);
}

TEST(Sampling, DeterministicInSeedWithLinearPhaseSweep) {
    const auto mix = single(coherent_state({1.0, 0.0}));
    const auto a = sample_homodyne(mix, 1000, 5);
    const auto b = sample_homodyne(mix, 1000, 5);
    const auto c = sample_homodyne(mix, 1000, 6);
    ASSERT_EQ(a.size(), 1000u);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].value, b[i].value);
        EXPECT_DOUBLE_EQ(a[i].theta, 2.0 * std::numbers::pi * i / 1000.0);
        differs = differs || a[i].value != c[i].value;
    }
    EXPECT_TRUE(differs);
}

TEST(Sampling, VacuumMomentsWithinStatisticalError) {
    const std::size_t n = 100000;
    const auto s = sample_homodyne(single(GaussianState::vacuum(1)), n, 42);
    double sum = 0.0;
    double sum2 = 0.0;
    for (const auto& q : s) {
        sum += q.value;
        sum2 += q.value * q.value;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(static_cast<double>(n)));
    EXPECT_LT(std::abs(var - 1.0), 4.0 * std::sqrt(2.0 / n));
}

TEST(Sampling, CoherentQuadratureFollowsThePhase) {
    const auto s = sample_homodyne(single(coherent_state({2.0, 0.0})), 40000, 3);
    double along = 0.0;
    for (const auto& q : s) along += q.value * std::cos(q.theta);
    // E[value cos theta] = 4 <cos^2> = 2 over a full sweep.
    EXPECT_NEAR(along / s.size(), 2.0, 0.05);
}

TEST(Sampling, RejectsBadMixtures) {
    EXPECT_THROW(sample_homodyne(GaussianMixture{}, 10, 1), std::invalid_argument);
    EXPECT_THROW(sample_homodyne(single(GaussianState::vacuum(2)), 10, 1), std::invalid_argument);
}

TEST(MaxLik, ReconstructsCoherentState) {
    const Complex a{1.0, 0.5};
    const auto samples = sample_homodyne(single(coherent_state(a)), 50000, 9);
    const auto rec = maxlik_reconstruct(samples, small_config(12));
    EXPECT_TRUE(rec.converged);
    EXPECT_TRUE(rec.monotone);
    EXPECT_FALSE(rec.degenerate);
    EXPECT_NO_THROW(rec.rho.check_valid(1e-10));
    EXPECT_NEAR(rec.rho.trace(), 1.0, 1e-10);
    EXPECT_GT(uhlmann_fidelity(rec.rho, coherent_fock(a, 12)), 0.99);
}

TEST(MaxLik, ReconstructsSqueezedVacuum) {
    const auto s = squeezed_vacuum(3.0, 3.0, 0.5);
    const auto samples = sample_homodyne(single(s), 60000, 10);
    const auto rec = maxlik_reconstruct(samples, small_config(16));
    EXPECT_GT(uhlmann_fidelity(rec.rho, gaussian_to_fock(s, 16)), 0.99);
    for (std::size_t k = 1; k < rec.log_likelihood.size(); ++k) {
        ASSERT_GE(rec.log_likelihood[k], rec.log_likelihood[k - 1]);
    }
}

TEST(MaxLik, MoreSamplesDoNotLowerMedianFidelity) {
    const auto s = squeezed_vacuum(2.0, 4.0, 0.2);
    const auto truth = gaussian_to_fock(s, 10);
    const auto median_fidelity = [&](std::size_t n) {
        std::vector<double> f;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto samples = sample_homodyne(single(s), n, seed);
            f.push_back(uhlmann_fidelity(maxlik_reconstruct(samples, small_config(10)).rho, truth));
        }
        std::nth_element(f.begin(), f.begin() + 2, f.end());
        return f[2];
    };
    EXPECT_GE(median_fidelity(20000), median_fidelity(5000));
}

TEST(MaxLik, SinglePhaseDataIsDegenerate) {
    std::vector<QuadratureSample> samples;
    for (int k = 0; k < 200; ++k) samples.push_back({0.0, -1.0 + 0.01 * k});
    const auto rec = maxlik_reconstruct(samples, small_config(6));
    EXPECT_TRUE(rec.degenerate);
}

TEST(MaxLik, DropsOutOfRangeSamples) {
    std::vector<QuadratureSample> samples{{0.0, 0.1}, {1.0, -0.2}, {2.0, 50.0}};
    const auto rec = maxlik_reconstruct(samples, small_config(4));
    EXPECT_EQ(rec.dropped_samples, 1u);
}

TEST(MaxLik, InputValidation) {
    EXPECT_THROW(maxlik_reconstruct({}, TomographyConfig{}), std::invalid_argument);
    TomographyConfig bad;
    bad.cutoff = 1;
    const std::vector<QuadratureSample> one{{0.0, 0.0}};
    EXPECT_THROW(maxlik_reconstruct(one, bad), std::invalid_argument);
    bad = TomographyConfig{};
    bad.tolerance = 0.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}
