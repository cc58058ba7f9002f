#include "cvqec/validation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "cvqec/erasure_code.hpp"
#include "cvqec/experiments.hpp"
#include "cvqec/fock.hpp"
#include "cvqec/gaussian.hpp"
#include "cvqec/parallel.hpp"
#include "cvqec/tomography.hpp"

namespace cvqec {

namespace {

constexpr double kPi = 3.14159265358979323846;

class Draws {
public:
    explicit Draws(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal() { return std::normal_distribution<double>()(engine_); }
    int index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }

private:
    std::mt19937_64 engine_;
};

SymplecticTransform random_transform(Draws& rng, int modes, int steps) {
    auto t = SymplecticTransform::identity(modes);
    for (int k = 0; k < steps; ++k) {
        const int i = rng.index(modes);
        switch (rng.index(3)) {
            case 0: {
                if (modes < 2) break;
                int j = rng.index(modes - 1);
                if (j >= i) ++j;
                t = beam_splitter(modes, i, j, rng.uniform(0.0, 1.0), rng.uniform(0.0, 2 * kPi)).after(t);
                break;
            }
            case 1: t = phase_shift(modes, i, rng.uniform(0.0, 2 * kPi)).after(t); break;
            default:
                t = single_mode_squeezer(modes, i, rng.uniform(-0.8, 0.8), rng.uniform(0.0, kPi)).after(t);
        }
    }
    Eigen::VectorXd d(2 * modes);
    for (int k = 0; k < 2 * modes; ++k) d(k) = rng.uniform(-2.0, 2.0);
    return SymplecticTransform::displace(d).after(t);
}

GaussianState random_state(Draws& rng, int modes) {
    Eigen::VectorXd nu(2 * modes);
    for (int k = 0; k < modes; ++k) nu(2 * k) = nu(2 * k + 1) = rng.uniform(1.0, 2.0);
    const GaussianState thermal(Eigen::VectorXd::Zero(2 * modes), nu.asDiagonal().toDenseMatrix());
    return apply(random_transform(rng, modes, 8), thermal);
}

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

CheckResult check_symplectic_invariants(std::uint64_t seed) {
    Draws rng(seed);
    double worst_residual = 0.0;
    double worst_eigen = 0.0;
    double worst_inverse = 0.0;
    bool physical = true;
    for (int trial = 0; trial < 50; ++trial) {
        const int modes = 1 + rng.index(4);
        const auto t = random_transform(rng, modes, 12);
        worst_residual = std::max(worst_residual, symplectic_residual(t.matrix));
        const auto round_trip = t.inverse().after(t);
        worst_inverse = std::max(worst_inverse, rel_diff(round_trip.matrix, Eigen::MatrixXd::Identity(2 * modes, 2 * modes)) +
                                                    round_trip.displacement.norm());
        const auto s = random_state(rng, modes);
        const auto out = apply(t, s);
        Eigen::VectorXd before = symplectic_eigenvalues(s.cov());
        Eigen::VectorXd after = symplectic_eigenvalues(out.cov());
        std::sort(before.data(), before.data() + before.size());
        std::sort(after.data(), after.data() + after.size());
        worst_eigen = std::max(worst_eigen, (before - after).cwiseAbs().maxCoeff());
        physical = physical && out.is_physical();
    }
    const bool ok = worst_residual < 1e-10 && worst_inverse < 1e-10 && worst_eigen < 1e-8 && physical;
    return {"symplectic_invariants", ok,
            fmt::format("residual {:.2e}, inverse {:.2e}, eigenvalue drift {:.2e}, physical {}", worst_residual,
                        worst_inverse, worst_eigen, physical)};
}

CheckResult check_conditioning_laws(std::uint64_t seed) {
    Draws rng(seed);
    double worst_cov = 0.0;
    double worst_mean = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        const int modes = 2 + rng.index(3);
        const auto s = random_state(rng, modes);
        const int measured = rng.index(modes);
        const auto h = homodyne_condition(s, measured, rng.uniform(0.0, 2 * kPi));
        std::vector<int> rest;
        for (int k = 0; k < modes; ++k) {
            if (k != measured) rest.push_back(k);
        }
        const auto marginal = s.marginal(rest);
        const Eigen::MatrixXd total =
            h.conditional.cond_cov + h.outcome_var * h.conditional.gain * h.conditional.gain.transpose();
        worst_cov = std::max(worst_cov, rel_diff(total, marginal.cov()));
        worst_mean = std::max(worst_mean, (h.conditional.base_mean - marginal.mean()).norm());
    }

    // Monte Carlo: the outcome-averaged conditional mean equals the marginal mean.
    const auto s = random_state(rng, 3);
    const auto h = homodyne_condition(s, 0, 0.3);
    const int draws = 100000;
    const double sd = std::sqrt(h.outcome_var);
    Eigen::Index comp = 0;
    h.conditional.gain.col(0).cwiseAbs().maxCoeff(&comp);
    double acc = 0.0;
    for (int k = 0; k < draws; ++k) {
        Eigen::VectorXd dev(1);
        dev(0) = sd * rng.normal();
        acc += h.conditional.state_at(dev).mean()(comp);
    }
    const double mc_mean = acc / draws;
    const double std_err = std::abs(h.conditional.gain(comp, 0)) * sd / std::sqrt(static_cast<double>(draws));
    const double mc_dev = std::abs(mc_mean - s.marginal(std::vector<int>{1, 2}).mean()(comp));

    double weight_err = 0.0;
    for (const double pe : {0.0, 0.1, 0.25, 0.5, 0.9, 1.0}) {
        double total = 0.0;
        for (const auto& p : ErasurePattern::all()) total += p.probability(pe);
        weight_err = std::max(weight_err, std::abs(total - 1.0));
    }

    const bool ok = worst_cov < 1e-10 && worst_mean < 1e-10 && mc_dev <= 3.0 * std_err && weight_err < 1e-12;
    return {"conditioning_laws", ok,
            fmt::format("covariance law {:.2e}, mean law {:.2e}, Monte Carlo |dev| {:.2e} vs 3 SE {:.2e}, "
                        "pattern weights {:.2e}",
                        worst_cov, worst_mean, mc_dev, 3.0 * std_err, weight_err)};
}

CheckResult check_gaussian_fock_agreement(std::uint64_t seed) {
    Draws rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const double nu = rng.uniform(1.0, 2.0);
        const GaussianState thermal(Eigen::Vector2d::Zero(), nu * Eigen::Matrix2d::Identity());
        auto t = single_mode_squeezer(1, 0, rng.uniform(-0.5, 0.5), rng.uniform(0.0, kPi));
        t = SymplecticTransform::displace(coherent_mean({rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)})).after(t);
        const auto s = apply(t, thermal);
        const Complex beta{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
        const double gaussian = coherent_overlap(s, beta);
        const double fock = uhlmann_fidelity(gaussian_to_fock(s, 30), coherent_fock(beta, 30));
        worst = std::max(worst, std::abs(gaussian - fock));
    }
    return {"gaussian_fock_agreement", worst < 1e-4, fmt::format("max |overlap - Uhlmann| {:.2e}", worst)};
}

CheckResult check_grid_convergence() {
    ExperimentParams params;
    double worst = 0.0;
    for (const auto& arm : {"entangled", "vacuum"}) {
        QuadratureGrid coarse = params.grid;
        coarse.cells = 101;
        QuadratureGrid fine = params.grid;
        fine.cells = 201;
        const auto code = arm_params(params, arm);
        const auto a = combine_patterns(pattern_acceptance(code, params.rule, coarse), params.p_erase);
        const auto b = combine_patterns(pattern_acceptance(code, params.rule, fine), params.p_erase);
        worst = std::max({worst, std::abs(a.fidelity - b.fidelity), std::abs(a.success_prob - b.success_prob)});
    }
    return {"grid_convergence", worst < 1e-3, fmt::format("max change 101 -> 201 cells {:.2e}", worst)};
}

CheckResult check_reproducibility(std::uint64_t seed) {
    const unsigned saved = default_threads();
    ExperimentParams params;
    params.seed = seed;
    params.gains = linear_grid(0.0, 4.0, 0.25);
    params.threshold_grid = {0.4, 0.8, 1.2};
    params.pe_grid = {0.1, 0.25};

    set_default_threads(1);
    const auto fig2_a = run_fig2e(params);
    const auto fig4_a = run_fig4(params);
    const auto mix = probabilistic_protocol(arm_params(params, "entangled"), 0.25, params.rule, params.grid);
    const auto rho_a = mixture_to_fock(mix.accepted, 20);
    set_default_threads(3);
    const auto fig2_b = run_fig2e(params);
    const auto fig4_b = run_fig4(params);
    const auto rho_b = mixture_to_fock(mix.accepted, 20);
    set_default_threads(saved);

    bool same = fig2_a.size() == fig2_b.size() && fig4_a.size() == fig4_b.size() && rho_a.entries == rho_b.entries;
    for (std::size_t i = 0; same && i < fig2_a.size(); ++i) {
        same = fig2_a[i].fidelity == fig2_b[i].fidelity && fig2_a[i].seed == fig2_b[i].seed;
    }
    for (std::size_t i = 0; same && i < fig4_a.size(); ++i) {
        same = fig4_a[i].fidelity == fig4_b[i].fidelity && fig4_a[i].success_prob == fig4_b[i].success_prob &&
               fig4_a[i].seed == fig4_b[i].seed;
    }

    const auto s1 = sample_homodyne(mix.accepted, 2000, seed);
    const auto s2 = sample_homodyne(mix.accepted, 2000, seed);
    bool samples_same = s1.size() == s2.size();
    for (std::size_t i = 0; samples_same && i < s1.size(); ++i) {
        samples_same = s1[i].theta == s2[i].theta && s1[i].value == s2[i].value;
    }
    return {"reproducibility", same && samples_same,
            fmt::format("thread-count invariance {}, seeded sampling {}", same, samples_same)};
}

std::vector<CheckResult> run_property_suite(std::uint64_t seed) {
    return {check_symplectic_invariants(seed), check_conditioning_laws(seed + 1),
            check_gaussian_fock_agreement(seed + 2), check_grid_convergence(), check_reproducibility(seed + 3)};
}

}  // namespace cvqec
