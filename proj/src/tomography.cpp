#include "cvqec/tomography.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace cvqec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Portable draws from mt19937_64, whose output sequence is fixed by the standard.
class PortableRng {
public:
    explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

private:
    std::mt19937_64 engine_;
};

// psi_n(x) for n < dim: Hermite functions normalized for vacuum variance 1.
Eigen::VectorXd hermite_functions(double x, int dim) {
    Eigen::VectorXd psi(dim);
    psi(0) = std::pow(kTwoPi, -0.25) * std::exp(-0.25 * x * x);
    if (dim > 1) psi(1) = x * psi(0);
    for (int n = 1; n + 1 < dim; ++n) {
        psi(n + 1) = (x * psi(n) - std::sqrt(static_cast<double>(n)) * psi(n - 1)) /
                     std::sqrt(static_cast<double>(n + 1));
    }
    return psi;
}

// 4-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 4> kGaussNodes{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                            0.8611363115940526};
constexpr std::array<double, 4> kGaussWeights{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                              0.3478548451374538};

struct OccupiedBin {
    int phase;
    double frequency;
};

struct ValueBin {
    Eigen::MatrixXd overlap;  // integral of psi_n psi_m over the bin
    std::vector<OccupiedBin> phases;
};

class BinnedLikelihood {
public:
    BinnedLikelihood(std::vector<ValueBin> bins, Eigen::MatrixXcd phase_factors)
        : bins_(std::move(bins)), phase_factors_(std::move(phase_factors)) {}

    // Bin probabilities p_k for `rho`, in the order of the occupied bins.
    std::vector<double> probabilities(const Eigen::MatrixXcd& rho) const {
        const int dim = static_cast<int>(rho.rows());
        std::vector<double> p;
        Eigen::VectorXcd c(dim);
        for (const auto& bin : bins_) {
            for (int d = 0; d < dim; ++d) {
                Complex acc{};
                for (int m = 0; m + d < dim; ++m) acc += rho(m, m + d) * bin.overlap(m + d, m);
                c(d) = acc;
            }
            for (const auto& occ : bin.phases) {
                Complex off{};
                for (int d = 1; d < dim; ++d) off += phase_factors_(occ.phase, d) * c(d);
                p.push_back(std::max(c(0).real() + 2.0 * off.real(), 1e-300));
            }
        }
        return p;
    }

    double log_likelihood(const std::vector<double>& p) const {
        double ll = 0.0;
        std::size_t k = 0;
        for (const auto& bin : bins_) {
            for (const auto& occ : bin.phases) ll += occ.frequency * std::log(p[k++]);
        }
        return ll;
    }

    Eigen::MatrixXcd r_operator(const std::vector<double>& p, int dim) const {
        Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(dim, dim);
        Eigen::VectorXcd g(dim);
        std::size_t k = 0;
        for (const auto& bin : bins_) {
            g.setZero();
            for (const auto& occ : bin.phases) {
                const double ratio = occ.frequency / p[k++];
                g += ratio * phase_factors_.row(occ.phase).transpose();
            }
            for (int n = 0; n < dim; ++n) {
                for (int m = 0; m < dim; ++m) {
                    const Complex gd = n >= m ? g(n - m) : std::conj(g(m - n));
                    r(n, m) += bin.overlap(n, m) * gd;
                }
            }
        }
        return 0.5 * (r + r.adjoint());
    }

private:
    std::vector<ValueBin> bins_;
    Eigen::MatrixXcd phase_factors_;  // [phase bin, offset d]
};

Eigen::MatrixXcd sandwich(const Eigen::MatrixXcd& op, const Eigen::MatrixXcd& rho) {
    Eigen::MatrixXcd out = op * rho * op.adjoint();
    out = 0.5 * (out + out.adjoint());
    return out / out.trace().real();
}

}  // namespace

void TomographyConfig::validate() const {
    if (cutoff < 2) throw std::invalid_argument(fmt::format("tomography cutoff {} < 2", cutoff));
    if (!(tolerance > 0.0)) throw std::invalid_argument("tomography tolerance must be positive");
    if (max_iters < 1 || phase_bins < 1 || value_bins < 1 || !(value_range > 0.0)) {
        throw std::invalid_argument("tomography bin counts, range and iteration cap must be positive");
    }
}

std::vector<QuadratureSample> sample_homodyne(const GaussianMixture& mix, std::size_t n, std::uint64_t seed) {
    if (mix.empty()) throw std::invalid_argument("cannot sample an empty mixture");
    if (mix.num_modes() != 1) throw std::invalid_argument("sample_homodyne needs single-mode branches");
    const auto& branches = mix.branches();
    std::vector<double> cumulative(branches.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < branches.size(); ++i) cumulative[i] = acc += branches[i].weight;
    if (!(acc > 0.0)) throw std::invalid_argument("mixture has zero total weight");

    PortableRng rng(seed);
    std::vector<QuadratureSample> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double theta = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), rng.uniform() * acc);
        const auto& s = branches[std::min<std::size_t>(it - cumulative.begin(), branches.size() - 1)].state;
        const Eigen::Vector2d dir(std::cos(theta), std::sin(theta));
        const double mean = dir.dot(s.mean());
        const double sd = std::sqrt(std::max(0.0, dir.dot(s.cov() * dir)));
        out.push_back({theta, mean + sd * rng.normal()});
    }
    return out;
}

Eigen::VectorXcd quadrature_projector(double theta, double x, int dim) {
    if (dim < 1) throw std::invalid_argument("projector dimension must be positive");
    const Eigen::VectorXd psi = hermite_functions(x, dim);
    Eigen::VectorXcd out(dim);
    for (int n = 0; n < dim; ++n) out(n) = std::polar(psi(n), n * theta);
    return out;
}

Reconstruction maxlik_reconstruct(std::span<const QuadratureSample> samples, const TomographyConfig& config) {
    config.validate();
    if (samples.empty()) throw std::invalid_argument("maxlik_reconstruct needs at least one sample");
    const int dim = config.cutoff;
    const double phase_width = kTwoPi / config.phase_bins;
    const double value_width = 2.0 * config.value_range / config.value_bins;

    Reconstruction result;
    std::map<std::pair<int, int>, std::size_t> counts;  // (value bin, phase bin)
    std::size_t kept = 0;
    for (const auto& s : samples) {
        const double theta = s.theta - kTwoPi * std::floor(s.theta / kTwoPi);
        const int j = std::min(config.phase_bins - 1, static_cast<int>(theta / phase_width));
        const double u = (s.value + config.value_range) / value_width;
        if (!(u >= 0.0 && u < config.value_bins)) {
            ++result.dropped_samples;
            continue;
        }
        ++counts[{static_cast<int>(u), j}];
        ++kept;
    }
    if (kept == 0) throw std::invalid_argument("no samples fall inside the tomography value range");

    std::vector<bool> phase_seen(config.phase_bins, false);
    std::vector<ValueBin> bins;
    int last_bin = -1;
    for (const auto& [key, count] : counts) {
        const auto [b, j] = key;
        phase_seen[j] = true;
        if (b != last_bin) {
            const double lo = -config.value_range + b * value_width;
            Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(dim, dim);
            for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
                const double x = lo + 0.5 * value_width * (kGaussNodes[q] + 1.0);
                const Eigen::VectorXd psi = hermite_functions(x, dim);
                overlap.noalias() += (0.5 * value_width * kGaussWeights[q]) * psi * psi.transpose();
            }
            bins.push_back({std::move(overlap), {}});
            last_bin = b;
        }
        bins.back().phases.push_back({j, static_cast<double>(count) / static_cast<double>(kept)});
    }
    const auto phases_used = std::count(phase_seen.begin(), phase_seen.end(), true);
    result.degenerate = counts.size() <= 1 || bins.size() <= 1 || phases_used <= 1;

    // Bin-averaged phase factor e^{i d theta_j} sinc(d width / 2).
    Eigen::MatrixXcd phase_factors(config.phase_bins, dim);
    for (int j = 0; j < config.phase_bins; ++j) {
        const double center = (j + 0.5) * phase_width;
        for (int d = 0; d < dim; ++d) {
            const double half = 0.5 * d * phase_width;
            const double sinc = d == 0 ? 1.0 : std::sin(half) / half;
            phase_factors(j, d) = std::polar(sinc, d * center);
        }
    }
    const BinnedLikelihood model(std::move(bins), std::move(phase_factors));

    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim);
    auto p = model.probabilities(rho);
    double ll = model.log_likelihood(p);
    result.log_likelihood.push_back(ll);
    const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(dim, dim);

    for (int it = 0; it < config.max_iters; ++it) {
        const Eigen::MatrixXcd r = model.r_operator(p, dim);
        Eigen::MatrixXcd next = sandwich(r, rho);
        auto next_p = model.probabilities(next);
        double next_ll = model.log_likelihood(next_p);
        if (next_ll < ll) {
            // Diluted steps (I + eps R) increase the likelihood for small eps.
            bool improved = false;
            for (double eps = 1.0; eps > 1e-9; eps *= 0.5) {
                next = sandwich(identity + eps * r, rho);
                next_p = model.probabilities(next);
                next_ll = model.log_likelihood(next_p);
                if (next_ll >= ll) {
                    improved = true;
                    break;
                }
            }
            if (!improved) {
                result.converged = true;
                break;
            }
            ++result.diluted_steps;
        }
        const double gain = next_ll - ll;
        rho = std::move(next);
        p = std::move(next_p);
        ll = next_ll;
        result.log_likelihood.push_back(ll);
        result.iterations = it + 1;
        if (gain < config.tolerance) {
            result.converged = true;
            break;
        }
    }

    for (std::size_t k = 1; k < result.log_likelihood.size(); ++k) {
        if (result.log_likelihood[k] < result.log_likelihood[k - 1]) result.monotone = false;
    }
    result.rho.entries = rho;
    result.rho.trace_deficit = 0.0;
    return result;
}

}  // namespace cvqec
