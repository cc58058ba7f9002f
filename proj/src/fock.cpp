#include "cvqec/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "cvqec/parallel.hpp"

namespace cvqec {

namespace {

constexpr Complex kI{0.0, 1.0};

Eigen::MatrixXcd annihilation(int dim) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

// exp(A) for anti-Hermitian A via the eigendecomposition of the Hermitian iA.
Eigen::MatrixXcd expm_antihermitian(const Eigen::MatrixXcd& a) {
    const Eigen::MatrixXcd h = kI * a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (h + h.adjoint()));
    Eigen::VectorXcd phases(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k) phases(k) = std::exp(-kI * es.eigenvalues()(k));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::MatrixXcd hermitized(const Eigen::MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

void check_dim(int dim) {
    if (dim < 1) throw std::invalid_argument(fmt::format("Fock cutoff {} < 1", dim));
}

FockDensityMatrix finish(Eigen::MatrixXcd entries) {
    FockDensityMatrix out;
    out.entries = hermitized(entries);
    out.trace_deficit = std::max(0.0, 1.0 - out.trace());
    out.cutoff_warning = out.trace_deficit > kTraceDeficitWarning;
    return out;
}

// Rows [0, rows) of D(beta) restricted to columns [0, cols). Column n is
// (a^dagger - conj(beta))^n |beta> / sqrt(n!); raising operators never
// move amplitude downward, so the truncated recursion is exact.
Eigen::MatrixXcd displacement_rows(Complex beta, int rows, int cols) {
    Eigen::MatrixXcd d(rows, cols);
    Eigen::VectorXcd v(rows);
    v(0) = std::exp(-0.5 * std::norm(beta));
    for (int m = 1; m < rows; ++m) v(m) = v(m - 1) * beta / std::sqrt(static_cast<double>(m));
    d.col(0) = v;
    const Complex bc = std::conj(beta);
    for (int n = 0; n + 1 < cols; ++n) {
        const double norm = 1.0 / std::sqrt(static_cast<double>(n + 1));
        for (int m = 0; m < rows; ++m) {
            const Complex raised = m > 0 ? std::sqrt(static_cast<double>(m)) * d(m - 1, n) : Complex{};
            d(m, n + 1) = (raised - bc * d(m, n)) * norm;
        }
    }
    return d;
}

// Centered branch kernel, grown until its truncation loss is negligible.
struct CenteredKernel {
    Eigen::Matrix2d cov;
    Eigen::MatrixXcd rho;
};

CenteredKernel centered_kernel(const Eigen::Matrix2d& cov, int dim) {
    const GaussianState centered(Eigen::Vector2d::Zero(), cov);
    FockDensityMatrix k;
    for (int size : {dim, (3 * dim) / 2, 2 * dim, 3 * dim}) {
        k = gaussian_to_fock(centered, size);
        if (k.trace_deficit < 1e-12) break;
    }
    return {cov, k.entries};
}

}  // namespace

double FockDensityMatrix::mean_photon_number() const {
    double n = 0.0;
    for (int k = 0; k < dim(); ++k) n += k * entries(k, k).real();
    return n;
}

FockDensityMatrix FockDensityMatrix::normalized() const {
    const double tr = trace();
    if (!(tr > 0.0)) throw std::domain_error("density matrix has non-positive trace");
    FockDensityMatrix out = *this;
    out.entries /= tr;
    return out;
}

void FockDensityMatrix::check_valid(double tol) const {
    const double herm = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol) throw std::domain_error(fmt::format("density matrix not Hermitian ({:g})", herm));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitized(entries), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9) {
        throw std::domain_error(fmt::format("density matrix has eigenvalue {:g}", es.eigenvalues().minCoeff()));
    }
}

FockDensityMatrix coherent_fock(Complex alpha, int dim) {
    check_dim(dim);
    Eigen::VectorXcd c(dim);
    c(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < dim; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    return finish(c * c.adjoint());
}

GaussianParameters decompose(const GaussianState& s) {
    if (s.num_modes() != 1) throw std::invalid_argument("decompose needs a single-mode state");
    GaussianParameters g;
    g.displacement = {0.5 * s.mean()(0), 0.5 * s.mean()(1)};
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s.cov());
    const double lo = es.eigenvalues()(0);
    const double hi = es.eigenvalues()(1);
    if (!(lo > 0.0)) throw std::domain_error("covariance is not positive definite");
    const Eigen::Vector2d dir = es.eigenvectors().col(0);
    g.squeeze_angle = std::atan2(dir(1), dir(0));
    g.squeeze_r = 0.25 * std::log(hi / lo);
    g.thermal_photons = std::max(0.0, 0.5 * (std::sqrt(lo * hi) - 1.0));
    return g;
}

FockDensityMatrix gaussian_to_fock(const GaussianState& s, int dim) {
    check_dim(dim);
    const auto g = decompose(s);
    const int work = 2 * dim;
    const Eigen::MatrixXcd a = annihilation(work);
    const Eigen::MatrixXcd ad = a.adjoint();

    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(work, work);
    const double nbar = g.thermal_photons;
    for (int n = 0; n < work; ++n) {
        rho(n, n) = nbar == 0.0 ? (n == 0 ? 1.0 : 0.0) : std::pow(nbar / (nbar + 1.0), n) / (nbar + 1.0);
    }
    if (g.squeeze_r > 0.0) {
        // S(xi) = exp((conj(xi) a^2 - xi a^dagger^2) / 2), xi = r e^{2i angle}.
        const Complex xi = std::polar(g.squeeze_r, 2.0 * g.squeeze_angle);
        const Eigen::MatrixXcd sq = expm_antihermitian(0.5 * (std::conj(xi) * a * a - xi * ad * ad));
        rho = sq * rho * sq.adjoint();
    }
    if (g.displacement != Complex{}) {
        const Eigen::MatrixXcd d = expm_antihermitian(g.displacement * ad - std::conj(g.displacement) * a);
        rho = d * rho * d.adjoint();
    }
    return finish(rho.topLeftCorner(dim, dim));
}

FockDensityMatrix mixture_to_fock(const GaussianMixture& mix, int dim) {
    check_dim(dim);
    if (mix.num_modes() > 1) throw std::invalid_argument("mixture_to_fock needs single-mode branches");
    const double total = mix.total_weight();
    if (!(total > 0.0)) throw std::domain_error("mixture has zero total weight");

    const auto& branches = mix.branches();
    constexpr std::size_t kChunk = 128;
    const std::size_t chunks = (branches.size() + kChunk - 1) / kChunk;
    std::vector<Eigen::MatrixXcd> partial(chunks);

    parallel_for(chunks, [&](std::size_t c) {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
        std::optional<CenteredKernel> kernel;
        const std::size_t end = std::min(branches.size(), (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) {
            const auto& b = branches[i];
            if (b.weight < 1e-12 * total) continue;
            const Eigen::Matrix2d cov = b.state.cov();
            if (!kernel || kernel->cov != cov) kernel = centered_kernel(cov, dim);
            const Complex beta{0.5 * b.state.mean()(0), 0.5 * b.state.mean()(1)};
            const auto cols = static_cast<int>(kernel->rho.rows());
            const Eigen::MatrixXcd d = displacement_rows(beta, dim, cols);
            acc.noalias() += (b.weight / total) * (d * kernel->rho * d.adjoint());
        }
        partial[c] = std::move(acc);
    });

    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& p : partial) rho += p;
    return finish(rho);
}

double uhlmann_fidelity(const FockDensityMatrix& a, const FockDensityMatrix& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument(fmt::format("fidelity of {}- and {}-level matrices", a.dim(), b.dim()));
    }
    for (const auto* m : {&a, &b}) {
        const double herm = (m->entries - m->entries.adjoint()).cwiseAbs().maxCoeff();
        if (herm > 1e-10) throw std::domain_error(fmt::format("fidelity input not Hermitian ({:g})", herm));
    }
    // Work on the support of a so that null directions add no rounding noise.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ea(hermitized(a.normalized().entries));
    const auto& da = ea.eigenvalues();
    const double floor = da.size() * std::numeric_limits<double>::epsilon() * std::max(da.maxCoeff(), 0.0);
    std::vector<Eigen::Index> support;
    for (Eigen::Index k = 0; k < da.size(); ++k) {
        if (da(k) > floor) support.push_back(k);
    }
    Eigen::MatrixXcd v(da.size(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) v.col(k) = ea.eigenvectors().col(support[k]) * std::sqrt(da(support[k]));
    const Eigen::MatrixXcd inner = v.adjoint() * b.normalized().entries * v;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitized(inner), Eigen::EigenvaluesOnly);
    const double tr = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return std::clamp(tr * tr, 0.0, 1.0);
}

Eigen::MatrixXd wigner_from_fock(const FockDensityMatrix& rho, const PhaseSpaceGrid& grid) {
    if (grid.nx < 1 || grid.np < 1) throw std::invalid_argument("empty phase-space grid");
    const int dim = rho.dim();
    // sqrt(n!/m!) for m = n + k, stored as ratio[n][k].
    std::vector<std::vector<double>> ratio(dim, std::vector<double>(dim, 0.0));
    for (int n = 0; n < dim; ++n) {
        double r = 1.0;
        for (int k = 0; n + k < dim; ++k) {
            if (k > 0) r /= std::sqrt(static_cast<double>(n + k));
            ratio[n][k] = r;
        }
    }

    Eigen::MatrixXd w(grid.nx, grid.np);
    std::vector<double> lag(dim);
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.np; ++j) {
            const Complex alpha{0.5 * grid.x(i), 0.5 * grid.p(j)};
            const double y = 4.0 * std::norm(alpha);
            const double gauss = std::exp(-0.5 * y);
            double total = 0.0;
            Complex power{1.0, 0.0};  // (2 conj(alpha))^k
            for (int k = 0; k < dim; ++k) {
                // L_n^{(k)}(y) for n = 0 .. dim-1-k.
                const int count = dim - k;
                lag[0] = 1.0;
                if (count > 1) lag[1] = 1.0 + k - y;
                for (int n = 1; n + 1 < count; ++n) {
                    lag[n + 1] = ((2.0 * n + 1.0 + k - y) * lag[n] - (n + k) * lag[n - 1]) / (n + 1.0);
                }
                Complex sum{};
                for (int n = 0; n < count; ++n) {
                    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
                    sum += rho.entries(n + k, n) * (sign * ratio[n][k] * lag[n]);
                }
                const double term = (sum * power).real();
                total += k == 0 ? term : 2.0 * term;
                power *= 2.0 * std::conj(alpha);
            }
            // W_alpha integrates to one over d^2 alpha = dx dp / 4.
            w(i, j) = (2.0 / std::numbers::pi) * gauss * total / 4.0;
        }
    }
    return w;
}

}  // namespace cvqec
