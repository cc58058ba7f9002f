#include "cvqec/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace cvqec {

namespace {

void check_mode(int num_modes, int mode, const char* what) {
    if (mode < 0 || mode >= num_modes) {
        throw std::out_of_range(
            fmt::format("{}: mode {} out of range for {}-mode state", what, mode, num_modes));
    }
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

GaussianState::GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
    const auto n = mean_.size();
    if (n == 0 || n % 2 != 0) {
        throw std::invalid_argument(fmt::format("mean vector length {} is not 2N", n));
    }
    if (cov_.rows() != n || cov_.cols() != n) {
        throw std::invalid_argument(fmt::format("covariance is {}x{}, expected {}x{}",
                                                cov_.rows(), cov_.cols(), n, n));
    }
    const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
    const double asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= 1e-12 * scale)) {
        throw std::invalid_argument(fmt::format("covariance not symmetric (residual {:g})", asym));
    }
    cov_ = symmetrized(cov_);
}

GaussianState GaussianState::vacuum(int num_modes) {
    if (num_modes <= 0) throw std::invalid_argument("vacuum needs at least one mode");
    return {Eigen::VectorXd::Zero(2 * num_modes), Eigen::MatrixXd::Identity(2 * num_modes, 2 * num_modes)};
}

GaussianState GaussianState::marginal(std::span<const int> modes) const {
    std::vector<int> idx;
    idx.reserve(2 * modes.size());
    for (int m : modes) {
        check_mode(num_modes(), m, "marginal");
        idx.push_back(2 * m);
        idx.push_back(2 * m + 1);
    }
    return {mean_(idx), cov_(idx, idx)};
}

GaussianState GaussianState::mode(int k) const {
    const int modes[] = {k};
    return marginal(modes);
}

bool GaussianState::is_physical(double tol) const {
    return symplectic_eigenvalues(cov_).minCoeff() >= 1.0 - tol;
}

SymplecticTransform SymplecticTransform::identity(int num_modes) {
    return {Eigen::MatrixXd::Identity(2 * num_modes, 2 * num_modes),
            Eigen::VectorXd::Zero(2 * num_modes)};
}

SymplecticTransform SymplecticTransform::displace(const Eigen::VectorXd& d) {
    return {Eigen::MatrixXd::Identity(d.size(), d.size()), d};
}

SymplecticTransform SymplecticTransform::after(const SymplecticTransform& first) const {
    if (matrix.cols() != first.matrix.rows()) {
        throw std::invalid_argument("cannot compose transforms of different dimension");
    }
    return {matrix * first.matrix, matrix * first.displacement + displacement};
}

SymplecticTransform SymplecticTransform::inverse() const {
    // S^-1 = -Omega S^T Omega for symplectic S.
    const Eigen::MatrixXd omega = symplectic_form(num_modes());
    Eigen::MatrixXd inv = -omega * matrix.transpose() * omega;
    return {inv, -inv * displacement};
}

Eigen::MatrixXd symplectic_form(int num_modes) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * num_modes, 2 * num_modes);
    for (int k = 0; k < num_modes; ++k) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    return omega;
}

Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& cov) {
    const int n = static_cast<int>(cov.rows() / 2);
    // nu^2 are the (doubly degenerate) eigenvalues of -(V^1/2 Omega V^1/2)^2.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(cov));
    const Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXd root = es.eigenvectors() * lambda.cwiseSqrt().asDiagonal() *
                                 es.eigenvectors().transpose();
    const Eigen::MatrixXd k = root * symplectic_form(n) * root;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ks(symmetrized(-k * k), Eigen::EigenvaluesOnly);
    Eigen::VectorXd nu(n);
    for (int i = 0; i < n; ++i) {
        const double a = std::max(ks.eigenvalues()(2 * i), 0.0);
        const double b = std::max(ks.eigenvalues()(2 * i + 1), 0.0);
        nu(i) = std::sqrt(0.5 * (a + b));
    }
    return nu;
}

double symplectic_residual(const Eigen::MatrixXd& s) {
    const Eigen::MatrixXd omega = symplectic_form(static_cast<int>(s.rows() / 2));
    return (s * omega * s.transpose() - omega).cwiseAbs().maxCoeff();
}

Eigen::Vector2d coherent_mean(Complex alpha) { return {2.0 * alpha.real(), 2.0 * alpha.imag()}; }

Eigen::Matrix2d rotation(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
}

GaussianState coherent_state(Complex alpha) {
    return {coherent_mean(alpha), Eigen::Matrix2d::Identity()};
}

GaussianState squeezed_vacuum(double squeeze_db, double antisqueeze_db, double angle) {
    const double v_sq = std::pow(10.0, -squeeze_db / 10.0);
    const double v_anti = std::pow(10.0, antisqueeze_db / 10.0);
    if (v_sq * v_anti < 1.0 - 1e-12) {
        throw std::invalid_argument(fmt::format(
            "unphysical squeezer: {} dB squeezing with {} dB antisqueezing", squeeze_db, antisqueeze_db));
    }
    const Eigen::Matrix2d r = rotation(angle);
    const Eigen::Matrix2d cov = r * Eigen::Vector2d(v_sq, v_anti).asDiagonal() * r.transpose();
    return {Eigen::Vector2d::Zero(), cov};
}

GaussianState tensor(std::span<const GaussianState> states) {
    if (states.empty()) throw std::invalid_argument("tensor of zero states");
    Eigen::Index dim = 0;
    for (const auto& s : states) dim += s.mean().size();
    Eigen::VectorXd mean(dim);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::Index off = 0;
    for (const auto& s : states) {
        const auto d = s.mean().size();
        mean.segment(off, d) = s.mean();
        cov.block(off, off, d, d) = s.cov();
        off += d;
    }
    return {mean, cov};
}

GaussianState tensor(std::initializer_list<GaussianState> states) {
    return tensor(std::span<const GaussianState>(states.begin(), states.size()));
}

SymplecticTransform beam_splitter(int num_modes, int i, int j, double transmittance, double phase) {
    check_mode(num_modes, i, "beam_splitter");
    check_mode(num_modes, j, "beam_splitter");
    if (i == j) throw std::invalid_argument("beam_splitter needs two distinct modes");
    if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
        throw std::invalid_argument(fmt::format("transmittance {} outside [0, 1]", transmittance));
    }
    const double t = std::sqrt(transmittance);
    const double r = std::sqrt(1.0 - transmittance);
    auto out = SymplecticTransform::identity(num_modes);
    auto& s = out.matrix;
    s.block<2, 2>(2 * i, 2 * i) = t * Eigen::Matrix2d::Identity();
    s.block<2, 2>(2 * i, 2 * j) = r * rotation(phase);
    s.block<2, 2>(2 * j, 2 * i) = -r * rotation(-phase);
    s.block<2, 2>(2 * j, 2 * j) = t * Eigen::Matrix2d::Identity();
    return out;
}

SymplecticTransform phase_shift(int num_modes, int k, double angle) {
    check_mode(num_modes, k, "phase_shift");
    auto out = SymplecticTransform::identity(num_modes);
    out.matrix.block<2, 2>(2 * k, 2 * k) = rotation(angle);
    return out;
}

SymplecticTransform single_mode_squeezer(int num_modes, int k, double r, double angle) {
    check_mode(num_modes, k, "single_mode_squeezer");
    auto out = SymplecticTransform::identity(num_modes);
    const Eigen::Matrix2d rot = rotation(angle);
    out.matrix.block<2, 2>(2 * k, 2 * k) =
        rot * Eigen::Vector2d(std::exp(-r), std::exp(r)).asDiagonal() * rot.transpose();
    return out;
}

GaussianState apply(const SymplecticTransform& t, const GaussianState& s) {
    if (t.matrix.rows() != s.mean().size() || t.matrix.cols() != s.mean().size() ||
        t.displacement.size() != s.mean().size()) {
        throw std::invalid_argument(fmt::format("transform of dimension {} applied to {}-mode state",
                                                t.matrix.rows(), s.num_modes()));
    }
    return {t.matrix * s.mean() + t.displacement,
            symmetrized(t.matrix * s.cov() * t.matrix.transpose())};
}

GaussianState replace_with_vacuum(const GaussianState& s, int mode) {
    return loss_channel(s, mode, 0.0);
}

GaussianState loss_channel(const GaussianState& s, int mode, double eta) {
    check_mode(s.num_modes(), mode, "loss_channel");
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw std::invalid_argument(fmt::format("transmissivity {} outside [0, 1]", eta));
    }
    const double g = std::sqrt(eta);
    Eigen::VectorXd mean = s.mean();
    Eigen::MatrixXd cov = s.cov();
    const int k = 2 * mode;
    mean.segment<2>(k) *= g;
    cov.middleRows(k, 2) *= g;
    cov.middleCols(k, 2) *= g;
    cov.block<2, 2>(k, k) += (1.0 - eta) * Eigen::Matrix2d::Identity();
    return {mean, cov};
}

GaussianState AffineConditional::state_at(const Eigen::VectorXd& deviation) const {
    return {base_mean + gain * deviation, cond_cov};
}

HomodyneOutcome homodyne_condition(const GaussianState& s, int mode, double angle) {
    const int n = s.num_modes();
    if (n < 2) throw std::invalid_argument("homodyne_condition needs at least two modes");
    check_mode(n, mode, "homodyne_condition");

    std::vector<int> rest;
    for (int k = 0; k < 2 * n; ++k) {
        if (k / 2 != mode) rest.push_back(k);
    }
    const Eigen::Vector2d dir(std::cos(angle), std::sin(angle));
    const int m = 2 * mode;

    HomodyneOutcome out;
    out.outcome_mean = dir.dot(s.mean().segment<2>(m));
    out.outcome_var = dir.dot(s.cov().block<2, 2>(m, m) * dir);

    const Eigen::MatrixXd cross = s.cov()(rest, Eigen::seqN(m, 2));
    const Eigen::VectorXd cov_with_outcome = cross * dir;

    double inv_var = 0.0;
    if (out.outcome_var < 1e-12) {
        out.degenerate = true;  // pseudoinverse of a vanishing scalar
    } else {
        inv_var = 1.0 / out.outcome_var;
    }
    auto& c = out.conditional;
    c.base_mean = s.mean()(rest);
    c.gain = cov_with_outcome * inv_var;
    c.cond_cov = symmetrized(s.cov()(rest, rest) - cov_with_outcome * inv_var * cov_with_outcome.transpose());
    return out;
}

double coherent_overlap(const GaussianState& s, Complex alpha) {
    if (s.num_modes() != 1) throw std::invalid_argument("coherent_overlap needs a single-mode state");
    const Eigen::Vector2d delta = s.mean() - coherent_mean(alpha);
    const Eigen::Matrix2d m = s.cov() + Eigen::Matrix2d::Identity();
    return 2.0 / std::sqrt(m.determinant()) * std::exp(-0.5 * delta.dot(m.inverse() * delta));
}

GaussianMixture::GaussianMixture(std::vector<MixtureBranch> branches) {
    for (auto& b : branches) add(b.weight, std::move(b.state));
}

void GaussianMixture::add(double weight, GaussianState state) {
    if (!(weight >= 0.0)) throw std::invalid_argument("mixture weight must be non-negative");
    if (!branches_.empty() && state.num_modes() != num_modes()) {
        throw std::invalid_argument("mixture branches must have equal mode counts");
    }
    branches_.push_back({weight, std::move(state)});
}

void GaussianMixture::append(const GaussianMixture& other, double scale) {
    for (const auto& b : other.branches_) add(scale * b.weight, b.state);
}

double GaussianMixture::total_weight() const {
    return std::accumulate(branches_.begin(), branches_.end(), 0.0,
                           [](double acc, const MixtureBranch& b) { return acc + b.weight; });
}

int GaussianMixture::num_modes() const { return branches_.empty() ? 0 : branches_.front().state.num_modes(); }

}  // namespace cvqec
