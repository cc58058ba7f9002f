#include "cvqec/erasure_code.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "cvqec/parallel.hpp"

namespace cvqec {

namespace {

constexpr double kHalf = 0.5;
constexpr double kMinHalfWidth = 6.0;
constexpr double kCoverageSigmas = 5.0;

void check_unit_interval(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument(fmt::format("{} = {} outside [0, 1]", what, v));
    }
}

// Output `output` (0 or 1) of the decoded conditional map.
struct OutputMap {
    Eigen::Vector2d base;
    Eigen::Matrix2d gain;
    Eigen::Matrix2d cov;
};

OutputMap output_map(const DecodedOutputs& d, int output) {
    if (output != 0 && output != 1) throw std::out_of_range("output must be 0 or 1");
    const int k = 2 * output;
    return {d.outputs.base_mean.segment<2>(k), d.outputs.gain.block<2, 2>(k, 0),
            d.outputs.cond_cov.block<2, 2>(k, k)};
}

// Cell edges along one syndrome axis, aligned to +-threshold.
std::vector<std::pair<double, double>> axis_cells(int cells, double half_width, double threshold) {
    std::vector<double> breaks{-half_width, half_width};
    if (threshold < half_width) {
        breaks.push_back(-threshold);
        breaks.push_back(threshold);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    std::vector<std::pair<double, double>> out;  // (center, width)
    out.reserve(cells + 3);
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        const double lo = breaks[s];
        const double hi = breaks[s + 1];
        const int n = std::max(1, static_cast<int>(std::lround(cells * (hi - lo) / (2.0 * half_width))));
        const double h = (hi - lo) / n;
        for (int i = 0; i < n; ++i) out.emplace_back(lo + (i + 0.5) * h, h);
    }
    return out;
}

std::array<DecodedOutputs, kNumPatterns> decode_all(const CodeParams& params) {
    std::array<DecodedOutputs, kNumPatterns> out;
    const auto patterns = ErasurePattern::all();
    parallel_for(kNumPatterns, [&](std::size_t i) { out[i] = transmit(params, patterns[i]); });
    return out;
}

double required_half_width(const std::array<DecodedOutputs, kNumPatterns>& decoded) {
    double need = 0.0;
    for (const auto& d : decoded) {
        for (int q = 0; q < 2; ++q) {
            need = std::max(need, std::abs(d.syndrome.mean(q)) +
                                      kCoverageSigmas * std::sqrt(d.syndrome.cov(q, q)));
        }
    }
    return need;
}

double resolve_half_width(const QuadratureGrid& grid, const std::array<DecodedOutputs, kNumPatterns>& decoded) {
    if (grid.cells < 1) throw std::invalid_argument("syndrome grid needs at least one cell");
    const double need = required_half_width(decoded);
    if (grid.half_width <= 0.0) return std::max(kMinHalfWidth, std::ceil(need));
    if (grid.half_width < need) {
        throw std::invalid_argument(fmt::format(
            "syndrome grid half-width {} does not cover +-5 sigma (needs {:.3f})", grid.half_width, need));
    }
    return grid.half_width;
}

struct CellMass {
    SyndromeCell cell;
    double mass;
};

// Accepted cells of one pattern with masses normalized by the grid total.
std::vector<CellMass> accepted_masses(const DecodedOutputs& d, const AcceptanceRule& rule,
                                      const std::vector<std::pair<double, double>>& axis) {
    std::vector<CellMass> out;
    const double det = d.syndrome.cov.determinant();
    if (!(det > 0.0)) throw std::domain_error("singular syndrome distribution");
    const Eigen::Matrix2d inv = d.syndrome.cov.inverse();
    const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));
    double total = 0.0;
    for (const auto& [x, wx] : axis) {
        for (const auto& [p, wp] : axis) {
            const Syndrome s{x, p};
            const Eigen::Vector2d dev = Eigen::Vector2d(x, p) - d.syndrome.mean;
            const double m = norm * std::exp(-0.5 * dev.dot(inv * dev)) * wx * wp;
            total += m;
            if (rule.accepts(s) && m > 0.0) out.push_back({{x, p, wx * wp}, m});
        }
    }
    if (total > 0.0) {
        for (auto& c : out) c.mass /= total;
    }
    return out;
}

}  // namespace

void CodeParams::validate() const {
    for (const auto* sq : {&squeezer1, &squeezer2}) {
        (void)squeezed_vacuum(sq->squeeze_db, sq->antisqueeze());
    }
    check_unit_interval(visibility, "visibility");
    check_unit_interval(detection_efficiency, "detection_efficiency");
}

ErasurePattern ErasurePattern::from_index(unsigned bits) {
    if (bits >= kNumPatterns) throw std::out_of_range(fmt::format("pattern index {} >= 16", bits));
    std::array<bool, kNumChannels> b{};
    for (int k = 0; k < kNumChannels; ++k) b[k] = (bits >> k) & 1u;
    return ErasurePattern(b);
}

ErasurePattern ErasurePattern::single(int channel) {
    if (channel < 1 || channel > kNumChannels) {
        throw std::out_of_range(fmt::format("channel {} outside 1..4", channel));
    }
    return from_index(1u << (channel - 1));
}

std::array<ErasurePattern, kNumPatterns> ErasurePattern::all() {
    std::array<ErasurePattern, kNumPatterns> out;
    for (unsigned i = 0; i < kNumPatterns; ++i) out[i] = from_index(i);
    return out;
}

bool ErasurePattern::blocked(int channel) const {
    if (channel < 1 || channel > kNumChannels) {
        throw std::out_of_range(fmt::format("channel {} outside 1..4", channel));
    }
    return blocked_[channel - 1];
}

int ErasurePattern::count() const { return static_cast<int>(std::count(blocked_.begin(), blocked_.end(), true)); }

unsigned ErasurePattern::index() const {
    unsigned bits = 0;
    for (int k = 0; k < kNumChannels; ++k) bits |= static_cast<unsigned>(blocked_[k]) << k;
    return bits;
}

double ErasurePattern::probability(double p_erase) const {
    check_unit_interval(p_erase, "erasure probability");
    const int k = count();
    return std::pow(p_erase, k) * std::pow(1.0 - p_erase, kNumChannels - k);
}

std::string ErasurePattern::to_string() const {
    std::string s;
    for (bool b : blocked_) s.push_back(b ? '1' : '0');
    return s;
}

std::optional<int> ErasurePattern::single_channel() const {
    if (count() != 1) return std::nullopt;
    return std::countr_zero(index()) + 1;
}

FeedforwardGain::FeedforwardGain(double gain) : g(gain) {
    if (!(gain >= 0.0)) throw std::invalid_argument(fmt::format("feedforward gain {} < 0", gain));
}

double FeedforwardGain::amplitude() const { return std::sqrt(g); }

double AcceptanceRule::threshold_snu() const {
    return units == ThresholdUnits::canonical ? threshold * std::numbers::sqrt2 : threshold;
}

bool AcceptanceRule::accepts(Syndrome s) const {
    const double th = threshold_snu();
    const bool x_out = std::abs(s.x_m) > th;
    const bool p_out = std::abs(s.p_m) > th;
    switch (region) {
        case AcceptanceRegion::corner_reject: return !(x_out && p_out);
        case AcceptanceRegion::box_accept: return !x_out && !p_out;
    }
    return false;
}

void AcceptanceRule::validate() const {
    if (!(threshold >= 0.0)) throw std::invalid_argument(fmt::format("threshold {} < 0", threshold));
}

double SyndromeDistribution::pdf(Syndrome s) const {
    const Eigen::Vector2d d = Eigen::Vector2d(s.x_m, s.p_m) - mean;
    const double det = cov.determinant();
    if (!(det > 0.0)) return 0.0;
    return std::exp(-0.5 * d.dot(cov.inverse() * d)) / (2.0 * std::numbers::pi * std::sqrt(det));
}

GaussianState make_epr(const CodeParams& params) {
    params.validate();
    // Two amplitude-squeezed beams, the second turned by pi/2, on a 50/50 splitter.
    auto s1 = squeezed_vacuum(params.squeezer1.squeeze_db, params.squeezer1.antisqueeze(), 0.0);
    auto s2 = squeezed_vacuum(params.squeezer2.squeeze_db, params.squeezer2.antisqueeze(),
                              std::numbers::pi / 2);
    auto epr = apply(beam_splitter(2, 0, 1, kHalf), tensor({s1, s2}));
    if (params.visibility < 1.0) {
        const double eta = params.visibility * params.visibility;
        epr = loss_channel(loss_channel(epr, 0, eta), 1, eta);
    }
    return epr;
}

GaussianState encode(const GaussianState& signal1, const GaussianState& signal2, const GaussianState& epr) {
    if (signal1.num_modes() != 1 || signal2.num_modes() != 1 || epr.num_modes() != 2) {
        throw std::invalid_argument(fmt::format("encode expects 1+1+2 modes, got {}+{}+{}",
                                                signal1.num_modes(), signal2.num_modes(), epr.num_modes()));
    }
    // (s1, s2, e1, e2) -> (s1, e1, s2, e2)
    const int order[] = {0, 2, 1, 3};
    auto state = tensor({signal1, signal2, epr}).marginal(order);
    const auto encoder = beam_splitter(4, 2, 3, kHalf).after(beam_splitter(4, 0, 1, kHalf));
    return apply(encoder, state);
}

GaussianState erase(const GaussianState& encoded, ErasurePattern pattern) {
    if (encoded.num_modes() != kNumChannels) throw std::invalid_argument("erase expects a 4-mode state");
    GaussianState out = encoded;
    for (int ch = 1; ch <= kNumChannels; ++ch) {
        if (pattern.blocked(ch)) out = replace_with_vacuum(out, ch - 1);
    }
    return out;
}

DecodedOutputs decode_and_syndrome(const GaussianState& received, double detection_efficiency) {
    if (received.num_modes() != kNumChannels) {
        throw std::invalid_argument("decode_and_syndrome expects a 4-mode state");
    }
    check_unit_interval(detection_efficiency, "detection_efficiency");

    // Undo the encoders: modes become (out1, anc1, out2, anc2); then mix the ancillas.
    const auto decoder = beam_splitter(4, 2, 3, kHalf).after(beam_splitter(4, 0, 1, kHalf)).inverse();
    auto state = apply(beam_splitter(4, 1, 3, kHalf).after(decoder), received);
    if (detection_efficiency < 1.0) {
        state = loss_channel(loss_channel(state, 1, detection_efficiency), 3, detection_efficiency);
    }

    // x_m on mode 3, then p_m on mode 1 (index 1 of the remaining three).
    const auto hx = homodyne_condition(state, 3, 0.0);
    const auto& c1 = hx.conditional;
    const auto hp = homodyne_condition(GaussianState(c1.base_mean, c1.cond_cov), 1, std::numbers::pi / 2);
    const auto& c2 = hp.conditional;

    // Shift of the second outcome's mean per unit deviation of the first.
    const double a = c1.gain(3, 0);
    const std::vector<int> kept{0, 1, 4, 5};
    const Eigen::VectorXd k1 = c1.gain.col(0)(kept);

    DecodedOutputs out;
    out.outputs.base_mean = c2.base_mean;
    out.outputs.cond_cov = c2.cond_cov;
    out.outputs.gain.resize(4, 2);
    out.outputs.gain.col(0) = k1 - a * c2.gain.col(0);
    out.outputs.gain.col(1) = c2.gain.col(0);

    out.syndrome.mean = {hx.outcome_mean, hp.outcome_mean};
    out.syndrome.cov << hx.outcome_var, a * hx.outcome_var, a * hx.outcome_var,
        hp.outcome_var + a * a * hx.outcome_var;
    out.degenerate = hx.degenerate || hp.degenerate;
    return out;
}

DecodedOutputs transmit(const CodeParams& params, ErasurePattern pattern) {
    const auto encoded = encode(coherent_state(params.alpha), GaussianState::vacuum(1), make_epr(params));
    return decode_and_syndrome(erase(encoded, pattern), params.detection_efficiency);
}

namespace {

Eigen::MatrixXd feedforward_matrix(const FeedforwardSigns& s, double amplitude) {
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(4, 2);
    f(2 * s.output, 0) = s.sign_x * amplitude;
    f(2 * s.output + 1, 1) = s.sign_p * amplitude;
    return f;
}

GaussianState corrected_state(const DecodedOutputs& d, const Eigen::MatrixXd& feed) {
    // Average of base + K (m - mu) + F m over m ~ N(mu, Sigma).
    const Eigen::MatrixXd net = d.outputs.gain + feed;
    return {d.outputs.base_mean + feed * d.syndrome.mean,
            d.outputs.cond_cov + net * d.syndrome.cov * net.transpose()};
}

OutputFidelities output_fidelities(const GaussianState& corrected, Complex alpha) {
    return {coherent_overlap(corrected.mode(0), alpha), coherent_overlap(corrected.mode(1), 0.0)};
}

std::array<FeedforwardSigns, kNumChannels> compute_sign_table() {
    CodeParams ideal;
    ideal.alpha = {1.5, -0.5};
    ideal.squeezer1 = SqueezerSpec::pure(60.0);
    ideal.squeezer2 = SqueezerSpec::pure(60.0);
    std::array<FeedforwardSigns, kNumChannels> table{};
    for (int ch = 1; ch <= kNumChannels; ++ch) {
        const auto decoded = transmit(ideal, ErasurePattern::single(ch));
        double best = -1.0;
        for (int output : {0, 1}) {
            for (int sx : {1, -1}) {
                for (int sp : {1, -1}) {
                    const FeedforwardSigns cand{output, sx, sp};
                    const auto f = output_fidelities(
                        corrected_state(decoded, feedforward_matrix(cand, std::numbers::sqrt2)), ideal.alpha);
                    const double score = std::min(f.output1, f.output2);
                    if (score > best) {
                        best = score;
                        table[ch - 1] = cand;
                    }
                }
            }
        }
    }
    return table;
}

}  // namespace

const FeedforwardSigns& feedforward_signs(int channel) {
    static const auto table = compute_sign_table();
    if (channel < 1 || channel > kNumChannels) {
        throw std::out_of_range(fmt::format("channel {} outside 1..4", channel));
    }
    return table[channel - 1];
}

GaussianState deterministic_correct(const DecodedOutputs& decoded, FeedforwardGain gain, ErasurePattern pattern) {
    if (pattern.count() >= 2) {
        throw std::invalid_argument(fmt::format(
            "deterministic correction handles at most one erasure (pattern {})", pattern.to_string()));
    }
    Eigen::MatrixXd feed = Eigen::MatrixXd::Zero(4, 2);
    if (auto ch = pattern.single_channel()) feed = feedforward_matrix(feedforward_signs(*ch), gain.amplitude());
    return corrected_state(decoded, feed);
}

OutputFidelities deterministic_fidelity(const CodeParams& params, ErasurePattern pattern, FeedforwardGain gain) {
    return output_fidelities(deterministic_correct(transmit(params, pattern), gain, pattern), params.alpha);
}

std::vector<SyndromeCell> accepted_cells(const CodeParams& params, const AcceptanceRule& rule,
                                         const QuadratureGrid& grid) {
    rule.validate();
    const double half_width = resolve_half_width(grid, decode_all(params));
    const auto axis = axis_cells(grid.cells, half_width, rule.threshold_snu());
    std::vector<SyndromeCell> out;
    for (const auto& [x, wx] : axis) {
        for (const auto& [p, wp] : axis) {
            if (rule.accepts({x, p})) out.push_back({x, p, wx * wp});
        }
    }
    return out;
}

std::vector<PatternAcceptance> pattern_acceptance(const CodeParams& params, const AcceptanceRule& rule,
                                                  const QuadratureGrid& grid, int output) {
    rule.validate();
    const auto decoded = decode_all(params);
    const double half_width = resolve_half_width(grid, decoded);
    const auto axis = axis_cells(grid.cells, half_width, rule.threshold_snu());
    const auto patterns = ErasurePattern::all();

    std::vector<PatternAcceptance> out(kNumPatterns);
    parallel_for(kNumPatterns, [&](std::size_t i) {
        const auto map = output_map(decoded[i], output);
        const Eigen::Matrix2d m = map.cov + Eigen::Matrix2d::Identity();
        const Eigen::Matrix2d m_inv = m.inverse();
        const double prefactor = 2.0 / std::sqrt(m.determinant());
        const Eigen::Vector2d target = coherent_mean(params.alpha);

        PatternAcceptance acc{patterns[i]};
        for (const auto& c : accepted_masses(decoded[i], rule, axis)) {
            const Eigen::Vector2d dev = Eigen::Vector2d(c.cell.x, c.cell.p) - decoded[i].syndrome.mean;
            const Eigen::Vector2d delta = map.base + map.gain * dev - target;
            acc.accepted_mass += c.mass;
            acc.overlap_mass += c.mass * prefactor * std::exp(-0.5 * delta.dot(m_inv * delta));
        }
        out[i] = acc;
    });
    return out;
}

ProbabilisticSummary combine_patterns(std::span<const PatternAcceptance> patterns, double p_erase) {
    double mass = 0.0;
    double overlap = 0.0;
    for (const auto& p : patterns) {
        const double w = p.pattern.probability(p_erase);
        mass += w * p.accepted_mass;
        overlap += w * p.overlap_mass;
    }
    return {mass > 0.0 ? overlap / mass : 0.0, mass};
}

ProbabilisticResult probabilistic_protocol(const CodeParams& params, double p_erase, const AcceptanceRule& rule,
                                           const QuadratureGrid& grid, int output) {
    check_unit_interval(p_erase, "erasure probability");
    rule.validate();
    const auto decoded = decode_all(params);
    const double half_width = resolve_half_width(grid, decoded);
    const auto axis = axis_cells(grid.cells, half_width, rule.threshold_snu());
    const auto patterns = ErasurePattern::all();

    std::vector<GaussianMixture> parts(kNumPatterns);
    parallel_for(kNumPatterns, [&](std::size_t i) {
        const double w = patterns[i].probability(p_erase);
        if (w == 0.0) return;
        const auto map = output_map(decoded[i], output);
        for (const auto& c : accepted_masses(decoded[i], rule, axis)) {
            const Eigen::Vector2d dev = Eigen::Vector2d(c.cell.x, c.cell.p) - decoded[i].syndrome.mean;
            parts[i].add(w * c.mass, GaussianState(map.base + map.gain * dev, map.cov));
        }
    });

    ProbabilisticResult out;
    for (const auto& part : parts) out.accepted.append(part);
    out.success_prob = out.accepted.total_weight();
    return out;
}

double single_channel_baseline(Complex alpha, double p_erase) {
    check_unit_interval(p_erase, "erasure probability");
    return (1.0 - p_erase) + p_erase * std::exp(-std::norm(alpha));
}

double mixture_fidelity_to_coherent(const GaussianMixture& mix, Complex alpha) {
    const double total = mix.total_weight();
    if (!(total > 0.0)) throw std::domain_error("mixture has zero total weight");
    double acc = 0.0;
    for (const auto& b : mix.branches()) acc += b.weight * coherent_overlap(b.state, alpha);
    return acc / total;
}

}  // namespace cvqec
