#pragma once

// Four-mode continuous-variable erasure code.
//
// Two signals are each mixed with one half of an EPR pair on a balanced beam
// splitter, producing channels 1-4:
//
//   signal1 + EPR half 1 -> channels (1, 2)
//   signal2 + EPR half 2 -> channels (3, 4)
//
// Decoding undoes the two encoding splitters, giving outputs 1 and 2 and two
// ancilla modes. The ancillas meet on a third balanced splitter; x is read on
// one port and p on the other. For an intact code these are the EPR
// nullifiers (x_e2 - x_e1)/sqrt2 and (p_e1 + p_e2)/sqrt2.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvqec/gaussian.hpp"

namespace cvqec {

constexpr int kNumChannels = 4;
constexpr int kNumPatterns = 16;

struct SqueezerSpec {
    double squeeze_db = 0.0;
    /// Unset means a pure squeezer (antisqueezing equal to squeezing).
    std::optional<double> antisqueeze_db;

    double antisqueeze() const { return antisqueeze_db.value_or(squeeze_db); }
    static SqueezerSpec pure(double db) { return {db, std::nullopt}; }
};

struct CodeParams {
    Complex alpha{3.0, 3.0};
    SqueezerSpec squeezer1;
    SqueezerSpec squeezer2;
    /// Interference visibility of the EPR source; mixes each EPR half with
    /// vacuum of weight 1 - v^2.
    double visibility = 1.0;
    /// Efficiency of the syndrome homodyne detectors.
    double detection_efficiency = 1.0;

    /// Throws std::invalid_argument on unphysical squeezers or out-of-range
    /// visibility / efficiency.
    void validate() const;
};

class ErasurePattern {
public:
    ErasurePattern() = default;
    explicit ErasurePattern(std::array<bool, kNumChannels> blocked) : blocked_(blocked) {}

    /// Bit k set <=> channel k+1 blocked.
    static ErasurePattern from_index(unsigned bits);
    /// `channel` is 1-based.
    static ErasurePattern single(int channel);
    static std::array<ErasurePattern, kNumPatterns> all();

    bool blocked(int channel) const;
    int count() const;
    unsigned index() const;
    /// p_e^k (1 - p_e)^(4 - k) for k blocked channels.
    double probability(double p_erase) const;
    /// e.g. "0100" for channel 2 blocked.
    std::string to_string() const;
    /// 1-based channel of a single erasure, nullopt otherwise.
    std::optional<int> single_channel() const;

    bool operator==(const ErasurePattern&) const = default;

private:
    std::array<bool, kNumChannels> blocked_{};
};

struct Syndrome {
    double x_m = 0.0;
    double p_m = 0.0;
};

struct FeedforwardGain {
    double g = 0.0;

    explicit FeedforwardGain(double gain);
    double amplitude() const;
};

enum class AcceptanceRegion {
    corner_reject,  // discard only when |x_m| > th and |p_m| > th
    box_accept,     // keep only when |x_m| <= th and |p_m| <= th
};

/// Normalization in which a threshold value is quoted.
enum class ThresholdUnits {
    canonical,   // x = (a + a^dagger)/sqrt2, vacuum variance 1/2
    shot_noise,  // x = a + a^dagger, vacuum variance 1 (internal units)
};

struct AcceptanceRule {
    double threshold = 0.8;
    AcceptanceRegion region = AcceptanceRegion::corner_reject;
    ThresholdUnits units = ThresholdUnits::canonical;

    /// Threshold in internal shot-noise units.
    double threshold_snu() const;
    bool accepts(Syndrome s) const;
    void validate() const;
};

/// Midpoint grid over the syndrome plane with cell edges aligned to the
/// acceptance boundary.
struct QuadratureGrid {
    int cells = 201;
    /// 0 selects max(6, ceil(max over patterns of |mean| + 5 sigma)).
    double half_width = 0.0;
};

struct SyndromeDistribution {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();

    double pdf(Syndrome s) const;
};

struct DecodedOutputs {
    /// Outputs 1 and 2 as an affine function of (x_m, p_m) - syndrome.mean.
    AffineConditional outputs;
    SyndromeDistribution syndrome;
    bool degenerate = false;
};

GaussianState make_epr(const CodeParams& params);

/// Returns the encoded state in channel order (1, 2, 3, 4).
GaussianState encode(const GaussianState& signal1, const GaussianState& signal2,
                     const GaussianState& epr);

GaussianState erase(const GaussianState& encoded, ErasurePattern pattern);

DecodedOutputs decode_and_syndrome(const GaussianState& received, double detection_efficiency = 1.0);

/// Full chain for the default inputs |alpha> and |0>.
DecodedOutputs transmit(const CodeParams& params, ErasurePattern pattern);

struct FeedforwardSigns {
    int output = 0;  // 0 or 1
    int sign_x = 1;
    int sign_p = 1;
};

/// Per-channel feedforward target and signs, found once by brute force at
/// 60 dB squeezing and unit gain. `channel` is 1-based.
const FeedforwardSigns& feedforward_signs(int channel);

/// Unconditional two-mode output after displacing by sqrt(G) (x_m, p_m).
/// Patterns with no erasure pass through uncorrected; two or more erasures
/// throw std::invalid_argument.
GaussianState deterministic_correct(const DecodedOutputs& decoded, FeedforwardGain gain,
                                    ErasurePattern pattern);

struct OutputFidelities {
    double output1 = 0.0;  // against |alpha>
    double output2 = 0.0;  // against |0>
};

OutputFidelities deterministic_fidelity(const CodeParams& params, ErasurePattern pattern,
                                        FeedforwardGain gain);

struct SyndromeCell {
    double x;
    double p;
    double area;
};

/// Cells of the grid that lie in the acceptance region. An explicit grid
/// half-width must cover +-5 sigma of every pattern's syndrome.
std::vector<SyndromeCell> accepted_cells(const CodeParams& params, const AcceptanceRule& rule,
                                         const QuadratureGrid& grid);

/// Acceptance statistics of one erasure pattern, not yet weighted by its
/// occurrence probability. Masses are relative to the grid's total mass.
struct PatternAcceptance {
    ErasurePattern pattern;
    double accepted_mass = 0.0;
    /// Sum over accepted cells of mass * <alpha|rho_cell|alpha>.
    double overlap_mass = 0.0;
};

std::vector<PatternAcceptance> pattern_acceptance(const CodeParams& params, const AcceptanceRule& rule,
                                                  const QuadratureGrid& grid, int output = 0);

struct ProbabilisticSummary {
    double fidelity = 0.0;  // 0 when nothing is accepted
    double success_prob = 0.0;
};

ProbabilisticSummary combine_patterns(std::span<const PatternAcceptance> patterns, double p_erase);

struct ProbabilisticResult {
    GaussianMixture accepted;
    double success_prob = 0.0;
};

/// Post-selected single-mode state of `output`: one Gaussian branch per
/// accepted grid cell and erasure pattern.
ProbabilisticResult probabilistic_protocol(const CodeParams& params, double p_erase,
                                           const AcceptanceRule& rule, const QuadratureGrid& grid,
                                           int output = 0);

/// Fidelity of (1 - p_e)|alpha><alpha| + p_e|0><0| with |alpha>.
double single_channel_baseline(Complex alpha, double p_erase);

/// Normalized fidelity of a single-mode mixture with |alpha>.
double mixture_fidelity_to_coherent(const GaussianMixture& mix, Complex alpha);

}  // namespace cvqec
