#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tetris/signal.hpp"

namespace tetris {

/// Parameterisation of a generalised adaptive non-harmonic signal
///
///   Y = R_0 + sum_{l=1}^{d1} A_{1,l} cos(2 pi l phi_1 + beta_{1,l}) + T_0
///   A_{1,l} = T_l + sum_k a_{l,k} cos(2 pi k phi_0 + beta_{a,k})
///   phi_1   = phi + b / (2 pi phi_0') sin(2 pi phi_0)
///   R_0     = A_0 sum_k alpha_{0,k} cos(2 pi k phi_0 + beta_{0,k})
///
/// All time-varying quantities are stored pre-sampled on the signal grid.
struct GanhmSpec {
    int d0 = 2;
    int d1 = 10;
    PhaseFunction phi;   // cardiac base phase
    PhaseFunction phi0;  // respiratory phase

    std::vector<std::vector<double>> trend;  // T_l, l = 0..d1

    std::vector<double> riiv_alpha;  // alpha_{0,k}, k = 1..d0
    std::vector<double> riiv_beta;   // beta_{0,k}
    std::vector<double> riiv_am;     // A_0(t)

    std::vector<std::vector<std::vector<double>>> riav_a;  // a_{l,k}(t) as [l-1][k-1][t]
    std::vector<double> riav_beta;                         // beta_{a,k}, k = 1..d0

    /// beta_{1,l}, l = 0..d1. Entry 0 is kept for indexing and does not
    /// enter the synthesis (the l = 0 term is T_0 + R_0).
    std::vector<double> cardiac_phases;

    std::vector<double> fm_depth;  // b(t)
    double separation = 0.0;       // Delta in phi_1' - d0 phi_0' > Delta

    std::size_t size() const noexcept { return phi.size(); }
    double fs() const noexcept { return phi.fs; }
    double t0() const noexcept { return phi.t0; }

    /// Structural checks (sizes, ranges). Throws InvalidArgument.
    void validate_structure() const;
    /// Structural checks plus the model conditions on rates and amplitudes.
    /// Throws ModelViolation naming the first offending sample.
    void validate() const;

    double fm_bound() const;                      // max b(t)
    std::vector<double> cardiac_phase() const;    // phi_1(t), cycles
    std::vector<double> cardiac_rate() const;     // phi_1'(t), Hz
    std::vector<double> harmonic_am(int l) const; // A_{1,l}(t)
    std::vector<double> riav(int l) const;        // A_{1,l}(t) - T_l(t)
    std::vector<double> riiv() const;             // R_0(t)

    /// Blank spec with constant-zero modulation on an n-sample grid.
    static GanhmSpec zeros(int d0, int d1, const PhaseFunction& phi, const PhaseFunction& phi0);
};

RealSignal synthesize_ganhm(const GanhmSpec& spec, std::size_t n);

struct ExpansionComponent {
    int l = 0;
    int k = 0;
    std::vector<double> amplitude;  // a~_{l,k}(t) >= 0
    std::vector<double> phase;      // gamma_{l,k}(t), radians
    RealSignal signal;              // a~ cos(2 pi (l phi + k phi_0) + gamma)
};

/// Second-order harmonic expansion of a gANHM signal into components at the
/// instantaneous frequencies l phi' + k phi_0', l = 0..d1, k = -4..4.
/// Only d0 <= 2 is supported.
std::vector<ExpansionComponent> expand_ganhm(const GanhmSpec& spec, std::size_t n);

/// Sum of all expansion components.
std::vector<double> expansion_sum(const std::vector<ExpansionComponent>& components);

struct LocalizedNoiseSpec {
    double center_time = 0.0;  // s
    double time_spread = 1.0;  // s
    double center_freq = 1.0;  // Hz
    double bandwidth = 0.5;    // Hz
    double amplitude = 1.0;    // RMS at the envelope peak
    std::uint64_t seed = 0;

    void validate() const;
};

RealSignal gen_localized_noise(const LocalizedNoiseSpec& spec, std::size_t n, double fs);

/// Phase whose derivative wanders slowly around `mean_freq`: a uniform random
/// walk smoothed twice by a moving average of `smooth_span` seconds, centred
/// and scaled to peak deviation `wander_depth`.
PhaseFunction slow_phase(double mean_freq, double wander_depth, double smooth_span, std::size_t n,
                         double fs, std::uint64_t seed);

struct Preset {
    std::string name;
    GanhmSpec spec;
    std::vector<LocalizedNoiseSpec> noise;
};

struct PresetOptions {
    double duration = 120.0;  // s
    double fs = 50.0;
    std::uint64_t seed = 1;
    double noise_scale = 1.0;
    double fm_depth = -1.0;  // overrides the preset's b when >= 0
};

/// Names accepted by make_preset.
std::vector<std::string> preset_names();

/// "semireal-a": RIAV only; "semireal-b": RIAV and RIFV.
Preset make_preset(const std::string& name, const PresetOptions& opts = {});

/// Clean gANHM trace plus its localized noise.
RealSignal render_preset(const Preset& preset);

}  // namespace tetris
