#pragma once

#include <string>
#include <vector>

#include "tetris/samd.hpp"
#include "tetris/signal.hpp"
#include "tetris/tetris.hpp"
#include "tetris/tf.hpp"

namespace tetris {

struct PipelineConfig {
    double fs_target = 50.0;
    double hp_cutoff = 0.1;
    int hp_order = 4;
    double irr_lo = 0.1;
    double irr_hi = 0.5;
    double baseline_lo = 0.1;
    double baseline_hi = 1.0;
    double irr_ref_halfband = 0.08;    // Hz around the IRR estimate for the per-l ridges
    double resp_half_bandwidth = 0.1;  // reconstruction band on the long window
    double min_duration = 60.0;
    double peak_window = 2.0;          // s, rolling statistics for peak detection
    double peak_std_factor = 0.5;
    double min_peak_separation = 0.33; // s
    double min_irr_strength = 1e-2;    // on-ridge median relative to the median frame maximum
    TetrisConfig tetris = default_tetris();
    SamdConfig samd;

    void validate() const;
    static TetrisConfig default_tetris();
};

struct HarmonicRespiration {
    int l = 0;
    Ridge ridge;                   // on S_{long, f_l}
    std::vector<double> am;        // a~_{R,l}
    std::vector<double> phase;     // phi~_{R,l}, cycles
    RealSignal input;              // series handed to SAMD
    SamdResult samd;
    RealSignal surrogate;          // R~_l
};

struct RespiratoryOutputs {
    RealSignal preprocessed;
    std::vector<double> peaks;     // s
    std::vector<double> ihr_seed;  // Hz per sample, from the cycle spline
    std::vector<double> ihr;       // Hz per sample, derivative of psi_{1,0}
    Ridge irr_ridge;
    std::vector<double> irr;       // Hz per sample
    double irr_strength = 0.0;
    std::vector<HarmonicRespiration> harmonics;  // l = 0..effective Q
    RealSignal triiv;
    RealSignal triav;
    TetrisOutput tetris;
    bool low_confidence = false;
    std::vector<std::string> notes;
};

RealSignal preprocess(const RealSignal& raw, const PipelineConfig& cfg);

struct PeakOptions {
    double window = 2.0;
    double std_factor = 0.5;
    double min_separation = 0.33;
};

struct Extrema {
    std::vector<double> times;   // s, parabolic refinement
    std::vector<double> values;  // refined heights
};

/// Local maxima above rolling mean + std_factor * rolling std, thinned to the
/// minimum separation (tallest first). Throws StageError below 10 peaks.
Extrema detect_peaks(const RealSignal& sig, const PeakOptions& opts = {});
std::vector<double> detect_cycles(const RealSignal& sig, const PeakOptions& opts = {});

/// Natural spline through (t_k, 1 / (t_k - t_{k-1})), clamped to the observed
/// rate range, constant outside the knots, evaluated on `grid`.
std::vector<double> ihr_from_cycles(const std::vector<double>& peaks, const std::vector<double>& grid);

RealSignal traditional_riiv(const RealSignal& sig, const PipelineConfig& cfg = {});
RealSignal traditional_riav(const RealSignal& sig, const PipelineConfig& cfg = {});

/// Steps 0-2: preprocessing, cycle detection, TETRIS, IRR ridge, per-harmonic
/// reconstruction and SAMD, plus the envelope baselines.
RespiratoryOutputs extract_respiration(const RealSignal& raw, const PipelineConfig& cfg = {});

}  // namespace tetris
