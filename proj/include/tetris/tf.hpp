#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "tetris/signal.hpp"

namespace tetris {

/// Sampled Gaussian window h(u) = c exp(-u^2 / (2 sigma^2)), |u| <= L/2,
/// with sigma = L / (2 * half_support_sigmas) and unit discrete L2 norm.
struct GaussianWindow {
    double span_L = 0.0;
    double sigma = 0.0;
    double half_support_sigmas = 6.0;
    double fs = 0.0;
    double scale = 0.0;           // c
    std::vector<double> taps;     // h(j / fs), j = -J..J
    std::vector<double> dtaps;    // h'(j / fs), analytic derivative, 1/s

    std::size_t half_length() const noexcept { return (taps.size() - 1) / 2; }
    double center_tap() const noexcept { return taps[half_length()]; }
    /// Continuous Fourier transform of the untruncated window.
    double ft(double eta) const;
};

GaussianWindow gaussian_window(double L, double fs, double half_support_sigmas = 6.0);

/// Uniform positive frequency grid f_k = f_lo + k df, k = 0..n-1.
struct FreqAxis {
    double f_lo = 0.0;
    double df = 0.0;
    std::size_t n = 0;

    double freq(std::size_t k) const noexcept { return f_lo + df * static_cast<double>(k); }
    double f_hi() const noexcept { return freq(n - 1); }
    std::size_t nearest(double f) const noexcept;
    std::vector<double> values() const;
    void validate(double fs) const;

    /// FFT bins k fs / nfft lying in (0, f_max].
    static FreqAxis fft_grid(double fs, std::size_t nfft, double f_max);
    /// Bins of resolution df covering [f_lo, f_hi].
    static FreqAxis uniform(double f_lo, double f_hi, double df);
};

/// Frame m sits at sample m * hop.
struct TimeAxis {
    double t0 = 0.0;
    double fs = 1.0;
    std::size_t hop = 1;
    std::size_t n = 0;

    double time(std::size_t m) const noexcept {
        return t0 + static_cast<double>(m * hop) / fs;
    }
    std::size_t sample(std::size_t m) const noexcept { return m * hop; }
    std::vector<double> values() const;
    static TimeAxis frames(std::size_t n_samples, double fs, double t0, std::size_t hop);
};

enum class TfrKind : std::uint8_t { stft = 0, sst = 1, ensemble = 2 };

std::string to_string(TfrKind kind);

struct Tfr {
    Eigen::MatrixXcd values;  // rows: frequency, columns: time
    FreqAxis freq;
    TimeAxis time;
    double window_L = 0.0;
    double fs = 0.0;
    TfrKind kind = TfrKind::stft;
    double threshold = 0.0;   // SST only

    Eigen::MatrixXd magnitude() const { return values.cwiseAbs(); }
};

/// V[k, m] = dt * sum_x s(x) h(x - t_m) exp(-i 2 pi f_k (x - t_m)).
/// Windows are truncated at the signal edges and rescaled per frame so their
/// sum is preserved. Uses an FFT whenever the axis lies on a grid fs / N.
Tfr stft(const ComplexSignal& sig, const GaussianWindow& w, const FreqAxis& axis,
         std::size_t hop = 1);
Tfr stft(const RealSignal& sig, const GaussianWindow& w, const FreqAxis& axis,
         std::size_t hop = 1);

/// Direct evaluation of one STFT coefficient, used as an independent route.
cplx stft_direct(std::span<const cplx> x, double fs, const GaussianWindow& w, std::size_t center,
                 double freq, bool derivative_window = false);

struct SstOptions {
    std::size_t hop = 1;
    std::optional<double> gamma;  // absolute threshold on |V|
    double gamma_rel = 1e-4;      // times the median frame maximum of |V|
};

/// Synchrosqueezed STFT: each coefficient with |V| > gamma moves to the bin
/// nearest omega = f - Im(V_h' / V_h) / (2 pi); reassignments off the axis are
/// dropped.
Tfr sst(const ComplexSignal& sig, const GaussianWindow& w, const FreqAxis& axis,
        const SstOptions& opts = {});
Tfr sst(const RealSignal& sig, const GaussianWindow& w, const FreqAxis& axis,
        const SstOptions& opts = {});

struct Ridge {
    std::vector<double> freqs;  // Hz, one per frame
    std::vector<int> bins;
    double lo = 0.0;
    double hi = 0.0;
    double score = 0.0;
    double confidence = 0.0;  // median on-ridge / median in-band off-ridge magnitude
};

struct RidgeOptions {
    std::optional<double> smooth_penalty;  // lambda per squared bin jump
    std::vector<double> reference;         // Hz per frame, empty for none
    std::optional<double> ref_weight;      // mu per squared bin offset
    double floor = 1e-12;
};

/// Default lambda: a jump of 0.1 Hz between frames costs log(10).
double default_smooth_penalty(double df);
/// Default mu with a reference: an offset of 0.2 Hz costs log(10).
double default_ref_weight(double df);

/// Exact dynamic-programming maximiser of
///   sum_m log(mag[c_m, m] + floor) - lambda sum (c_{m+1} - c_m)^2 - mu sum (c_m - ref_m)^2
/// over curves confined to [lo, hi].
Ridge extract_ridge(const Eigen::MatrixXd& mag, const FreqAxis& axis, double lo, double hi,
                    const RidgeOptions& opts = {});

/// As above with a per-frame band.
Ridge extract_ridge(const Eigen::MatrixXd& mag, const FreqAxis& axis, const std::vector<double>& lo,
                    const std::vector<double>& hi, const RidgeOptions& opts = {});

/// Objective value of a given bin curve (shared by the DP and brute-force checks).
double ridge_objective(const Eigen::MatrixXd& mag, const std::vector<int>& bins, double lambda,
                       const std::vector<double>& ref_bins, double mu, double floor = 1e-12);

struct Mode {
    std::vector<cplx> values;  // per frame
    std::vector<double> am;
    std::vector<double> phase;  // cycles, unwrapped
    TimeAxis time;
    double half_bandwidth = 0.0;
    bool clamped = false;

    /// Frame values interpolated to every sample (spline on AM and phase).
    std::vector<double> am_samples(std::size_t n) const;
    std::vector<double> phase_samples(std::size_t n) const;
};

/// Normalisation making a unit cosine reconstruct with amplitude 1.
double mode_normalization(const GaussianWindow& w, const FreqAxis& axis, double half_bandwidth);

/// mode(t) = sum_{|f - ridge(t)| <= nu} S[f, t] df / C_w.
Mode reconstruct_mode(const Tfr& sst, const Ridge& ridge, double half_bandwidth);

/// Unwraps arg(values) in cycles using the ridge frequency to predict each
/// step; frames with |value| below 1e-3 of the median are bridged.
std::vector<double> unwrap_phase(const std::vector<cplx>& values, const std::vector<double>& freqs,
                                 const TimeAxis& time);

}  // namespace tetris
