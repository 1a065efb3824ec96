#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tetris/signal.hpp"
#include "tetris/tf.hpp"

namespace tetris {

enum class WeakRidgePolicy { abort, truncate };

struct TetrisConfig {
    int Q = 5;
    std::vector<double> weights;  // empty means all ones
    double p = 1.0;
    double window_short_L = 10.0;
    double window_long_L = 90.0;
    std::size_t hop = 5;
    std::size_t nfft = 0;          // 0: next power of two >= 8 * window_short_L * fs
    double f_max = 8.0;
    double gamma_rel = 1e-4;
    double ridge_halfband = 0.3;   // Hz around the previous fundamental estimate
    double mode_half_bandwidth = 0.5;
    std::optional<double> smooth_penalty;
    std::optional<double> ref_weight;
    double confidence_floor = 3.0;
    WeakRidgePolicy weak_ridge = WeakRidgePolicy::abort;

    void validate() const;
    std::vector<double> weight_vector() const;
    FreqAxis axis(double fs) const;
};

struct TetrisOutput {
    TetrisConfig config;
    FreqAxis axis;
    TimeAxis time;
    Eigen::MatrixXd T_long;
    Eigen::MatrixXd T_short;
    std::vector<Tfr> long_tfrs;   // S_{long, f_k}, k = 0..effective_Q
    std::vector<Tfr> short_tfrs;  // S_{short, f_k}
    std::vector<ComplexSignal> shifted;  // f_k
    std::vector<PhaseFunction> phases;   // psi_{1,k}, cycles
    std::vector<Ridge> ihr_ridges;       // fundamental ridge on S_{short, f_k}
    int effective_Q = 0;
    bool truncated = false;
};

/// sig(t) exp(-i 2 pi psi(t)).
ComplexSignal shift_down(const ComplexSignal& sig, std::span<const double> psi);
ComplexSignal shift_down(const ComplexSignal& sig, const PhaseFunction& psi);
ComplexSignal shift_down(const RealSignal& sig, const PhaseFunction& psi);

/// Partition of the time-frequency plane into D_j = ((j-1) ihr, j ihr].
class Tessellation {
public:
    Tessellation(std::vector<double> ihr, int d1);

    int d1() const noexcept { return d1_; }
    std::size_t frames() const noexcept { return ihr_.size(); }
    double boundary(int j, std::size_t m) const { return j * ihr_.at(m); }
    /// Region index j in 1..d1, d1 + 1 above the last boundary, 0 for xi <= 0.
    int region_of(std::size_t m, double xi) const;

private:
    std::vector<double> ihr_;
    int d1_;
};

Tessellation tessellate(const Ridge& ihr, int d1);

/// Weighted power mean (sum w_k |S_k|^p / sum w_k)^(1/p), elementwise.
Eigen::MatrixXd ensemble(const std::vector<const Eigen::MatrixXd*>& mags,
                         const std::vector<double>& weights, double p);

/// Step 1 of the reconstruction: successive shift-down by the estimated
/// cardiac phase and ensembling of the short- and long-window SSTs.
/// `ihr_seed` gives the heart-rate reference at every sample.
TetrisOutput build_tetris(const ComplexSignal& sig, std::span<const double> ihr_seed,
                          const TetrisConfig& cfg);
TetrisOutput build_tetris(const RealSignal& sig, std::span<const double> ihr_seed,
                          const TetrisConfig& cfg);

struct DecorrelationOptions {
    double fs = 50.0;
    double f0 = 1.3;
    double L = 10.0;
    int n_realizations = 2000;
    std::uint64_t seed = 1;
    std::vector<double> times = {10.0, 15.0, 20.0, 25.0};
    std::vector<double> freqs = {0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
    bool enforce_precondition = true;
};

struct DecorrelationPoint {
    double t = 0.0;
    double xi = 0.0;
    double cov = 0.0;     // |sample covariance|
    double pcov = 0.0;    // |sample pseudocovariance|
    double var_plain = 0.0;
    double var_shifted = 0.0;
    double bound = 0.0;   // 3 / sqrt(n) * sd_plain * sd_shifted
    bool pass = false;
};

struct DecorrelationReport {
    DecorrelationOptions options;
    double support_halfwidth = 0.0;  // Hz where the window transform exceeds 1e-6 of its peak
    bool precondition_ok = false;
    std::vector<DecorrelationPoint> points;
    double variance_mismatch = 0.0;  // relative, grid-averaged
    bool variances_agree = false;

    bool all_pass() const;
    bool any_fail() const;
};

/// Half-width in Hz of {eta : h_hat(eta) > level * h_hat(0)}.
double window_support_halfwidth(const GaussianWindow& w, double level = 1e-6);

/// Monte Carlo check that the STFT of white Gaussian noise and of the same
/// noise shifted down by f0 are uncorrelated.
DecorrelationReport verify_noise_decorrelation(const DecorrelationOptions& opts);

}  // namespace tetris
