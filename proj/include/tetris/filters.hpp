#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tetris {

/// One second-order section, normalised so a0 == 1.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;

    std::complex<double> response(std::complex<double> z) const;
    /// Steady-state output for a constant unit input.
    double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

/// Cascade of second-order sections.
class SosFilter {
public:
    SosFilter() = default;
    explicit SosFilter(std::vector<Biquad> sections) : sections_(std::move(sections)) {}

    const std::vector<Biquad>& sections() const noexcept { return sections_; }
    std::size_t order() const noexcept;

    /// Complex frequency response at `f` Hz.
    std::complex<double> response(double f, double fs) const;

    /// Single causal pass with initial states set to the steady state of x[0].
    std::vector<double> filter(std::span<const double> x) const;

    /// Cascades two filters.
    SosFilter then(const SosFilter& other) const;

private:
    std::vector<Biquad> sections_;
    std::size_t order_ = 0;
    friend SosFilter butterworth_lowpass(int, double, double);
    friend SosFilter butterworth_highpass(int, double, double);
};

/// Digital Butterworth designs via the bilinear transform with pre-warping.
SosFilter butterworth_lowpass(int order, double cutoff_hz, double fs);
SosFilter butterworth_highpass(int order, double cutoff_hz, double fs);

/// Order-`order` Butterworth prototype mapped to a band-pass (2 * order poles),
/// unit gain at the geometric centre of the pre-warped band edges.
SosFilter butterworth_bandpass(int order, double lo_hz, double hi_hz, double fs);

/// odd: 2 x[0] - x[i], keeps trends continuous. even: x[i], keeps the local
/// mean of an oscillation.
enum class Padding { odd, even };

/// Zero-phase forward/backward filtering with reflected padding.
/// `padlen` is clamped to x.size() - 1.
std::vector<double> filtfilt(const SosFilter& filter, std::span<const double> x,
                             std::size_t padlen, Padding padding = Padding::odd);

/// Band-limited resampling by windowed-sinc interpolation (Kaiser window).
/// Output covers the same time span at the new rate.
std::vector<double> resample(std::span<const double> x, double fs_in, double fs_out,
                             int half_taps = 32, double kaiser_beta = 8.0);

}  // namespace tetris
