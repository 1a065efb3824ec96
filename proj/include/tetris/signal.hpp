#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "tetris/error.hpp"

namespace tetris {

using cplx = std::complex<double>;

/// Uniformly sampled series with a sample rate and a start time.
///
/// Construction validates fs > 0, a non-empty sample vector and finite samples,
/// so every live Signal satisfies those invariants.
template <typename T>
class Signal {
public:
    using value_type = T;

    Signal(std::vector<T> samples, double fs, double t0 = 0.0);

    std::span<const T> samples() const noexcept { return samples_; }
    const std::vector<T>& vec() const noexcept { return samples_; }
    const T& operator[](std::size_t i) const { return samples_[i]; }

    std::size_t size() const noexcept { return samples_.size(); }
    double fs() const noexcept { return fs_; }
    double t0() const noexcept { return t0_; }
    double dt() const noexcept { return 1.0 / fs_; }
    double duration() const noexcept { return static_cast<double>(samples_.size()) / fs_; }
    double time(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) / fs_; }

private:
    std::vector<T> samples_;
    double fs_;
    double t0_;
};

using RealSignal = Signal<double>;
using ComplexSignal = Signal<cplx>;

extern template class Signal<double>;
extern template class Signal<cplx>;

ComplexSignal to_complex(const RealSignal& x);
RealSignal real_part(const ComplexSignal& x);
std::vector<double> sample_times(std::size_t n, double fs, double t0 = 0.0);

/// A phase function in cycles together with its derivative in Hz.
///
/// This is a plain record; `validate` enforces strict monotonicity and a
/// positive derivative for callers that require them.
struct PhaseFunction {
    std::vector<double> phase;       // cycles
    std::vector<double> derivative;  // Hz
    double fs = 1.0;
    double t0 = 0.0;

    std::size_t size() const noexcept { return phase.size(); }

    /// Throws InvalidArgument when the phase is not strictly increasing, the
    /// derivative is not strictly positive, or the sizes disagree.
    void validate() const;

    /// Largest |central difference of phase - derivative| over interior samples, in Hz.
    double max_derivative_mismatch() const;

    /// Integrates `derivative` with the trapezoidal rule, starting at `phase0`.
    static PhaseFunction from_derivative(std::vector<double> derivative, double fs,
                                         double t0 = 0.0, double phase0 = 0.0);
};

}  // namespace tetris
