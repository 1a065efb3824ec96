#include "tetris/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tetris {

namespace {

bool finite(double v) { return std::isfinite(v); }
bool finite(const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

}  // namespace

template <typename T>
Signal<T>::Signal(std::vector<T> samples, double fs, double t0)
    : samples_(std::move(samples)), fs_(fs), t0_(t0) {
    if (!(fs_ > 0.0) || !std::isfinite(fs_)) {
        throw InvalidArgument("signal: sample rate must be positive, got " + std::to_string(fs_));
    }
    if (samples_.empty()) {
        throw InvalidArgument("signal: no samples");
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!finite(samples_[i])) {
            throw InvalidArgument("signal: non-finite sample at index " + std::to_string(i));
        }
    }
}

template class Signal<double>;
template class Signal<cplx>;

ComplexSignal to_complex(const RealSignal& x) {
    std::vector<cplx> out(x.samples().begin(), x.samples().end());
    return ComplexSignal(std::move(out), x.fs(), x.t0());
}

RealSignal real_part(const ComplexSignal& x) {
    std::vector<double> out(x.size());
    std::transform(x.samples().begin(), x.samples().end(), out.begin(),
                   [](const cplx& v) { return v.real(); });
    return RealSignal(std::move(out), x.fs(), x.t0());
}

std::vector<double> sample_times(std::size_t n, double fs, double t0) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = t0 + static_cast<double>(i) / fs;
    return t;
}

void PhaseFunction::validate() const {
    if (phase.size() != derivative.size()) {
        throw InvalidArgument("phase function: phase and derivative lengths differ");
    }
    if (phase.empty()) throw InvalidArgument("phase function: empty");
    if (!(fs > 0.0)) throw InvalidArgument("phase function: sample rate must be positive");
    for (std::size_t i = 0; i < derivative.size(); ++i) {
        if (!(derivative[i] > 0.0)) {
            throw InvalidArgument("phase function: derivative not positive at index " +
                                  std::to_string(i));
        }
        if (i + 1 < phase.size() && !(phase[i + 1] > phase[i])) {
            throw InvalidArgument("phase function: phase not strictly increasing at index " +
                                  std::to_string(i));
        }
    }
}

double PhaseFunction::max_derivative_mismatch() const {
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < phase.size(); ++i) {
        const double numeric = (phase[i + 1] - phase[i - 1]) * fs / 2.0;
        worst = std::max(worst, std::abs(numeric - derivative[i]));
    }
    return worst;
}

PhaseFunction PhaseFunction::from_derivative(std::vector<double> derivative, double fs,
                                             double t0, double phase0) {
    PhaseFunction out;
    out.fs = fs;
    out.t0 = t0;
    out.phase.resize(derivative.size());
    if (!derivative.empty()) out.phase[0] = phase0;
    const double half_dt = 0.5 / fs;
    for (std::size_t i = 1; i < derivative.size(); ++i) {
        out.phase[i] = out.phase[i - 1] + half_dt * (derivative[i - 1] + derivative[i]);
    }
    out.derivative = std::move(derivative);
    return out;
}

}  // namespace tetris
