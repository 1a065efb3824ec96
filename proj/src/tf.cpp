#include "tetris/tf.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "tetris/log.hpp"
#include "tetris/spline.hpp"

namespace tetris {

namespace {

using std::numbers::pi;
constexpr double two_pi = 2.0 * pi;

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (v.size() % 2 == 0) m = (m + *std::max_element(v.begin(), mid)) / 2.0;
    return m;
}

// Computes the window and derivative-window STFT columns for one frame.
class FrameEngine {
public:
    FrameEngine(const GaussianWindow& w, const FreqAxis& axis) : w_(w), axis_(axis) {
        const double ratio = w.fs / axis.df;
        const double rounded = std::round(ratio);
        const double k0 = axis.f_lo / axis.df;
        if (std::abs(ratio - rounded) < 1e-9 * ratio && std::abs(k0 - std::round(k0)) < 1e-9 * std::max(1.0, k0) &&
            rounded >= 2.0 && rounded < 1 << 24) {
            nfft_ = static_cast<std::size_t>(rounded);
            k0_ = static_cast<std::size_t>(std::llround(k0));
            if (k0_ + axis.n <= nfft_) {
                in_ = fftw_alloc_complex(nfft_);
                out_ = fftw_alloc_complex(nfft_);
                plan_ = fftw_plan_dft_1d(static_cast<int>(nfft_), in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
            }
        }
        if (!plan_) {
            twiddle_.resize(axis.n * w.taps.size());
            const std::ptrdiff_t J = static_cast<std::ptrdiff_t>(w.half_length());
            for (std::size_t k = 0; k < axis.n; ++k) {
                for (std::ptrdiff_t j = -J; j <= J; ++j) {
                    twiddle_[k * w.taps.size() + static_cast<std::size_t>(j + J)] =
                        std::polar(1.0, -two_pi * axis.freq(k) * static_cast<double>(j) / w.fs);
                }
            }
        }
    }
    ~FrameEngine() {
        if (plan_) fftw_destroy_plan(plan_);
        if (in_) fftw_free(in_);
        if (out_) fftw_free(out_);
    }
    FrameEngine(const FrameEngine&) = delete;
    FrameEngine& operator=(const FrameEngine&) = delete;

    bool uses_fft() const { return plan_ != nullptr; }

    // Fills v (and dv when non-null) with the columns for the frame centred on sample c.
    void compute(std::span<const cplx> x, std::size_t c, cplx* v, cplx* dv) {
        const auto n = static_cast<std::ptrdiff_t>(x.size());
        const auto J = static_cast<std::ptrdiff_t>(w_.half_length());
        const auto ci = static_cast<std::ptrdiff_t>(c);
        const std::ptrdiff_t jlo = std::max(-J, -ci);
        const std::ptrdiff_t jhi = std::min(J, n - 1 - ci);
        double inside = 0.0, total = 0.0;
        for (std::ptrdiff_t j = -J; j <= J; ++j) {
            const double h = w_.taps[static_cast<std::size_t>(j + J)];
            total += h;
            if (j >= jlo && j <= jhi) inside += h;
        }
        const double gain = (inside > 0.0 ? total / inside : 0.0) / w_.fs;

        for (int pass = 0; pass < (dv ? 2 : 1); ++pass) {
            const auto& taps = pass == 0 ? w_.taps : w_.dtaps;
            cplx* dst = pass == 0 ? v : dv;
            if (plan_) {
                std::fill(reinterpret_cast<cplx*>(in_), reinterpret_cast<cplx*>(in_) + nfft_, cplx{});
                auto* buf = reinterpret_cast<cplx*>(in_);
                const auto N = static_cast<std::ptrdiff_t>(nfft_);
                for (std::ptrdiff_t j = jlo; j <= jhi; ++j) {
                    const auto idx = static_cast<std::size_t>(((j % N) + N) % N);
                    buf[idx] += x[static_cast<std::size_t>(ci + j)] * taps[static_cast<std::size_t>(j + J)];
                }
                fftw_execute(plan_);
                const auto* res = reinterpret_cast<const cplx*>(out_);
                for (std::size_t k = 0; k < axis_.n; ++k) dst[k] = res[k0_ + k] * gain;
            } else {
                const std::size_t width = w_.taps.size();
                for (std::size_t k = 0; k < axis_.n; ++k) {
                    cplx acc{};
                    const cplx* tw = &twiddle_[k * width];
                    for (std::ptrdiff_t j = jlo; j <= jhi; ++j) {
                        acc += x[static_cast<std::size_t>(ci + j)] * taps[static_cast<std::size_t>(j + J)] *
                               tw[static_cast<std::size_t>(j + J)];
                    }
                    dst[k] = acc * gain;
                }
            }
        }
    }

private:
    const GaussianWindow& w_;
    const FreqAxis& axis_;
    std::size_t nfft_ = 0;
    std::size_t k0_ = 0;
    fftw_complex* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan plan_ = nullptr;
    std::vector<cplx> twiddle_;
};

void check_hop(std::size_t hop) {
    if (hop == 0) throw InvalidArgument("tfr: hop must be >= 1");
}

}  // namespace

double GaussianWindow::ft(double eta) const {
    return scale * sigma * std::sqrt(two_pi) * std::exp(-2.0 * pi * pi * sigma * sigma * eta * eta);
}

GaussianWindow gaussian_window(double L, double fs, double half_support_sigmas) {
    if (!(L > 0.0)) throw InvalidArgument("window: span L must be positive");
    if (!(fs > 0.0)) throw InvalidArgument("window: sample rate must be positive");
    if (!(half_support_sigmas > 0.0)) throw InvalidArgument("window: half support must be positive");
    if (L * fs < 8.0) throw InvalidArgument("window: L * fs must be at least 8 taps");

    GaussianWindow w;
    w.span_L = L;
    w.fs = fs;
    w.half_support_sigmas = half_support_sigmas;
    w.sigma = L / (2.0 * half_support_sigmas);
    const auto J = static_cast<std::ptrdiff_t>(std::floor(L * fs / 2.0 + 1e-9));
    w.taps.resize(static_cast<std::size_t>(2 * J + 1));
    w.dtaps.resize(w.taps.size());
    double energy = 0.0;
    for (std::ptrdiff_t j = -J; j <= J; ++j) {
        const double u = static_cast<double>(j) / fs;
        const double g = std::exp(-u * u / (2.0 * w.sigma * w.sigma));
        w.taps[static_cast<std::size_t>(j + J)] = g;
        energy += g * g;
    }
    w.scale = 1.0 / std::sqrt(energy);
    for (std::ptrdiff_t j = -J; j <= J; ++j) {
        const double u = static_cast<double>(j) / fs;
        auto& h = w.taps[static_cast<std::size_t>(j + J)];
        h *= w.scale;
        w.dtaps[static_cast<std::size_t>(j + J)] = -u / (w.sigma * w.sigma) * h;
    }
    return w;
}

std::size_t FreqAxis::nearest(double f) const noexcept {
    const double k = std::round((f - f_lo) / df);
    if (!(k > 0.0)) return 0;
    return std::min(n - 1, static_cast<std::size_t>(k));
}

std::vector<double> FreqAxis::values() const {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = freq(k);
    return v;
}

void FreqAxis::validate(double fs) const {
    if (n == 0) throw InvalidArgument("frequency axis: empty");
    if (!(df > 0.0)) throw InvalidArgument("frequency axis: resolution must be positive");
    if (!(f_lo > 0.0)) throw InvalidArgument("frequency axis: must start above 0 Hz");
    if (f_hi() > fs / 2.0 * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "frequency axis: upper edge " << f_hi() << " Hz exceeds Nyquist " << fs / 2.0 << " Hz";
        throw InvalidArgument(os.str());
    }
}

FreqAxis FreqAxis::fft_grid(double fs, std::size_t nfft, double f_max) {
    if (!(fs > 0.0) || nfft < 2) throw InvalidArgument("frequency axis: bad FFT grid");
    FreqAxis a;
    a.df = fs / static_cast<double>(nfft);
    a.f_lo = a.df;
    const double top = std::min(f_max, fs / 2.0);
    a.n = static_cast<std::size_t>(std::floor(top / a.df + 1e-9));
    if (a.n == 0) throw InvalidArgument("frequency axis: f_max below the first bin");
    return a;
}

FreqAxis FreqAxis::uniform(double f_lo, double f_hi, double df) {
    if (!(df > 0.0) || !(f_hi >= f_lo)) throw InvalidArgument("frequency axis: bad range");
    FreqAxis a;
    a.f_lo = f_lo;
    a.df = df;
    a.n = static_cast<std::size_t>(std::floor((f_hi - f_lo) / df + 1e-9)) + 1;
    return a;
}

std::vector<double> TimeAxis::values() const {
    std::vector<double> v(n);
    for (std::size_t m = 0; m < n; ++m) v[m] = time(m);
    return v;
}

TimeAxis TimeAxis::frames(std::size_t n_samples, double fs, double t0, std::size_t hop) {
    check_hop(hop);
    return {t0, fs, hop, (n_samples + hop - 1) / hop};
}

std::string to_string(TfrKind kind) {
    switch (kind) {
    case TfrKind::stft: return "stft";
    case TfrKind::sst: return "sst";
    case TfrKind::ensemble: return "ensemble";
    }
    return "unknown";
}

Tfr stft(const ComplexSignal& sig, const GaussianWindow& w, const FreqAxis& axis, std::size_t hop) {
    axis.validate(sig.fs());
    if (std::abs(w.fs - sig.fs()) > 1e-9 * sig.fs()) {
        throw InvalidArgument("stft: window and signal sample rates differ");
    }
    Tfr out;
    out.freq = axis;
    out.time = TimeAxis::frames(sig.size(), sig.fs(), sig.t0(), hop);
    out.window_L = w.span_L;
    out.fs = sig.fs();
    out.kind = TfrKind::stft;
    out.values.resize(static_cast<Eigen::Index>(axis.n), static_cast<Eigen::Index>(out.time.n));
    FrameEngine engine(w, axis);
    for (std::size_t m = 0; m < out.time.n; ++m) {
        engine.compute(sig.samples(), out.time.sample(m), out.values.col(static_cast<Eigen::Index>(m)).data(),
                       nullptr);
    }
    return out;
}

Tfr stft(const RealSignal& sig, const GaussianWindow& w, const FreqAxis& axis, std::size_t hop) {
    return stft(to_complex(sig), w, axis, hop);
}

cplx stft_direct(std::span<const cplx> x, double fs, const GaussianWindow& w, std::size_t center,
                 double freq, bool derivative_window) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const auto J = static_cast<std::ptrdiff_t>(w.half_length());
    const auto c = static_cast<std::ptrdiff_t>(center);
    const auto& taps = derivative_window ? w.dtaps : w.taps;
    cplx acc{};
    double inside = 0.0, total = 0.0;
    for (std::ptrdiff_t j = -J; j <= J; ++j) {
        const double h = w.taps[static_cast<std::size_t>(j + J)];
        total += h;
        if (c + j < 0 || c + j >= n) continue;
        inside += h;
        acc += x[static_cast<std::size_t>(c + j)] * taps[static_cast<std::size_t>(j + J)] *
               std::polar(1.0, -two_pi * freq * static_cast<double>(j) / fs);
    }
    return inside > 0.0 ? acc * (total / inside) / fs : cplx{};
}

Tfr sst(const ComplexSignal& sig, const GaussianWindow& w, const FreqAxis& axis, const SstOptions& opts) {
    axis.validate(sig.fs());
    if (opts.gamma && !(*opts.gamma >= 0.0)) throw InvalidArgument("sst: gamma must be >= 0");
    if (!(opts.gamma_rel >= 0.0)) throw InvalidArgument("sst: relative gamma must be >= 0");
    if (std::abs(w.fs - sig.fs()) > 1e-9 * sig.fs()) {
        throw InvalidArgument("sst: window and signal sample rates differ");
    }
    const auto time = TimeAxis::frames(sig.size(), sig.fs(), sig.t0(), opts.hop);
    const auto nb = static_cast<Eigen::Index>(axis.n);
    const auto nt = static_cast<Eigen::Index>(time.n);

    Eigen::MatrixXcd v(nb, nt);
    Eigen::MatrixXd omega(nb, nt);
    std::vector<cplx> dv(axis.n);
    FrameEngine engine(w, axis);
    std::vector<double> frame_max(time.n, 0.0);
    for (Eigen::Index m = 0; m < nt; ++m) {
        cplx* col = v.col(m).data();
        engine.compute(sig.samples(), time.sample(static_cast<std::size_t>(m)), col, dv.data());
        double mx = 0.0;
        for (Eigen::Index k = 0; k < nb; ++k) {
            const double a = std::abs(col[k]);
            mx = std::max(mx, a);
            omega(k, m) = a > 0.0 ? axis.freq(static_cast<std::size_t>(k)) -
                                        (dv[static_cast<std::size_t>(k)] / col[k]).imag() / two_pi
                                  : std::numeric_limits<double>::quiet_NaN();
        }
        frame_max[static_cast<std::size_t>(m)] = mx;
    }

    const double gamma = opts.gamma ? *opts.gamma : opts.gamma_rel * median(frame_max);
    Tfr out;
    out.freq = axis;
    out.time = time;
    out.window_L = w.span_L;
    out.fs = sig.fs();
    out.kind = TfrKind::sst;
    out.threshold = gamma;
    out.values = Eigen::MatrixXcd::Zero(nb, nt);
    const double lo = axis.f_lo - axis.df / 2.0;
    const double hi = axis.f_hi() + axis.df / 2.0;
    for (Eigen::Index m = 0; m < nt; ++m) {
        for (Eigen::Index k = 0; k < nb; ++k) {
            const cplx val = v(k, m);
            if (!(std::abs(val) > gamma)) continue;
            const double f = omega(k, m);
            if (!(f >= lo && f < hi)) continue;
            out.values(static_cast<Eigen::Index>(axis.nearest(f)), m) += val;
        }
    }
    return out;
}

Tfr sst(const RealSignal& sig, const GaussianWindow& w, const FreqAxis& axis, const SstOptions& opts) {
    return sst(to_complex(sig), w, axis, opts);
}

double default_smooth_penalty(double df) { return std::log(10.0) * (df / 0.1) * (df / 0.1); }
double default_ref_weight(double df) { return std::log(10.0) * (df / 0.2) * (df / 0.2); }

double ridge_objective(const Eigen::MatrixXd& mag, const std::vector<int>& bins, double lambda,
                       const std::vector<double>& ref_bins, double mu, double floor) {
    double s = 0.0;
    for (std::size_t m = 0; m < bins.size(); ++m) {
        s += std::log(mag(bins[m], static_cast<Eigen::Index>(m)) + floor);
        if (m > 0) {
            const double d = bins[m] - bins[m - 1];
            s -= lambda * d * d;
        }
        if (!ref_bins.empty()) {
            const double r = bins[m] - ref_bins[m];
            s -= mu * r * r;
        }
    }
    return s;
}

Ridge extract_ridge(const Eigen::MatrixXd& mag, const FreqAxis& axis, double lo, double hi,
                    const RidgeOptions& opts) {
    const auto nt = static_cast<std::size_t>(mag.cols());
    return extract_ridge(mag, axis, std::vector<double>(nt, lo), std::vector<double>(nt, hi), opts);
}

Ridge extract_ridge(const Eigen::MatrixXd& mag, const FreqAxis& axis, const std::vector<double>& lo,
                    const std::vector<double>& hi, const RidgeOptions& opts) {
    const auto nt = static_cast<std::size_t>(mag.cols());
    if (static_cast<std::size_t>(mag.rows()) != axis.n) {
        throw InvalidArgument("ridge: magnitude rows do not match the frequency axis");
    }
    if (nt == 0) throw InvalidArgument("ridge: no frames");
    if (lo.size() != nt || hi.size() != nt) throw InvalidArgument("ridge: band length mismatch");
    const double lambda = opts.smooth_penalty.value_or(default_smooth_penalty(axis.df));
    const bool has_ref = !opts.reference.empty();
    if (has_ref && opts.reference.size() != nt) throw InvalidArgument("ridge: reference length mismatch");
    const double mu = has_ref ? opts.ref_weight.value_or(default_ref_weight(axis.df)) : 0.0;
    if (!(lambda >= 0.0) || !(mu >= 0.0)) throw InvalidArgument("ridge: penalties must be >= 0");

    std::vector<int> klo(nt), khi(nt);
    std::vector<double> ref_bins;
    if (has_ref) ref_bins.resize(nt);
    for (std::size_t m = 0; m < nt; ++m) {
        const double a = std::ceil((lo[m] - axis.f_lo) / axis.df - 1e-9);
        const double b = std::floor((hi[m] - axis.f_lo) / axis.df + 1e-9);
        klo[m] = static_cast<int>(std::max(0.0, a));
        khi[m] = static_cast<int>(std::min(static_cast<double>(axis.n - 1), b));
        if (klo[m] > khi[m]) {
            std::ostringstream os;
            os << "ridge: empty band [" << lo[m] << ", " << hi[m] << "] Hz at frame " << m;
            throw InvalidArgument(os.str());
        }
        if (has_ref) ref_bins[m] = (opts.reference[m] - axis.f_lo) / axis.df;
    }

    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> prev(axis.n, neg_inf), cur(axis.n, neg_inf);
    std::vector<std::vector<int>> back(nt);
    auto local = [&](std::size_t m, int k) {
        double s = std::log(mag(k, static_cast<Eigen::Index>(m)) + opts.floor);
        if (has_ref) {
            const double r = k - ref_bins[m];
            s -= mu * r * r;
        }
        return s;
    };
    for (int k = klo[0]; k <= khi[0]; ++k) prev[static_cast<std::size_t>(k)] = local(0, k);
    for (std::size_t m = 1; m < nt; ++m) {
        back[m].assign(static_cast<std::size_t>(khi[m] - klo[m] + 1), 0);
        std::fill(cur.begin(), cur.end(), neg_inf);
        for (int k = klo[m]; k <= khi[m]; ++k) {
            double best = neg_inf;
            int arg = klo[m - 1];
            for (int j = klo[m - 1]; j <= khi[m - 1]; ++j) {
                const double d = k - j;
                const double s = prev[static_cast<std::size_t>(j)] - lambda * d * d;
                if (s > best) {
                    best = s;
                    arg = j;
                }
            }
            cur[static_cast<std::size_t>(k)] = best + local(m, k);
            back[m][static_cast<std::size_t>(k - klo[m])] = arg;
        }
        std::swap(prev, cur);
    }

    Ridge r;
    r.lo = *std::min_element(lo.begin(), lo.end());
    r.hi = *std::max_element(hi.begin(), hi.end());
    r.bins.resize(nt);
    int k_end = klo[nt - 1];
    double best = neg_inf;
    for (int k = klo[nt - 1]; k <= khi[nt - 1]; ++k) {
        if (prev[static_cast<std::size_t>(k)] > best) {
            best = prev[static_cast<std::size_t>(k)];
            k_end = k;
        }
    }
    r.score = best;
    r.bins[nt - 1] = k_end;
    for (std::size_t m = nt - 1; m > 0; --m) {
        r.bins[m - 1] = back[m][static_cast<std::size_t>(r.bins[m] - klo[m])];
    }
    r.freqs.resize(nt);
    std::vector<double> on, off;
    for (std::size_t m = 0; m < nt; ++m) {
        r.freqs[m] = axis.freq(static_cast<std::size_t>(r.bins[m]));
        on.push_back(mag(r.bins[m], static_cast<Eigen::Index>(m)));
        for (int k = klo[m]; k <= khi[m]; ++k) {
            if (k != r.bins[m]) off.push_back(mag(k, static_cast<Eigen::Index>(m)));
        }
    }
    const double on_med = median(on);
    const double off_med = median(off);
    if (on_med <= 0.0) {
        r.confidence = 0.0;
    } else if (off_med <= 0.0) {
        r.confidence = std::numeric_limits<double>::infinity();
    } else {
        r.confidence = on_med / off_med;
    }
    return r;
}

std::vector<double> unwrap_phase(const std::vector<cplx>& values, const std::vector<double>& freqs,
                                 const TimeAxis& time) {
    const std::size_t nt = values.size();
    std::vector<double> out(nt, 0.0);
    if (nt == 0) return out;
    std::vector<double> mags(nt);
    for (std::size_t m = 0; m < nt; ++m) mags[m] = std::abs(values[m]);
    const double gap = 1e-3 * median(mags);
    const double dt = static_cast<double>(time.hop) / time.fs;

    std::size_t first = nt;
    for (std::size_t m = 0; m < nt; ++m) {
        if (mags[m] > gap && mags[m] > 0.0) {
            first = m;
            break;
        }
    }
    if (first == nt) {
        for (std::size_t m = 1; m < nt; ++m) out[m] = out[m - 1] + 0.5 * (freqs[m - 1] + freqs[m]) * dt;
        return out;
    }
    out[first] = std::arg(values[first]) / two_pi;
    for (std::size_t m = first; m-- > 0;) out[m] = out[m + 1] - 0.5 * (freqs[m] + freqs[m + 1]) * dt;
    for (std::size_t m = first + 1; m < nt; ++m) {
        const double predicted = out[m - 1] + 0.5 * (freqs[m - 1] + freqs[m]) * dt;
        if (mags[m] > gap && mags[m] > 0.0) {
            const double raw = std::arg(values[m]) / two_pi;
            out[m] = raw + std::round(predicted - raw);
        } else {
            out[m] = predicted;
        }
    }
    return out;
}

double mode_normalization(const GaussianWindow& w, const FreqAxis& axis, double half_bandwidth) {
    const std::size_t J = w.half_length();
    const std::size_t n = 2 * J + 1;
    const std::size_t kref = axis.n / 2;
    const double f = axis.freq(kref);
    std::vector<cplx> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::polar(1.0, two_pi * f * (static_cast<double>(i) - static_cast<double>(J)) / w.fs);
    }
    SstOptions opts;
    opts.hop = std::max<std::size_t>(J, 1);
    const auto s = sst(ComplexSignal(std::move(x), w.fs), w, axis, opts);
    const Eigen::Index col = J > 0 ? 1 : 0;
    cplx acc{};
    for (std::size_t k = 0; k < axis.n; ++k) {
        if (std::abs(axis.freq(k) - f) <= half_bandwidth + 1e-12) acc += s.values(static_cast<Eigen::Index>(k), col);
    }
    const double c = std::abs(acc) * axis.df / 2.0;
    if (!(c > 0.0)) throw StageError("reconstruction", "normalisation vanished");
    return c;
}

Mode reconstruct_mode(const Tfr& sst, const Ridge& ridge, double half_bandwidth) {
    if (!(half_bandwidth > 0.0)) throw InvalidArgument("reconstruction: half bandwidth must be positive");
    const std::size_t nt = sst.time.n;
    if (ridge.freqs.size() != nt) throw InvalidArgument("reconstruction: ridge does not match TFR frames");
    const auto& axis = sst.freq;
    const auto w = gaussian_window(sst.window_L, sst.fs);
    const double cw = mode_normalization(w, axis, half_bandwidth);

    Mode mode;
    mode.time = sst.time;
    mode.half_bandwidth = half_bandwidth;
    mode.values.resize(nt);
    mode.am.resize(nt);
    for (std::size_t m = 0; m < nt; ++m) {
        const double f = ridge.freqs[m];
        double lo = f - half_bandwidth, hi = f + half_bandwidth;
        if (lo < axis.f_lo - 1e-12 || hi > axis.f_hi() + 1e-12) {
            mode.clamped = true;
            lo = std::max(lo, axis.f_lo);
            hi = std::min(hi, axis.f_hi());
        }
        const auto k0 = static_cast<std::size_t>(std::max(0.0, std::ceil((lo - axis.f_lo) / axis.df - 1e-9)));
        const auto k1 = static_cast<std::size_t>(
            std::min(static_cast<double>(axis.n - 1), std::floor((hi - axis.f_lo) / axis.df + 1e-9)));
        cplx acc{};
        for (std::size_t k = k0; k <= k1 && k < axis.n; ++k) acc += sst.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
        mode.values[m] = acc * axis.df / cw;
        mode.am[m] = std::abs(mode.values[m]);
    }
    if (mode.clamped) {
        std::ostringstream os;
        os << "reconstruction band of +/-" << half_bandwidth << " Hz clamped at the frequency axis edge";
        warn(os.str());
    }
    mode.phase = unwrap_phase(mode.values, ridge.freqs, sst.time);
    return mode;
}

namespace {

std::vector<double> frames_to_samples(const std::vector<double>& v, const TimeAxis& time, std::size_t n,
                                      NaturalSpline::Extrapolation mode) {
    if (v.size() == 1) return std::vector<double>(n, v[0]);
    std::vector<double> x(v.size());
    for (std::size_t m = 0; m < v.size(); ++m) x[m] = static_cast<double>(time.sample(m));
    NaturalSpline spline(x, v, mode);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = spline(static_cast<double>(i));
    return out;
}

}  // namespace

std::vector<double> Mode::am_samples(std::size_t n) const {
    return frames_to_samples(am, time, n, NaturalSpline::Extrapolation::constant);
}

std::vector<double> Mode::phase_samples(std::size_t n) const {
    return frames_to_samples(phase, time, n, NaturalSpline::Extrapolation::linear);
}

}  // namespace tetris
