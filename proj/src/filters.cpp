#include "tetris/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tetris/error.hpp"

namespace tetris {

namespace {

using std::numbers::pi;

void check_design(int order, double cutoff_hz, double fs) {
    if (order < 1) throw InvalidArgument("butterworth: order must be >= 1");
    if (!(fs > 0.0)) throw InvalidArgument("butterworth: sample rate must be positive");
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < fs / 2.0)) {
        throw InvalidArgument("butterworth: cutoff " + std::to_string(cutoff_hz) +
                              " Hz outside (0, fs/2)");
    }
}

// Analog prototype poles of an order-N Butterworth filter (unit cutoff).
std::complex<double> prototype_pole(int k, int order) {
    const double angle = pi * (2.0 * k + order + 1.0) / (2.0 * order);
    return std::polar(1.0, angle);
}

std::complex<double> bilinear(std::complex<double> s, double fs) {
    return (2.0 * fs + s) / (2.0 * fs - s);
}

enum class Band { low, high };

std::vector<Biquad> design(int order, double cutoff_hz, double fs, Band band) {
    check_design(order, cutoff_hz, fs);
    const double warped = 2.0 * fs * std::tan(pi * cutoff_hz / fs);
    std::vector<Biquad> sections;
    for (int k = 0; k < order / 2; ++k) {
        const auto p = prototype_pole(k, order);
        const auto s = band == Band::low ? warped * p : warped / p;
        const auto z = bilinear(s, fs);
        Biquad q;
        q.a1 = -2.0 * z.real();
        q.a2 = std::norm(z);
        if (band == Band::low) {
            const double g = (1.0 + q.a1 + q.a2) / 4.0;
            q.b0 = g;
            q.b1 = 2.0 * g;
            q.b2 = g;
        } else {
            const double g = (1.0 - q.a1 + q.a2) / 4.0;
            q.b0 = g;
            q.b1 = -2.0 * g;
            q.b2 = g;
        }
        sections.push_back(q);
    }
    if (order % 2 == 1) {
        const double s = -warped;
        const double z = bilinear(s, fs).real();
        Biquad q;
        q.a1 = -z;
        if (band == Band::low) {
            const double g = (1.0 + q.a1) / 2.0;
            q.b0 = g;
            q.b1 = g;
        } else {
            const double g = (1.0 - q.a1) / 2.0;
            q.b0 = g;
            q.b1 = -g;
        }
        sections.push_back(q);
    }
    return sections;
}

void run_sections(const std::vector<Biquad>& sections, std::vector<double>& x) {
    if (x.empty()) return;
    double level = x.front();
    for (const auto& q : sections) {
        const double g = q.dc_gain();
        double s1 = (g - q.b0) * level;
        double s2 = (q.b2 - q.a2 * g) * level;
        for (double& v : x) {
            const double in = v;
            const double out = q.b0 * in + s1;
            s1 = q.b1 * in - q.a1 * out + s2;
            s2 = q.b2 * in - q.a2 * out;
            v = out;
        }
        level *= g;
    }
}

}  // namespace

std::complex<double> Biquad::response(std::complex<double> z) const {
    const auto zi = 1.0 / z;
    return (b0 + b1 * zi + b2 * zi * zi) / (1.0 + a1 * zi + a2 * zi * zi);
}

std::size_t SosFilter::order() const noexcept {
    if (order_ != 0) return order_;
    std::size_t n = 0;
    for (const auto& q : sections_) n += (q.a2 != 0.0 || q.b2 != 0.0) ? 2 : 1;
    return n;
}

std::complex<double> SosFilter::response(double f, double fs) const {
    const auto z = std::polar(1.0, 2.0 * pi * f / fs);
    std::complex<double> h{1.0, 0.0};
    for (const auto& q : sections_) h *= q.response(z);
    return h;
}

std::vector<double> SosFilter::filter(std::span<const double> x) const {
    std::vector<double> y(x.begin(), x.end());
    run_sections(sections_, y);
    return y;
}

SosFilter SosFilter::then(const SosFilter& other) const {
    auto sections = sections_;
    sections.insert(sections.end(), other.sections_.begin(), other.sections_.end());
    return SosFilter(std::move(sections));
}

SosFilter butterworth_lowpass(int order, double cutoff_hz, double fs) {
    SosFilter f(design(order, cutoff_hz, fs, Band::low));
    f.order_ = static_cast<std::size_t>(order);
    return f;
}

SosFilter butterworth_highpass(int order, double cutoff_hz, double fs) {
    SosFilter f(design(order, cutoff_hz, fs, Band::high));
    f.order_ = static_cast<std::size_t>(order);
    return f;
}

SosFilter butterworth_bandpass(int order, double lo_hz, double hi_hz, double fs) {
    check_design(order, lo_hz, fs);
    check_design(order, hi_hz, fs);
    if (!(lo_hz < hi_hz)) throw InvalidArgument("butterworth: band-pass needs lo < hi");
    const double wl = 2.0 * fs * std::tan(pi * lo_hz / fs);
    const double wh = 2.0 * fs * std::tan(pi * hi_hz / fs);
    const double bw = wh - wl, w0sq = wl * wh;
    const double f0 = fs / pi * std::atan(std::sqrt(w0sq) / (2.0 * fs));
    const auto z0 = std::polar(1.0, 2.0 * pi * f0 / fs);

    // Low-pass to band-pass: each prototype pole p maps to the roots of
    // s^2 - p bw s + w0^2. Zeros land at z = 1 and z = -1.
    auto section = [&](std::complex<double> za, std::complex<double> zb) {
        Biquad q;
        q.a1 = -(za + zb).real();
        q.a2 = (za * zb).real();
        q.b0 = 1.0;
        q.b1 = 0.0;
        q.b2 = -1.0;
        const double g = 1.0 / std::abs(q.response(z0));
        q.b0 = g;
        q.b2 = -g;
        return q;
    };
    std::vector<Biquad> sections;
    for (int k = 0; k < (order + 1) / 2; ++k) {
        const auto p = prototype_pole(k, order);
        const auto root = std::sqrt(p * p * bw * bw - 4.0 * w0sq);
        const auto s1 = (p * bw + root) / 2.0, s2 = (p * bw - root) / 2.0;
        const auto z1 = bilinear(s1, fs), z2 = bilinear(s2, fs);
        if (std::abs(p.imag()) < 1e-12) {
            sections.push_back(section(z1, z2));
        } else {
            sections.push_back(section(z1, std::conj(z1)));
            sections.push_back(section(z2, std::conj(z2)));
        }
    }
    return SosFilter(std::move(sections));
}

std::vector<double> filtfilt(const SosFilter& filter, std::span<const double> x,
                             std::size_t padlen, Padding padding) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    padlen = std::min(padlen, n - 1);

    std::vector<double> ext;
    ext.reserve(n + 2 * padlen);
    const double odd = padding == Padding::odd ? 1.0 : 0.0;
    for (std::size_t i = padlen; i >= 1; --i) ext.push_back(odd * 2.0 * x[0] + (1.0 - 2.0 * odd) * x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= padlen; ++i) {
        ext.push_back(odd * 2.0 * x[n - 1] + (1.0 - 2.0 * odd) * x[n - 1 - i]);
    }

    run_sections(filter.sections(), ext);
    std::reverse(ext.begin(), ext.end());
    run_sections(filter.sections(), ext);
    std::reverse(ext.begin(), ext.end());

    return {ext.begin() + static_cast<std::ptrdiff_t>(padlen),
            ext.begin() + static_cast<std::ptrdiff_t>(padlen + n)};
}

std::vector<double> resample(std::span<const double> x, double fs_in, double fs_out,
                             int half_taps, double kaiser_beta) {
    if (!(fs_in > 0.0) || !(fs_out > 0.0)) {
        throw InvalidArgument("resample: sample rates must be positive");
    }
    if (x.empty()) return {};
    if (fs_in == fs_out) return {x.begin(), x.end()};

    const std::size_t n = x.size();
    const auto m = static_cast<std::size_t>(
        std::floor(static_cast<double>(n - 1) * fs_out / fs_in + 1e-9)) + 1;
    // Kernel cutoff at the lower Nyquist rate; `scale` converts to input samples.
    const double scale = std::min(1.0, fs_out / fs_in);
    const double support = half_taps / scale;  // in input samples
    const double i0_beta = std::cyl_bessel_i(0.0, kaiser_beta);

    std::vector<double> y(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const double pos = static_cast<double>(j) * fs_in / fs_out;
        const auto lo = static_cast<std::ptrdiff_t>(std::ceil(pos - support));
        const auto hi = static_cast<std::ptrdiff_t>(std::floor(pos + support));
        double acc = 0.0;
        for (auto i = std::max<std::ptrdiff_t>(lo, 0);
             i <= std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(n) - 1); ++i) {
            const double d = pos - static_cast<double>(i);
            const double u = d / support;
            if (std::abs(u) > 1.0) continue;
            const double arg = pi * d * scale;
            const double sinc = std::abs(arg) < 1e-12 ? 1.0 : std::sin(arg) / arg;
            const double win = std::cyl_bessel_i(0.0, kaiser_beta * std::sqrt(1.0 - u * u)) / i0_beta;
            acc += x[static_cast<std::size_t>(i)] * scale * sinc * win;
        }
        y[j] = acc;
    }
    return y;
}

}  // namespace tetris
