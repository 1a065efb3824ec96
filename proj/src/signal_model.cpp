#include "tetris/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "tetris/filters.hpp"

namespace tetris {

namespace {

using std::numbers::pi;
constexpr double two_pi = 2.0 * pi;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

void check_len(const std::vector<double>& v, std::size_t n, const std::string& what) {
    if (v.size() != n) {
        throw InvalidArgument("ganhm: " + what + " has " + std::to_string(v.size()) +
                              " samples, expected " + std::to_string(n));
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw InvalidArgument("ganhm: " + what + " is not finite at index " +
                                  std::to_string(i));
        }
    }
}

std::vector<double> central_difference(const std::vector<double>& v, double fs) {
    const std::size_t n = v.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    d[0] = (v[1] - v[0]) * fs;
    d[n - 1] = (v[n - 1] - v[n - 2]) * fs;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) * fs / 2.0;
    return d;
}

// Moving average with a centred window of `width` samples, shrinking at the edges.
std::vector<double> moving_average(const std::vector<double>& x, std::size_t width) {
    const std::size_t n = x.size();
    if (width <= 1 || n == 0) return x;
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
    const std::size_t half = width / 2;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n, i + half + 1);
        out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    }
    return out;
}

// A_{1,l}(t) expressed as phasors A_j, j = -d0..d0, so that
// A_{1,l}(t) = sum_j A_j exp(i 2 pi j phi_0(t)).
std::vector<std::complex<double>> am_phasors(const GanhmSpec& s, int l, std::size_t i) {
    std::vector<std::complex<double>> a(static_cast<std::size_t>(2 * s.d0 + 1));
    a[static_cast<std::size_t>(s.d0)] = s.trend[static_cast<std::size_t>(l)][i];
    for (int k = 1; k <= s.d0; ++k) {
        const double mag = s.riav_a[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(k - 1)][i] / 2.0;
        const double beta = s.riav_beta[static_cast<std::size_t>(k - 1)];
        a[static_cast<std::size_t>(s.d0 + k)] = std::polar(mag, beta);
        a[static_cast<std::size_t>(s.d0 - k)] = std::polar(mag, -beta);
    }
    return a;
}

}  // namespace

void GanhmSpec::validate_structure() const {
    if (d0 < 1 || d1 < 1) throw InvalidArgument("ganhm: d0 and d1 must be >= 1");
    phi.validate();
    phi0.validate();
    const std::size_t n = size();
    if (phi0.size() != n) throw InvalidArgument("ganhm: phi and phi0 lengths differ");
    if (phi0.fs != phi.fs) throw InvalidArgument("ganhm: phi and phi0 sample rates differ");
    if (trend.size() != static_cast<std::size_t>(d1 + 1)) {
        throw InvalidArgument("ganhm: expected d1 + 1 trend series");
    }
    for (int l = 0; l <= d1; ++l) check_len(trend[static_cast<std::size_t>(l)], n, "T_" + std::to_string(l));
    if (riiv_alpha.size() != static_cast<std::size_t>(d0) ||
        riiv_beta.size() != static_cast<std::size_t>(d0)) {
        throw InvalidArgument("ganhm: expected d0 RIIV coefficients");
    }
    check_len(riiv_am, n, "A_0");
    if (riav_a.size() != static_cast<std::size_t>(d1)) {
        throw InvalidArgument("ganhm: expected d1 RIAV blocks");
    }
    for (int l = 1; l <= d1; ++l) {
        const auto& block = riav_a[static_cast<std::size_t>(l - 1)];
        if (block.size() != static_cast<std::size_t>(d0)) {
            throw InvalidArgument("ganhm: RIAV block " + std::to_string(l) + " needs d0 series");
        }
        for (int k = 1; k <= d0; ++k) {
            check_len(block[static_cast<std::size_t>(k - 1)], n,
                      "a_{" + std::to_string(l) + "," + std::to_string(k) + "}");
        }
    }
    if (riav_beta.size() != static_cast<std::size_t>(d0)) {
        throw InvalidArgument("ganhm: expected d0 RIAV phases");
    }
    if (cardiac_phases.size() != static_cast<std::size_t>(d1 + 1)) {
        throw InvalidArgument("ganhm: expected d1 + 1 cardiac phases");
    }
    auto in_circle = [](double b) { return b >= 0.0 && b < two_pi; };
    for (double b : riav_beta) {
        if (!in_circle(b)) throw InvalidArgument("ganhm: RIAV phase " + fmt(b) + " outside [0, 2pi)");
    }
    for (double b : cardiac_phases) {
        if (!in_circle(b)) throw InvalidArgument("ganhm: cardiac phase " + fmt(b) + " outside [0, 2pi)");
    }
    check_len(fm_depth, n, "b");
    for (std::size_t i = 0; i < n; ++i) {
        if (fm_depth[i] < 0.0 || fm_depth[i] >= 1.0) {
            throw InvalidArgument("ganhm: FM depth " + fmt(fm_depth[i]) + " outside [0, 1) at t = " +
                                  fmt(phi.t0 + static_cast<double>(i) / phi.fs));
        }
    }
    if (!(separation >= 0.0)) throw InvalidArgument("ganhm: separation must be >= 0");
}

void GanhmSpec::validate() const {
    validate_structure();
    const std::size_t n = size();
    const auto rate = cardiac_rate();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = phi.t0 + static_cast<double>(i) / phi.fs;
        if (!(rate[i] > 0.0)) {
            throw ModelViolation("ganhm: cardiac rate not positive at t = " + fmt(t));
        }
        if (!(rate[i] - d0 * phi0.derivative[i] > separation)) {
            throw ModelViolation("ganhm: rate separation violated at t = " + fmt(t) + " (phi_1' = " +
                                 fmt(rate[i]) + ", phi_0' = " + fmt(phi0.derivative[i]) + ")");
        }
    }
    std::vector<std::vector<double>> am;
    for (int l = 1; l <= d1; ++l) am.push_back(harmonic_am(l));
    for (std::size_t i = 0; i < n; ++i) {
        for (int l = 1; l <= d1; ++l) {
            const double a = am[static_cast<std::size_t>(l - 1)][i];
            if (!(a > 0.0)) {
                throw ModelViolation("ganhm: amplitude A_{1," + std::to_string(l) + "} = " + fmt(a) +
                                     " is not positive at t = " +
                                     fmt(phi.t0 + static_cast<double>(i) / phi.fs) + " (l = " +
                                     std::to_string(l) + ")");
            }
        }
    }
}

double GanhmSpec::fm_bound() const {
    return fm_depth.empty() ? 0.0 : *std::max_element(fm_depth.begin(), fm_depth.end());
}

std::vector<double> GanhmSpec::cardiac_phase() const {
    const std::size_t n = size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = phi.phase[i] +
                 fm_depth[i] / (two_pi * phi0.derivative[i]) * std::sin(two_pi * phi0.phase[i]);
    }
    return out;
}

std::vector<double> GanhmSpec::cardiac_rate() const {
    const std::size_t n = size();
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = fm_depth[i] / (two_pi * phi0.derivative[i]);
    const auto dg = central_difference(g, phi.fs);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = two_pi * phi0.phase[i];
        out[i] = phi.derivative[i] + fm_depth[i] * std::cos(u) + dg[i] * std::sin(u);
    }
    return out;
}

std::vector<double> GanhmSpec::harmonic_am(int l) const {
    if (l < 1 || l > d1) throw InvalidArgument("ganhm: harmonic index out of range");
    auto out = trend[static_cast<std::size_t>(l)];
    const auto r = riav(l);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += r[i];
    return out;
}

std::vector<double> GanhmSpec::riav(int l) const {
    if (l < 1 || l > d1) throw InvalidArgument("ganhm: harmonic index out of range");
    const std::size_t n = size();
    std::vector<double> out(n, 0.0);
    for (int k = 1; k <= d0; ++k) {
        const auto& a = riav_a[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(k - 1)];
        const double beta = riav_beta[static_cast<std::size_t>(k - 1)];
        for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * std::cos(two_pi * k * phi0.phase[i] + beta);
    }
    return out;
}

std::vector<double> GanhmSpec::riiv() const {
    const std::size_t n = size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 1; k <= d0; ++k) {
            s += riiv_alpha[static_cast<std::size_t>(k - 1)] *
                 std::cos(two_pi * k * phi0.phase[i] + riiv_beta[static_cast<std::size_t>(k - 1)]);
        }
        out[i] = riiv_am[i] * s;
    }
    return out;
}

GanhmSpec GanhmSpec::zeros(int d0, int d1, const PhaseFunction& phi, const PhaseFunction& phi0) {
    GanhmSpec s;
    s.d0 = d0;
    s.d1 = d1;
    s.phi = phi;
    s.phi0 = phi0;
    const std::size_t n = phi.size();
    const std::vector<double> zero(n, 0.0);
    s.trend.assign(static_cast<std::size_t>(d1 + 1), zero);
    s.riiv_alpha.assign(static_cast<std::size_t>(d0), 0.0);
    s.riiv_beta.assign(static_cast<std::size_t>(d0), 0.0);
    s.riiv_am = zero;
    s.riav_a.assign(static_cast<std::size_t>(d1),
                    std::vector<std::vector<double>>(static_cast<std::size_t>(d0), zero));
    s.riav_beta.assign(static_cast<std::size_t>(d0), 0.0);
    s.cardiac_phases.assign(static_cast<std::size_t>(d1 + 1), 0.0);
    s.fm_depth = zero;
    return s;
}

RealSignal synthesize_ganhm(const GanhmSpec& spec, std::size_t n) {
    spec.validate();
    if (n != spec.size()) {
        throw InvalidArgument("ganhm: requested " + std::to_string(n) + " samples but spec has " +
                              std::to_string(spec.size()));
    }
    const auto phi1 = spec.cardiac_phase();
    auto y = spec.riiv();
    const auto& t0 = spec.trend[0];
    for (std::size_t i = 0; i < n; ++i) y[i] += t0[i];
    for (int l = 1; l <= spec.d1; ++l) {
        const auto am = spec.harmonic_am(l);
        const double beta = spec.cardiac_phases[static_cast<std::size_t>(l)];
        for (std::size_t i = 0; i < n; ++i) y[i] += am[i] * std::cos(two_pi * l * phi1[i] + beta);
    }
    return RealSignal(std::move(y), spec.fs(), spec.t0());
}

std::vector<ExpansionComponent> expand_ganhm(const GanhmSpec& spec, std::size_t n) {
    if (spec.d0 > 2) {
        throw InvalidArgument("ganhm: expansion supports d0 <= 2, got d0 = " + std::to_string(spec.d0));
    }
    spec.validate();
    if (n != spec.size()) throw InvalidArgument("ganhm: sample count does not match spec");

    constexpr int kmax = 4;
    std::vector<ExpansionComponent> out;
    auto make = [&](int l, int k) {
        ExpansionComponent c{l, k, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                             RealSignal(std::vector<double>(n, 0.0), spec.fs(), spec.t0())};
        return c;
    };

    // l = 0: T_0 and the RIIV harmonics, which carry no FM.
    for (int k = -kmax; k <= kmax; ++k) {
        auto c = make(0, k);
        std::vector<double> sig(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            std::complex<double> ck = 0.0;
            if (k == 0) ck = spec.trend[0][i];
            if (k > 0 && k <= spec.d0) {
                ck = std::polar(spec.riiv_am[i] * spec.riiv_alpha[static_cast<std::size_t>(k - 1)],
                                spec.riiv_beta[static_cast<std::size_t>(k - 1)]);
            }
            c.amplitude[i] = std::abs(ck);
            c.phase[i] = std::arg(ck);
            sig[i] = c.amplitude[i] * std::cos(two_pi * k * spec.phi0.phase[i] + c.phase[i]);
        }
        c.signal = RealSignal(std::move(sig), spec.fs(), spec.t0());
        out.push_back(std::move(c));
    }

    // l >= 1: phasor convolution of the AM spectrum with the second-order
    // Jacobi-Anger coefficients of exp(i 2 theta_l sin(2 pi phi_0)).
    for (int l = 1; l <= spec.d1; ++l) {
        std::vector<ExpansionComponent> row;
        for (int k = -kmax; k <= kmax; ++k) row.push_back(make(l, k));
        std::vector<std::vector<double>> sig(2 * kmax + 1, std::vector<double>(n, 0.0));
        const double beta = spec.cardiac_phases[static_cast<std::size_t>(l)];
        for (std::size_t i = 0; i < n; ++i) {
            const double theta = l * spec.fm_depth[i] / (2.0 * spec.phi0.derivative[i]);
            const std::complex<double> e[5] = {theta * theta / 2.0, -theta, 1.0 - theta * theta,
                                               theta, theta * theta / 2.0};
            const auto a = am_phasors(spec, l, i);
            for (int k = -kmax; k <= kmax; ++k) {
                std::complex<double> ck = 0.0;
                for (int j = -spec.d0; j <= spec.d0; ++j) {
                    const int m = k - j;
                    if (m < -2 || m > 2) continue;
                    ck += a[static_cast<std::size_t>(j + spec.d0)] * e[m + 2];
                }
                auto& c = row[static_cast<std::size_t>(k + kmax)];
                c.amplitude[i] = std::abs(ck);
                c.phase[i] = beta + std::arg(ck);
                sig[static_cast<std::size_t>(k + kmax)][i] =
                    c.amplitude[i] *
                    std::cos(two_pi * (l * spec.phi.phase[i] + k * spec.phi0.phase[i]) + c.phase[i]);
            }
        }
        for (int k = -kmax; k <= kmax; ++k) {
            auto& c = row[static_cast<std::size_t>(k + kmax)];
            c.signal = RealSignal(std::move(sig[static_cast<std::size_t>(k + kmax)]), spec.fs(), spec.t0());
            out.push_back(std::move(c));
        }
    }
    return out;
}

std::vector<double> expansion_sum(const std::vector<ExpansionComponent>& components) {
    if (components.empty()) return {};
    std::vector<double> sum(components.front().signal.size(), 0.0);
    for (const auto& c : components) {
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += c.signal[i];
    }
    return sum;
}

void LocalizedNoiseSpec::validate() const {
    if (!(time_spread > 0.0)) throw InvalidArgument("noise: time_spread must be positive");
    if (!(bandwidth > 0.0)) throw InvalidArgument("noise: bandwidth must be positive");
    if (!(amplitude >= 0.0)) throw InvalidArgument("noise: amplitude must be >= 0");
    if (!(center_freq > 0.0)) throw InvalidArgument("noise: center_freq must be positive");
}

RealSignal gen_localized_noise(const LocalizedNoiseSpec& spec, std::size_t n, double fs) {
    spec.validate();
    if (!(fs > 2.0 * (spec.center_freq + spec.bandwidth / 2.0))) {
        throw InvalidArgument("noise: band up to " + fmt(spec.center_freq + spec.bandwidth / 2.0) +
                              " Hz exceeds Nyquist at fs = " + fmt(fs));
    }
    if (n == 0) throw InvalidArgument("noise: no samples");
    if (spec.amplitude == 0.0) return RealSignal(std::vector<double>(n, 0.0), fs);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> w(n);
    for (auto& v : w) v = normal(rng);

    const double lo = spec.center_freq - spec.bandwidth / 2.0;
    const double hi = spec.center_freq + spec.bandwidth / 2.0;
    const SosFilter band = lo > 0.0 ? butterworth_bandpass(4, lo, hi, fs) : butterworth_lowpass(4, hi, fs);
    auto x = filtfilt(band, w, std::min<std::size_t>(n - 1, static_cast<std::size_t>(3.0 * fs / spec.bandwidth)));

    double energy = 0.0;
    for (double v : x) energy += v * v;
    const double rms = std::sqrt(energy / static_cast<double>(n));
    const double scale = rms > 0.0 ? spec.amplitude / rms : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = static_cast<double>(i) / fs - spec.center_time;
        x[i] *= scale * std::exp(-dt * dt / (2.0 * spec.time_spread * spec.time_spread));
    }
    return RealSignal(std::move(x), fs);
}

PhaseFunction slow_phase(double mean_freq, double wander_depth, double smooth_span, std::size_t n,
                         double fs, std::uint64_t seed) {
    if (!(mean_freq > 0.0)) throw InvalidArgument("slow_phase: mean frequency must be positive");
    if (!(wander_depth >= 0.0) || !(wander_depth < mean_freq)) {
        throw InvalidArgument("slow_phase: wander depth must lie in [0, mean_freq)");
    }
    if (!(smooth_span > 0.0)) throw InvalidArgument("slow_phase: smoothing span must be positive");
    if (!(fs > 0.0) || n == 0) throw InvalidArgument("slow_phase: empty grid");

    std::vector<double> deriv(n, mean_freq);
    if (wander_depth > 0.0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> step(-1.0, 1.0);
        std::vector<double> walk(n);
        double acc = 0.0;
        for (auto& v : walk) {
            acc += step(rng);
            v = acc;
        }
        const auto width = std::max<std::size_t>(1, static_cast<std::size_t>(smooth_span * fs));
        walk = moving_average(moving_average(walk, width), width);
        double mean = 0.0;
        for (double v : walk) mean += v;
        mean /= static_cast<double>(n);
        double peak = 0.0;
        for (auto& v : walk) {
            v -= mean;
            peak = std::max(peak, std::abs(v));
        }
        if (peak > 0.0) {
            for (std::size_t i = 0; i < n; ++i) deriv[i] = mean_freq + wander_depth * walk[i] / peak;
        }
    }
    return PhaseFunction::from_derivative(std::move(deriv), fs);
}

std::vector<std::string> preset_names() { return {"semireal-a", "semireal-b"}; }

Preset make_preset(const std::string& name, const PresetOptions& opts) {
    if (!(opts.duration > 0.0) || !(opts.fs > 0.0)) {
        throw InvalidArgument("preset: duration and fs must be positive");
    }
    const auto n = static_cast<std::size_t>(std::llround(opts.duration * opts.fs));

    struct Params {
        double ihr, irr, b, beta_a;
        double harmonics[4];
        double noise_freq[2];
    };
    Params p{};
    if (name == "semireal-a") {
        p = {1.3, 0.3, 0.0, 0.0, {1.0, 0.5, 0.3, 0.1}, {2.0, 3.0}};
    } else if (name == "semireal-b") {
        p = {1.2, 0.4, 0.1, 0.5, {1.0, 0.5, 0.2, 0.05}, {3.0, 5.0}};
    } else {
        throw InvalidArgument("preset: unknown preset '" + name + "'");
    }
    if (opts.fm_depth >= 0.0) p.b = opts.fm_depth;

    const auto phi = slow_phase(p.ihr, 0.05, 10.0, n, opts.fs, opts.seed);
    const auto phi0 = slow_phase(p.irr, 0.02, 10.0, n, opts.fs, opts.seed + 1);
    auto spec = GanhmSpec::zeros(2, 4, phi, phi0);
    const double cardiac[5] = {0.0, 0.0, 1.0, 1.3, 0.3};
    for (int l = 1; l <= 4; ++l) {
        const double h = p.harmonics[l - 1];
        spec.trend[static_cast<std::size_t>(l)].assign(n, h);
        spec.riav_a[static_cast<std::size_t>(l - 1)][0].assign(n, 0.2 * h);
        spec.cardiac_phases[static_cast<std::size_t>(l)] = cardiac[l];
    }
    spec.riav_beta[0] = p.beta_a;
    spec.fm_depth.assign(n, p.b);
    spec.separation = 0.1;

    Preset out{name, std::move(spec), {}};
    const double centers[2] = {6.0, 25.0};
    for (int j = 0; j < 2; ++j) {
        LocalizedNoiseSpec ns;
        ns.center_time = centers[j];
        ns.time_spread = 1.5;
        ns.center_freq = p.noise_freq[j];
        ns.bandwidth = 0.6;
        ns.amplitude = 0.5 * opts.noise_scale;
        ns.seed = opts.seed * 1000 + 17 + static_cast<std::uint64_t>(j);
        out.noise.push_back(ns);
    }
    return out;
}

RealSignal render_preset(const Preset& preset) {
    const std::size_t n = preset.spec.size();
    auto y = synthesize_ganhm(preset.spec, n).vec();
    for (const auto& ns : preset.noise) {
        const auto noise = gen_localized_noise(ns, n, preset.spec.fs());
        for (std::size_t i = 0; i < n; ++i) y[i] += noise[i];
    }
    return RealSignal(std::move(y), preset.spec.fs(), preset.spec.t0());
}

}  // namespace tetris
