#include "tetris/tetris.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace tetris {

namespace {

using std::numbers::pi;
constexpr double two_pi = 2.0 * pi;

std::size_t next_pow2(double x) {
    std::size_t n = 1;
    while (static_cast<double>(n) < x) n <<= 1;
    return n;
}

PhaseFunction phase_from_samples(std::vector<double> phase, double fs, double t0) {
    PhaseFunction pf;
    pf.fs = fs;
    pf.t0 = t0;
    const std::size_t n = phase.size();
    pf.derivative.assign(n, 0.0);
    if (n >= 2) {
        pf.derivative[0] = (phase[1] - phase[0]) * fs;
        pf.derivative[n - 1] = (phase[n - 1] - phase[n - 2]) * fs;
        for (std::size_t i = 1; i + 1 < n; ++i) pf.derivative[i] = (phase[i + 1] - phase[i - 1]) * fs / 2.0;
    }
    pf.phase = std::move(phase);
    return pf;
}

}  // namespace

void TetrisConfig::validate() const {
    if (Q < 0) throw InvalidArgument("tetris: Q must be >= 0");
    if (!weights.empty()) {
        if (weights.size() != static_cast<std::size_t>(Q + 1)) {
            throw InvalidArgument("tetris: expected Q + 1 = " + std::to_string(Q + 1) + " weights, got " +
                                  std::to_string(weights.size()));
        }
        for (double w : weights) {
            if (!(w > 0.0)) throw InvalidArgument("tetris: weights must be positive");
        }
    }
    if (!(p >= 1.0)) throw InvalidArgument("tetris: p must be >= 1");
    if (!(window_short_L > 0.0) || !(window_long_L > 0.0)) {
        throw InvalidArgument("tetris: window spans must be positive");
    }
    if (hop == 0) throw InvalidArgument("tetris: hop must be >= 1");
    if (!(f_max > 0.0)) throw InvalidArgument("tetris: f_max must be positive");
    if (!(ridge_halfband > 0.0)) throw InvalidArgument("tetris: ridge half band must be positive");
    if (!(mode_half_bandwidth > 0.0)) throw InvalidArgument("tetris: mode half bandwidth must be positive");
    if (!(confidence_floor >= 0.0)) throw InvalidArgument("tetris: confidence floor must be >= 0");
    if (!(gamma_rel >= 0.0)) throw InvalidArgument("tetris: gamma_rel must be >= 0");
}

std::vector<double> TetrisConfig::weight_vector() const {
    return weights.empty() ? std::vector<double>(static_cast<std::size_t>(Q + 1), 1.0) : weights;
}

FreqAxis TetrisConfig::axis(double fs) const {
    const std::size_t n = nfft ? nfft : next_pow2(8.0 * window_short_L * fs);
    return FreqAxis::fft_grid(fs, n, f_max);
}

ComplexSignal shift_down(const ComplexSignal& sig, std::span<const double> psi) {
    if (psi.size() != sig.size()) {
        throw InvalidArgument("shift_down: phase has " + std::to_string(psi.size()) +
                              " samples, signal has " + std::to_string(sig.size()));
    }
    std::vector<cplx> out(sig.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double frac = psi[i] - std::floor(psi[i]);
        out[i] = sig[i] * std::polar(1.0, -two_pi * frac);
    }
    return ComplexSignal(std::move(out), sig.fs(), sig.t0());
}

ComplexSignal shift_down(const ComplexSignal& sig, const PhaseFunction& psi) {
    return shift_down(sig, std::span<const double>(psi.phase));
}

ComplexSignal shift_down(const RealSignal& sig, const PhaseFunction& psi) {
    return shift_down(to_complex(sig), psi);
}

Tessellation::Tessellation(std::vector<double> ihr, int d1) : ihr_(std::move(ihr)), d1_(d1) {
    if (d1 < 1) throw InvalidArgument("tessellation: d1 must be >= 1");
    for (std::size_t m = 0; m < ihr_.size(); ++m) {
        if (!(ihr_[m] > 0.0) || !std::isfinite(ihr_[m])) {
            throw InvalidArgument("tessellation: heart rate not positive at frame " + std::to_string(m));
        }
    }
}

int Tessellation::region_of(std::size_t m, double xi) const {
    const double f = ihr_.at(m);
    if (!(xi > 0.0)) return 0;
    const double q = xi / f;
    if (q > d1_ + 1.0) return d1_ + 1;
    auto j = static_cast<int>(std::ceil(q));
    if (j < 1) j = 1;
    while (j > 1 && xi <= (j - 1) * f) --j;
    while (xi > j * f) ++j;
    return j > d1_ ? d1_ + 1 : j;
}

Tessellation tessellate(const Ridge& ihr, int d1) { return Tessellation(ihr.freqs, d1); }

Eigen::MatrixXd ensemble(const std::vector<const Eigen::MatrixXd*>& mags,
                         const std::vector<double>& weights, double p) {
    if (mags.empty()) throw InvalidArgument("ensemble: no inputs");
    if (weights.size() != mags.size()) throw InvalidArgument("ensemble: weight count mismatch");
    if (!(p >= 1.0)) throw InvalidArgument("ensemble: p must be >= 1");
    double wsum = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw InvalidArgument("ensemble: weights must be positive");
        wsum += w;
    }
    const auto rows = mags[0]->rows(), cols = mags[0]->cols();
    for (const auto* m : mags) {
        if (m->rows() != rows || m->cols() != cols) throw InvalidArgument("ensemble: shape mismatch");
    }
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(rows, cols);
    if (p == 1.0) {
        for (std::size_t k = 0; k < mags.size(); ++k) acc += weights[k] * *mags[k];
        return acc / wsum;
    }
    for (std::size_t k = 0; k < mags.size(); ++k) acc += weights[k] * mags[k]->array().pow(p).matrix();
    return (acc / wsum).array().pow(1.0 / p).matrix();
}

TetrisOutput build_tetris(const ComplexSignal& sig, std::span<const double> ihr_seed,
                          const TetrisConfig& cfg) {
    cfg.validate();
    if (!(sig.duration() > cfg.window_long_L)) {
        std::ostringstream os;
        os << "tetris: signal duration " << sig.duration() << " s does not exceed the long window "
           << cfg.window_long_L << " s";
        throw InvalidArgument(os.str());
    }
    if (ihr_seed.size() != sig.size()) throw InvalidArgument("tetris: heart-rate seed length mismatch");

    TetrisOutput out;
    out.config = cfg;
    out.axis = cfg.axis(sig.fs());
    out.time = TimeAxis::frames(sig.size(), sig.fs(), sig.t0(), cfg.hop);
    const auto w_short = gaussian_window(cfg.window_short_L, sig.fs());
    const auto w_long = gaussian_window(cfg.window_long_L, sig.fs());
    SstOptions sopts;
    sopts.hop = cfg.hop;
    sopts.gamma_rel = cfg.gamma_rel;

    std::vector<double> ref(out.time.n);
    for (std::size_t m = 0; m < out.time.n; ++m) ref[m] = ihr_seed[out.time.sample(m)];

    ComplexSignal current = sig;
    out.effective_Q = cfg.Q;
    for (int k = 0; k <= cfg.Q; ++k) {
        out.shifted.push_back(current);
        out.short_tfrs.push_back(sst(current, w_short, out.axis, sopts));
        out.long_tfrs.push_back(sst(current, w_long, out.axis, sopts));

        std::vector<double> lo(out.time.n), hi(out.time.n);
        for (std::size_t m = 0; m < out.time.n; ++m) {
            lo[m] = std::clamp(ref[m] - cfg.ridge_halfband, out.axis.f_lo, out.axis.f_hi());
            hi[m] = std::clamp(ref[m] + cfg.ridge_halfband, out.axis.f_lo, out.axis.f_hi());
        }
        RidgeOptions ropts;
        ropts.smooth_penalty = cfg.smooth_penalty;
        ropts.reference = ref;
        ropts.ref_weight = cfg.ref_weight;
        auto ridge = extract_ridge(out.short_tfrs.back().magnitude(), out.axis, lo, hi, ropts);

        if (k < cfg.Q && !(ridge.confidence >= cfg.confidence_floor)) {
            std::ostringstream os;
            os << "weak fundamental ridge at shift k = " << k << " (confidence " << ridge.confidence
               << " below floor " << cfg.confidence_floor << ")";
            if (cfg.weak_ridge == WeakRidgePolicy::abort) throw StageError("tetris", os.str());
            out.ihr_ridges.push_back(std::move(ridge));
            out.effective_Q = k;
            out.truncated = true;
            break;
        }

        const auto mode = reconstruct_mode(out.short_tfrs.back(), ridge, cfg.mode_half_bandwidth);
        out.phases.push_back(phase_from_samples(mode.phase_samples(sig.size()), sig.fs(), sig.t0()));
        ref = ridge.freqs;
        out.ihr_ridges.push_back(std::move(ridge));
        if (k < cfg.Q) current = shift_down(current, out.phases.back());
    }

    const auto all_w = cfg.weight_vector();
    const std::vector<double> w(all_w.begin(), all_w.begin() + out.effective_Q + 1);
    std::vector<Eigen::MatrixXd> long_mag, short_mag;
    for (int k = 0; k <= out.effective_Q; ++k) {
        long_mag.push_back(out.long_tfrs[static_cast<std::size_t>(k)].magnitude());
        short_mag.push_back(out.short_tfrs[static_cast<std::size_t>(k)].magnitude());
    }
    std::vector<const Eigen::MatrixXd*> lp, sp;
    for (std::size_t k = 0; k < long_mag.size(); ++k) {
        lp.push_back(&long_mag[k]);
        sp.push_back(&short_mag[k]);
    }
    out.T_long = ensemble(lp, w, cfg.p);
    out.T_short = ensemble(sp, w, cfg.p);
    return out;
}

TetrisOutput build_tetris(const RealSignal& sig, std::span<const double> ihr_seed, const TetrisConfig& cfg) {
    return build_tetris(to_complex(sig), ihr_seed, cfg);
}

bool DecorrelationReport::all_pass() const {
    return !points.empty() && std::all_of(points.begin(), points.end(), [](const auto& p) { return p.pass; });
}

bool DecorrelationReport::any_fail() const {
    return std::any_of(points.begin(), points.end(), [](const auto& p) { return !p.pass; });
}

double window_support_halfwidth(const GaussianWindow& w, double level) {
    return std::sqrt(-std::log(level) / (2.0 * pi * pi * w.sigma * w.sigma));
}

DecorrelationReport verify_noise_decorrelation(const DecorrelationOptions& opts) {
    if (opts.n_realizations < 2) throw InvalidArgument("decorrelation: need at least 2 realizations");
    if (opts.times.empty() || opts.freqs.empty()) throw InvalidArgument("decorrelation: empty grid");
    if (!(opts.f0 >= 0.0)) throw InvalidArgument("decorrelation: f0 must be >= 0");

    DecorrelationReport rep;
    rep.options = opts;
    const auto w = gaussian_window(opts.L, opts.fs);
    rep.support_halfwidth = window_support_halfwidth(w);
    rep.precondition_ok = rep.support_halfwidth < opts.f0;
    if (opts.enforce_precondition && !rep.precondition_ok) {
        std::ostringstream os;
        os << "decorrelation: window support half-width " << rep.support_halfwidth
           << " Hz is not narrower than the shift " << opts.f0 << " Hz";
        throw InvalidArgument(os.str());
    }

    const std::size_t J = w.half_length();
    const double t_max = *std::max_element(opts.times.begin(), opts.times.end());
    const double t_min = *std::min_element(opts.times.begin(), opts.times.end());
    if (t_min < 0.0) throw InvalidArgument("decorrelation: grid times must be >= 0");
    const std::size_t offset = J;
    const auto n = static_cast<std::size_t>(std::ceil(t_max * opts.fs)) + 2 * J + 1;

    struct Acc {
        cplx s1{}, s2{}, s12{}, p12{};
        double e1 = 0.0, e2 = 0.0;
    };
    const std::size_t npts = opts.times.size() * opts.freqs.size();
    std::vector<Acc> acc(npts);
    std::vector<std::vector<cplx>> kernel(npts);
    std::vector<std::size_t> centers(npts);
    for (std::size_t a = 0; a < opts.times.size(); ++a) {
        for (std::size_t b = 0; b < opts.freqs.size(); ++b) {
            const std::size_t idx = a * opts.freqs.size() + b;
            centers[idx] = offset + static_cast<std::size_t>(std::llround(opts.times[a] * opts.fs));
            auto& ker = kernel[idx];
            ker.resize(w.taps.size());
            for (std::size_t j = 0; j < w.taps.size(); ++j) {
                const double u = (static_cast<double>(j) - static_cast<double>(J)) / opts.fs;
                ker[j] = w.taps[j] * std::polar(1.0, -two_pi * opts.freqs[b] * u) / opts.fs;
            }
        }
    }
    std::vector<cplx> shift(n);
    for (std::size_t i = 0; i < n; ++i) {
        shift[i] = std::polar(1.0, -two_pi * opts.f0 * static_cast<double>(i) / opts.fs);
    }

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> noise(n);
    for (int r = 0; r < opts.n_realizations; ++r) {
        for (auto& v : noise) v = normal(rng);
        for (std::size_t idx = 0; idx < npts; ++idx) {
            const std::size_t c = centers[idx];
            cplx v1{}, v2{};
            for (std::size_t j = 0; j < kernel[idx].size(); ++j) {
                const std::size_t i = c + j - J;
                const cplx term = noise[i] * kernel[idx][j];
                v1 += term;
                v2 += term * shift[i];
            }
            auto& a = acc[idx];
            a.s1 += v1;
            a.s2 += v2;
            a.s12 += v1 * std::conj(v2);
            a.p12 += v1 * v2;
            a.e1 += std::norm(v1);
            a.e2 += std::norm(v2);
        }
    }

    const double nr = opts.n_realizations;
    double mean_v1 = 0.0, mean_v2 = 0.0;
    for (std::size_t a = 0; a < opts.times.size(); ++a) {
        for (std::size_t b = 0; b < opts.freqs.size(); ++b) {
            const auto& s = acc[a * opts.freqs.size() + b];
            const cplx m1 = s.s1 / nr, m2 = s.s2 / nr;
            DecorrelationPoint pt;
            pt.t = opts.times[a];
            pt.xi = opts.freqs[b];
            pt.var_plain = s.e1 / nr - std::norm(m1);
            pt.var_shifted = s.e2 / nr - std::norm(m2);
            pt.cov = std::abs(s.s12 / nr - m1 * std::conj(m2));
            pt.pcov = std::abs(s.p12 / nr - m1 * m2);
            pt.bound = 3.0 / std::sqrt(nr) * std::sqrt(pt.var_plain * pt.var_shifted);
            pt.pass = pt.cov <= pt.bound && pt.pcov <= pt.bound;
            mean_v1 += pt.var_plain;
            mean_v2 += pt.var_shifted;
            rep.points.push_back(pt);
        }
    }
    rep.variance_mismatch = std::abs(mean_v1 - mean_v2) / mean_v1;
    rep.variances_agree = rep.variance_mismatch <= 3.0 / std::sqrt(nr);
    return rep;
}

}  // namespace tetris
