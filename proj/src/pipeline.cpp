#include "tetris/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "tetris/filters.hpp"
#include "tetris/spline.hpp"

namespace tetris {

namespace {

template <typename F>
auto run_stage(const std::string& name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError& e) {
        throw StageError(name, e.what());
    } catch (const Error& e) {
        throw Error(e.error_class(), name + ": " + e.what());
    }
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (v.size() % 2 == 0) m = (m + *std::max_element(v.begin(), mid)) / 2.0;
    return m;
}

std::vector<double> frames_to_samples(const std::vector<double>& v, const TimeAxis& time, std::size_t n) {
    if (v.size() == 1) return std::vector<double>(n, v[0]);
    std::vector<double> x(v.size());
    for (std::size_t m = 0; m < v.size(); ++m) x[m] = static_cast<double>(time.sample(m));
    const NaturalSpline spline(x, v);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = spline(static_cast<double>(i));
    return out;
}

std::vector<double> bandpass(const std::vector<double>& x, double lo, double hi, double fs) {
    const auto filter = butterworth_bandpass(4, lo, hi, fs);
    return filtfilt(filter, x, std::min<std::size_t>(x.size() - 1, static_cast<std::size_t>(3.0 * fs / lo)));
}

std::vector<double> envelope(const Extrema& ext, const RealSignal& sig) {
    const NaturalSpline spline(ext.times, ext.values);
    std::vector<double> out(sig.size());
    for (std::size_t i = 0; i < sig.size(); ++i) out[i] = spline(sig.time(i));
    return out;
}

PeakOptions peak_options(const PipelineConfig& cfg) {
    return {cfg.peak_window, cfg.peak_std_factor, cfg.min_peak_separation};
}

}  // namespace

TetrisConfig PipelineConfig::default_tetris() {
    TetrisConfig t;
    t.weak_ridge = WeakRidgePolicy::truncate;
    return t;
}

void PipelineConfig::validate() const {
    if (!(fs_target > 0.0)) throw InvalidArgument("pipeline: fs_target must be positive");
    const double nyq = fs_target / 2.0;
    auto band_ok = [&](double lo, double hi) { return lo > 0.0 && hi > lo && hi < nyq; };
    if (!(hp_cutoff > 0.0 && hp_cutoff < nyq)) throw InvalidArgument("pipeline: hp_cutoff outside (0, fs/2)");
    if (hp_order < 1) throw InvalidArgument("pipeline: hp_order must be >= 1");
    if (!band_ok(irr_lo, irr_hi)) throw InvalidArgument("pipeline: irr band must satisfy 0 < lo < hi < fs/2");
    if (!band_ok(baseline_lo, baseline_hi)) {
        throw InvalidArgument("pipeline: baseline band must satisfy 0 < lo < hi < fs/2");
    }
    if (!(irr_ref_halfband > 0.0)) throw InvalidArgument("pipeline: irr_ref_halfband must be positive");
    if (!(resp_half_bandwidth > 0.0)) throw InvalidArgument("pipeline: resp_half_bandwidth must be positive");
    if (!(min_duration >= 0.0)) throw InvalidArgument("pipeline: min_duration must be >= 0");
    if (!(peak_window > 0.0) || !(min_peak_separation > 0.0) || !(peak_std_factor >= 0.0)) {
        throw InvalidArgument("pipeline: bad peak detection parameters");
    }
    if (!(min_irr_strength >= 0.0)) throw InvalidArgument("pipeline: min_irr_strength must be >= 0");
    tetris.validate();
    samd.validate();
}

RealSignal preprocess(const RealSignal& raw, const PipelineConfig& cfg) {
    cfg.validate();
    if (!(raw.duration() > cfg.min_duration)) {
        std::ostringstream os;
        os << "signal lasts " << raw.duration() << " s, need more than " << cfg.min_duration << " s";
        throw InvalidArgument(os.str());
    }
    std::vector<double> x = raw.vec();
    if (std::abs(raw.fs() - cfg.fs_target) > 1e-9 * cfg.fs_target) {
        x = resample(x, raw.fs(), cfg.fs_target);
    }
    const auto hp = butterworth_highpass(cfg.hp_order, cfg.hp_cutoff, cfg.fs_target);
    const auto padlen = std::min<std::size_t>(x.size() - 1, static_cast<std::size_t>(3.0 * cfg.fs_target / cfg.hp_cutoff));
    x = filtfilt(hp, x, padlen, Padding::even);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    for (double& v : x) v -= mean;
    return RealSignal(std::move(x), cfg.fs_target, raw.t0());
}

Extrema detect_peaks(const RealSignal& sig, const PeakOptions& opts) {
    const std::size_t n = sig.size();
    const auto& x = sig.vec();
    std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        s1[i + 1] = s1[i] + x[i];
        s2[i + 1] = s2[i] + x[i] * x[i];
    }
    const auto half = static_cast<std::size_t>(opts.window * sig.fs() / 2.0);
    std::vector<std::size_t> cand;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(x[i] > x[i - 1] && x[i] >= x[i + 1])) continue;
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n, i + half + 1);
        const double cnt = static_cast<double>(hi - lo);
        const double mean = (s1[hi] - s1[lo]) / cnt;
        const double var = std::max(0.0, (s2[hi] - s2[lo]) / cnt - mean * mean);
        if (x[i] > mean + opts.std_factor * std::sqrt(var)) cand.push_back(i);
    }
    std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
        return x[a] != x[b] ? x[a] > x[b] : a < b;
    });
    const double min_gap = opts.min_separation * sig.fs();
    std::set<std::size_t> kept;
    for (std::size_t i : cand) {
        auto it = kept.lower_bound(i);
        if (it != kept.end() && static_cast<double>(*it - i) < min_gap) continue;
        if (it != kept.begin() && static_cast<double>(i - *std::prev(it)) < min_gap) continue;
        kept.insert(i);
    }
    if (kept.size() < 10) {
        throw StageError("cycles", "found " + std::to_string(kept.size()) + " peaks, need at least 10");
    }
    Extrema ext;
    for (std::size_t i : kept) {
        const double ym = x[i - 1], y0 = x[i], yp = x[i + 1];
        const double den = ym - 2.0 * y0 + yp;
        const double d = den != 0.0 ? 0.5 * (ym - yp) / den : 0.0;
        ext.times.push_back(sig.time(i) + d / sig.fs());
        ext.values.push_back(y0 - 0.25 * (ym - yp) * d);
    }
    return ext;
}

std::vector<double> detect_cycles(const RealSignal& sig, const PeakOptions& opts) {
    return detect_peaks(sig, opts).times;
}

std::vector<double> ihr_from_cycles(const std::vector<double>& peaks, const std::vector<double>& grid) {
    if (peaks.size() < 3) throw InvalidArgument("ihr: need at least 3 peaks");
    for (std::size_t k = 1; k < peaks.size(); ++k) {
        if (!(peaks[k] > peaks[k - 1])) {
            throw InvalidArgument("ihr: duplicate or unordered peak times at index " + std::to_string(k));
        }
    }
    std::vector<double> t, rate;
    for (std::size_t k = 1; k < peaks.size(); ++k) {
        t.push_back(peaks[k]);
        rate.push_back(1.0 / (peaks[k] - peaks[k - 1]));
    }
    const double lo = *std::min_element(rate.begin(), rate.end());
    const double hi = *std::max_element(rate.begin(), rate.end());
    const NaturalSpline spline(t, rate);
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = std::clamp(spline(grid[i]), lo, hi);
    return out;
}

RealSignal traditional_riiv(const RealSignal& sig, const PipelineConfig& cfg) {
    const auto peaks = detect_peaks(sig, peak_options(cfg));
    auto eu = envelope(peaks, sig);
    return RealSignal(bandpass(eu, cfg.baseline_lo, cfg.baseline_hi, sig.fs()), sig.fs(), sig.t0());
}

RealSignal traditional_riav(const RealSignal& sig, const PipelineConfig& cfg) {
    const auto peaks = detect_peaks(sig, peak_options(cfg));
    std::vector<double> neg(sig.size());
    for (std::size_t i = 0; i < sig.size(); ++i) neg[i] = -sig[i];
    auto troughs = detect_peaks(RealSignal(std::move(neg), sig.fs(), sig.t0()), peak_options(cfg));
    for (double& v : troughs.values) v = -v;
    const auto eu = envelope(peaks, sig);
    const auto el = envelope(troughs, sig);
    std::vector<double> d(sig.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = eu[i] - el[i];
    return RealSignal(bandpass(d, cfg.baseline_lo, cfg.baseline_hi, sig.fs()), sig.fs(), sig.t0());
}

RespiratoryOutputs extract_respiration(const RealSignal& raw, const PipelineConfig& cfg) {
    run_stage("config", [&] {
        cfg.validate();
        return 0;
    });
    auto pre = run_stage("preprocess", [&] { return preprocess(raw, cfg); });
    const std::size_t n = pre.size();
    const auto grid = sample_times(n, pre.fs(), pre.t0());
    auto peaks = run_stage("cycles", [&] { return detect_cycles(pre, peak_options(cfg)); });
    auto seed = run_stage("ihr", [&] { return ihr_from_cycles(peaks, grid); });
    auto tet = run_stage("tetris", [&] { return build_tetris(pre, seed, cfg.tetris); });

    RespiratoryOutputs out{pre, std::move(peaks), std::move(seed), {}, {}, {}, 0.0, {},
                           RealSignal({0.0}, pre.fs()), RealSignal({0.0}, pre.fs()), std::move(tet), false, {}};
    auto& tetris_out = out.tetris;
    if (tetris_out.truncated) {
        out.low_confidence = true;
        out.notes.push_back("tetris truncated at Q = " + std::to_string(tetris_out.effective_Q));
    }
    if (tetris_out.phases.empty()) {
        throw StageError("tetris", "no usable fundamental ridge in the unshifted signal");
    }
    out.ihr = tetris_out.phases.front().derivative;

    const auto& axis = tetris_out.axis;
    const auto& time = tetris_out.time;
    out.irr_ridge = run_stage("irr", [&] {
        RidgeOptions ro;
        ro.smooth_penalty = cfg.tetris.smooth_penalty;
        return extract_ridge(tetris_out.T_long, axis, cfg.irr_lo, cfg.irr_hi, ro);
    });
    {
        std::vector<double> on, frame_max;
        for (std::size_t m = 0; m < time.n; ++m) {
            const auto col = static_cast<Eigen::Index>(m);
            on.push_back(tetris_out.T_long(out.irr_ridge.bins[m], col));
            frame_max.push_back(tetris_out.T_long.col(col).maxCoeff());
        }
        const double ref = median(frame_max);
        out.irr_strength = ref > 0.0 ? median(on) / ref : 0.0;
    }
    if (!(out.irr_ridge.confidence >= cfg.tetris.confidence_floor) || !(out.irr_strength >= cfg.min_irr_strength)) {
        out.low_confidence = true;
        std::ostringstream os;
        os << "weak respiratory ridge (confidence " << out.irr_ridge.confidence << ", strength "
           << out.irr_strength << ")";
        out.notes.push_back(os.str());
    }
    out.irr = frames_to_samples(out.irr_ridge.freqs, time, n);

    std::vector<double> lo(time.n), hi(time.n);
    for (std::size_t m = 0; m < time.n; ++m) {
        lo[m] = std::clamp(out.irr_ridge.freqs[m] - cfg.irr_ref_halfband, axis.f_lo, axis.f_hi());
        hi[m] = std::clamp(out.irr_ridge.freqs[m] + cfg.irr_ref_halfband, axis.f_lo, axis.f_hi());
    }
    for (int l = 0; l <= tetris_out.effective_Q; ++l) {
        const std::string stage = "harmonic " + std::to_string(l);
        const auto& S = tetris_out.long_tfrs[static_cast<std::size_t>(l)];
        HarmonicRespiration h{l, {}, {}, {}, RealSignal({0.0}, pre.fs()), {RealSignal({0.0}, pre.fs()), {}, {}, {}, {}, 0.0},
                              RealSignal({0.0}, pre.fs())};
        h.ridge = run_stage(stage, [&] {
            RidgeOptions ro;
            ro.smooth_penalty = cfg.tetris.smooth_penalty;
            ro.reference = out.irr_ridge.freqs;
            ro.ref_weight = cfg.tetris.ref_weight;
            return extract_ridge(S.magnitude(), axis, lo, hi, ro);
        });
        const auto mode = run_stage(stage, [&] { return reconstruct_mode(S, h.ridge, cfg.resp_half_bandwidth); });
        h.am = mode.am_samples(n);
        h.phase = mode.phase_samples(n);
        const double am_max = *std::max_element(h.am.begin(), h.am.end());
        for (double& a : h.am) a = am_max > 0.0 ? std::max(a, 1e-3 * am_max) : 1.0;
        bool repaired = false;
        for (std::size_t i = 1; i < n; ++i) {
            if (!(h.phase[i] > h.phase[i - 1])) {
                h.phase[i] = h.phase[i - 1] + 1e-9;
                repaired = true;
            }
        }
        if (repaired) out.notes.push_back(stage + ": non-increasing respiratory phase repaired");

        if (l == 0) {
            h.input = pre;
        } else {
            h.input = real_part(tetris_out.shifted[static_cast<std::size_t>(l)]);
        }
        h.samd = run_stage("samd " + std::to_string(l), [&] { return samd_fit(h.input, h.am, h.phase, cfg.samd); });
        h.surrogate = h.samd.component;
        out.harmonics.push_back(std::move(h));
    }

    out.triiv = run_stage("baseline", [&] { return traditional_riiv(pre, cfg); });
    out.triav = run_stage("baseline", [&] { return traditional_riav(pre, cfg); });
    return out;
}

}  // namespace tetris
