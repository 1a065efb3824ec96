#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>

#include "oracles.hpp"
#include "tetris/tf.hpp"

using namespace tetris;

namespace {

constexpr double fs = 50.0;
const FreqAxis axis = FreqAxis::fft_grid(fs, 4096, 8.0);

bool interior(const TimeAxis& t, std::size_t m, double L, double duration) {
    const double tm = t.time(m);
    return tm > L / 2.0 && tm < duration - L / 2.0;
}

ComplexSignal as_complex(const std::vector<double>& x) { return to_complex(RealSignal(x, fs)); }

SstOptions hop(std::size_t h, std::optional<double> gamma = {}) {
    SstOptions o;
    o.hop = h;
    o.gamma = gamma;
    return o;
}

}  // namespace

TEST(Window, SigmaTapsAndNorm) {
    EXPECT_DOUBLE_EQ(gaussian_window(12.0, fs).sigma, 1.0);
    const auto w = gaussian_window(10.0, fs);
    ASSERT_EQ(w.taps.size(), 501u);
    double e = 0.0;
    for (std::size_t j = 0; j < w.taps.size(); ++j) {
        EXPECT_DOUBLE_EQ(w.taps[j], w.taps[w.taps.size() - 1 - j]);
        e += w.taps[j] * w.taps[j];
    }
    EXPECT_NEAR(e, 1.0, 1e-12);
    EXPECT_THROW(gaussian_window(0.0, fs), InvalidArgument);
}

TEST(Window, TransformMatchesNumericIntegral) {
    const auto w = gaussian_window(10.0, fs);
    for (double eta : {0.0, 0.05, 0.1, 0.2}) {
        std::complex<double> acc = 0.0;
        const auto J = static_cast<double>(w.half_length());
        for (std::size_t j = 0; j < w.taps.size(); ++j) {
            const double u = (static_cast<double>(j) - J) / fs;
            acc += w.taps[j] * std::polar(1.0, -oracle::two_pi * eta * u) / fs;
        }
        // The 6-sigma truncation leaves a tail of about erfc(6 / sqrt(2)).
        EXPECT_NEAR(acc.real(), w.ft(eta), 1e-8 * w.ft(0.0));
    }
}

TEST(Stft, FftRouteMatchesPlainSum) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    std::vector<double> x(1500);
    for (auto& v : x) v = n01(rng);
    const auto w = gaussian_window(10.0, fs);
    const auto V = stft(RealSignal(x, fs), w, axis, 25);
    for (std::size_t m = 0; m < V.time.n; ++m) {
        const std::size_t c = V.time.sample(m);
        if (c < w.half_length() || c + w.half_length() >= x.size()) continue;
        for (std::size_t k = 0; k < axis.n; k += 37) {
            const auto ref = oracle::stft_sum(x, fs, w.taps, c, axis.freq(k));
            const auto got = V.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
            EXPECT_LT(std::abs(got - ref), 1e-10 * (1.0 + std::abs(ref)));
            const std::vector<cplx> xc(x.begin(), x.end());
            EXPECT_LT(std::abs(stft_direct(xc, fs, w, c, axis.freq(k)) - ref), 1e-10 * (1.0 + std::abs(ref)));
        }
    }
}

TEST(Stft, LinearAndModulusInvariant) {
    const auto w = gaussian_window(10.0, fs);
    const auto a = oracle::tone(1.3, 1500, fs);
    std::vector<double> b(1500);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::sin(0.37 * static_cast<double>(i)) * 0.5;
    std::vector<double> mix(1500);
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.0 * a[i] - 3.0 * b[i];
    const auto Va = stft(RealSignal(a, fs), w, axis, 10).values;
    const auto Vb = stft(RealSignal(b, fs), w, axis, 10).values;
    const auto Vm = stft(RealSignal(mix, fs), w, axis, 10).values;
    EXPECT_LT((Vm - (2.0 * Va - 3.0 * Vb)).norm(), 1e-10 * Vm.norm());

    std::vector<cplx> rot(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) rot[i] = a[i] * std::polar(1.0, 0.9);
    const auto Vr = stft(ComplexSignal(rot, fs), w, axis, 10).values;
    EXPECT_LT((Vr.cwiseAbs() - Va.cwiseAbs()).cwiseAbs().maxCoeff(), 1e-10 * Va.cwiseAbs().maxCoeff());
}

TEST(Stft, ToneLocalisesWithHalfWindowPeak) {
    const auto w = gaussian_window(10.0, fs);
    const auto V = stft(RealSignal(oracle::tone(1.3, 3000, fs), fs), w, axis, 5);
    const auto mag = V.magnitude();
    const std::size_t kf = axis.nearest(1.3);
    for (std::size_t m = 0; m < V.time.n; ++m) {
        if (!interior(V.time, m, 10.0, 60.0)) continue;
        Eigen::Index k;
        const double peak = mag.col(static_cast<Eigen::Index>(m)).maxCoeff(&k);
        EXPECT_LE(std::abs(static_cast<long>(k) - static_cast<long>(kf)), 1);
        EXPECT_NEAR(peak, w.ft(0.0) / 2.0, 0.02 * w.ft(0.0) / 2.0);
    }
    const auto Z = stft(RealSignal(std::vector<double>(800, 0.0), fs), w, axis, 5);
    EXPECT_EQ(Z.values.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(stft(RealSignal(std::vector<double>(800, 0.0), fs), w, FreqAxis{1.0, 1.0, 30}), InvalidArgument);
}

TEST(Sst, ConservesThresholdedMassPerFrame) {
    const auto w = gaussian_window(10.0, fs);
    const auto x = as_complex(oracle::tone(1.3, 2000, fs));
    const auto S = sst(x, w, axis, hop(20));
    const auto V = stft(x, w, axis, 20);
    for (Eigen::Index m = 0; m < S.values.cols(); ++m) {
        if (!interior(S.time, static_cast<std::size_t>(m), 10.0, 40.0)) continue;
        cplx sv{}, vv{};
        for (Eigen::Index k = 0; k < S.values.rows(); ++k) {
            sv += S.values(k, m);
            if (std::abs(V.values(k, m)) > S.threshold) vv += V.values(k, m);
        }
        EXPECT_LT(std::abs(sv - vv), 1e-6 * std::abs(vv));
    }
}

TEST(Sst, ToneEnergyWithinTwoBins) {
    const auto w = gaussian_window(10.0, fs);
    const auto S = sst(RealSignal(oracle::tone(1.3, 3000, fs), fs), w, axis, hop(5));
    const std::size_t kf = axis.nearest(1.3);
    double near = 0.0, total = 0.0;
    for (std::size_t m = 0; m < S.time.n; ++m) {
        if (!interior(S.time, m, 10.0, 60.0)) continue;
        for (std::size_t k = 0; k < axis.n; ++k) {
            const double e = std::norm(S.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)));
            total += e;
            if (k + 2 >= kf && k <= kf + 2) near += e;
        }
    }
    EXPECT_GE(near / total, 0.95);
}

TEST(Sst, ChirpRidgeTracksTruth) {
    const std::size_t n = 3000;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        x[i] = std::cos(oracle::two_pi * (t + 0.01 * t * t));
    }
    const auto w = gaussian_window(10.0, fs);
    const auto S = sst(RealSignal(x, fs), w, axis, hop(5));
    const auto r = extract_ridge(S.magnitude(), axis, 0.5, 2.5);
    for (std::size_t m = 0; m < S.time.n; ++m) {
        if (!interior(S.time, m, 10.0, 60.0)) continue;
        const double truth = 1.0 + 0.02 * S.time.time(m);
        EXPECT_LE(std::abs(r.freqs[m] - truth), 2.0 * axis.df) << S.time.time(m);
    }
}

TEST(Sst, ThresholdAboveMaximumSilences) {
    const auto w = gaussian_window(10.0, fs);
    const auto S = sst(RealSignal(oracle::tone(1.3, 1000, fs), fs), w, axis, hop(5, 1e3));
    EXPECT_EQ(S.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Ridge, DynamicProgramMatchesExhaustiveSearch) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const FreqAxis small{1.0, 1.0, 6};
    for (int trial = 0; trial < 40; ++trial) {
        Eigen::MatrixXd mag(6, 6);
        for (Eigen::Index i = 0; i < mag.size(); ++i) mag.data()[i] = u(rng);
        const double lambda = trial % 3 == 0 ? 0.0 : 0.3 * u(rng);
        const double mu = trial % 2 == 0 ? 0.0 : 0.2 * u(rng);
        std::vector<double> ref_bins, ref_hz;
        if (mu > 0.0) {
            for (int m = 0; m < 6; ++m) {
                ref_bins.push_back(5.0 * u(rng));
                ref_hz.push_back(small.f_lo + ref_bins.back());
            }
        }
        RidgeOptions o;
        o.smooth_penalty = lambda;
        o.reference = ref_hz;
        o.ref_weight = mu;
        const auto r = extract_ridge(mag, small, 1.0, 6.0, o);
        const auto best = oracle::brute_ridge(mag, lambda, mu > 0.0 ? ref_bins : std::vector<double>{}, mu);
        EXPECT_NEAR(ridge_objective(mag, r.bins, lambda, ref_bins, mu),
                    ridge_objective(mag, best, lambda, ref_bins, mu), 1e-12);
    }
}

TEST(Ridge, NoPenaltyIsColumnArgmaxInBand) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const FreqAxis small{0.5, 0.25, 20};
    Eigen::MatrixXd mag(20, 30);
    for (Eigen::Index i = 0; i < mag.size(); ++i) mag.data()[i] = u(rng);
    RidgeOptions o;
    o.smooth_penalty = 0.0;
    const auto r = extract_ridge(mag, small, 1.0, 3.0, o);
    const auto k0 = small.nearest(1.0), k1 = small.nearest(3.0);
    for (Eigen::Index m = 0; m < 30; ++m) {
        Eigen::Index k;
        mag.col(m).segment(static_cast<Eigen::Index>(k0), static_cast<Eigen::Index>(k1 - k0 + 1)).maxCoeff(&k);
        EXPECT_EQ(r.bins[static_cast<std::size_t>(m)], static_cast<int>(k0) + k);
    }
    EXPECT_THROW(extract_ridge(mag, small, 3.0, 1.0), InvalidArgument);
}

TEST(Ridge, ToneGivesConstantRidgeAndReferenceSelectsWeakerTone) {
    const std::size_t n = 2000;
    const auto strong = oracle::tone(1.0, n, fs);
    const auto weak = oracle::tone(2.0, n, fs, 0.3);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = strong[i] + weak[i];
    const auto w = gaussian_window(10.0, fs);
    const auto mag = stft(RealSignal(x, fs), w, axis, 10).magnitude();

    const auto free = extract_ridge(mag, axis, 0.5, 2.5);
    RidgeOptions o;
    o.reference.assign(free.freqs.size(), 2.0);
    o.ref_weight = 10.0;
    const auto locked = extract_ridge(mag, axis, 0.5, 2.5, o);
    for (std::size_t m = 0; m < free.bins.size(); ++m) {
        EXPECT_EQ(free.bins[m], static_cast<int>(axis.nearest(1.0)));
        EXPECT_EQ(locked.bins[m], static_cast<int>(axis.nearest(2.0)));
    }
}

TEST(Reconstruction, UnitToneAmplitudeAndFrequency) {
    const auto w = gaussian_window(10.0, fs);
    const auto S = sst(RealSignal(oracle::tone(1.3, 3000, fs), fs), w, axis, hop(5));
    const auto r = extract_ridge(S.magnitude(), axis, 1.0, 1.6);
    const auto mode = reconstruct_mode(S, r, 0.5);
    for (std::size_t m = 1; m < S.time.n; ++m) {
        if (!interior(S.time, m, 10.0, 60.0) || !interior(S.time, m - 1, 10.0, 60.0)) continue;
        EXPECT_NEAR(mode.am[m], 1.0, 0.02);
        const double f = (mode.phase[m] - mode.phase[m - 1]) / (S.time.time(m) - S.time.time(m - 1));
        EXPECT_NEAR(f, 1.3, 0.013);
    }
}

TEST(Reconstruction, RampAmplitudeWithinThreePercent) {
    const std::size_t n = 3000;
    const double T = 60.0;
    std::vector<double> x(n), am(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        am[i] = 1.0 + 0.3 * t / T;
        x[i] = am[i] * std::cos(oracle::two_pi * (1.3 * t + 0.1 * 30.0 / oracle::two_pi * (1.0 - std::cos(oracle::two_pi * t / 30.0))));
    }
    const auto w = gaussian_window(10.0, fs);
    const auto S = sst(RealSignal(x, fs), w, axis, hop(5));
    const auto r = extract_ridge(S.magnitude(), axis, 0.9, 1.7);
    const auto mode = reconstruct_mode(S, r, 0.5);
    double num = 0.0, den = 0.0;
    for (std::size_t m = 0; m < S.time.n; ++m) {
        const double t = S.time.time(m);
        if (t < 0.1 * T || t > 0.9 * T) continue;
        const double truth = am[S.time.sample(m)];
        num += (mode.am[m] - truth) * (mode.am[m] - truth);
        den += truth * truth;
    }
    EXPECT_LE(std::sqrt(num / den), 0.03);
}

TEST(Reconstruction, ZeroTfrGivesZeroMode) {
    const auto w = gaussian_window(10.0, fs);
    const auto S = sst(RealSignal(std::vector<double>(1000, 0.0), fs), w, axis, hop(5));
    Ridge r;
    r.freqs.assign(S.time.n, 1.3);
    r.bins.assign(S.time.n, static_cast<int>(axis.nearest(1.3)));
    const auto mode = reconstruct_mode(S, r, 0.5);
    for (double a : mode.am) EXPECT_EQ(a, 0.0);
}
