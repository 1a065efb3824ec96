#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tetris/samd.hpp"

using namespace tetris;

namespace {

constexpr double fs = 50.0;

struct Fixture {
    std::vector<double> am, phase, tau;
};

Fixture slow_mode(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double f = 0.2 + 0.2 * u(rng), depth = 0.02 * u(rng), am_depth = 0.3 * u(rng);
    const double pa = u(rng) * oracle::two_pi, pf = u(rng) * oracle::two_pi;
    Fixture fx;
    fx.am.resize(n);
    fx.tau.resize(n);
    std::vector<double> rate(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        fx.am[i] = 1.0 + am_depth * std::cos(oracle::two_pi * t / 23.0 + pa);
        rate[i] = f + depth * std::sin(oracle::two_pi * t / 31.0 + pf);
        fx.tau[i] = 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
    }
    fx.phase = PhaseFunction::from_derivative(rate, fs).phase;
    return fx;
}

Eigen::MatrixXd dictionary(const Fixture& fx, int D, int P) {
    const auto n = static_cast<Eigen::Index>(fx.am.size());
    Eigen::MatrixXd X(n, 2 * D * (P + 1) + P + 1);
    Eigen::Index c = 0;
    for (int l = 1; l <= D; ++l) {
        for (int j = 0; j <= P; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto s = static_cast<std::size_t>(i);
                const double base = std::pow(fx.tau[s], j) * fx.am[s];
                X(i, c) = base * std::cos(oracle::two_pi * l * fx.phase[s]);
                X(i, c + 1) = base * std::sin(oracle::two_pi * l * fx.phase[s]);
            }
            c += 2;
        }
    }
    for (int j = 0; j <= P; ++j, ++c) {
        for (Eigen::Index i = 0; i < n; ++i) X(i, c) = std::pow(fx.tau[static_cast<std::size_t>(i)], j);
    }
    return X;
}

}  // namespace

TEST(Samd, SingleHarmonicInDictionaryIsExact) {
    const std::size_t n = 3000;
    const auto fx = slow_mode(n, 1);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = fx.am[i] * std::cos(oracle::two_pi * fx.phase[i]);
    const auto r = samd_fit(RealSignal(x, fs), fx.am, fx.phase, {1, 0, 0.0});
    EXPECT_LE(oracle::rel_rmse(r.component.vec(), x), 1e-8);

    // The default Tikhonov term shrinks unit-norm columns by about ridge_reg.
    const auto reg = samd_fit(RealSignal(x, fs), fx.am, fx.phase, {1, 0});
    EXPECT_LE(oracle::rel_rmse(reg.component.vec(), x), 2e-8);
}

TEST(Samd, TwoHarmonicsWithTrendExcluded) {
    const std::size_t n = 3000;
    const auto fx = slow_mode(n, 2);
    std::vector<double> x(n), osc(n);
    for (std::size_t i = 0; i < n; ++i) {
        osc[i] = fx.am[i] * std::cos(oracle::two_pi * fx.phase[i]) +
                 0.3 * fx.am[i] * std::cos(2.0 * oracle::two_pi * fx.phase[i] + 1.0);
        x[i] = osc[i] + 0.5 + 0.8 * fx.tau[i];
    }
    const auto r = samd_fit(RealSignal(x, fs), fx.am, fx.phase, {2, 1});
    EXPECT_LE(oracle::rel_rmse(r.component.vec(), osc), 1e-6);
    ASSERT_EQ(r.trend_coeffs.size(), 2u);
    EXPECT_NEAR(r.trend_coeffs[0], 0.5, 1e-6);
    EXPECT_NEAR(r.trend_coeffs[1], 0.8, 1e-6);
    ASSERT_EQ(r.harmonics.size(), 2u);
}

TEST(Samd, RandomInModelSpecsRecovered) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    const std::size_t n = 3000;
    for (int D = 1; D <= 4; ++D) {
        for (int P = 0; P <= 3; ++P) {
            const auto fx = slow_mode(n, static_cast<std::uint64_t>(10 * D + P));
            const auto X = dictionary(fx, D, P);
            Eigen::VectorXd beta(X.cols());
            for (Eigen::Index c = 0; c < beta.size(); ++c) beta(c) = g(rng);
            const Eigen::VectorXd y = X * beta;
            const auto osc_cols = X.cols() - (P + 1);
            const Eigen::VectorXd osc = X.leftCols(osc_cols) * beta.head(osc_cols);
            const std::vector<double> ys(y.data(), y.data() + y.size());
            const std::vector<double> os(osc.data(), osc.data() + osc.size());
            const auto r = samd_fit(RealSignal(ys, fs), fx.am, fx.phase, {D, P});
            EXPECT_LE(oracle::rel_rmse(r.component.vec(), os), 1e-6) << "D " << D << " P " << P;
        }
    }
}

TEST(Samd, ResidualOrthogonalToDictionary) {
    const std::size_t n = 2500;
    const auto fx = slow_mode(n, 4);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    std::vector<double> x(n);
    for (auto& v : x) v = g(rng);
    SamdConfig cfg{2, 2, 0.0};
    const auto r = samd_fit(RealSignal(x, fs), fx.am, fx.phase, cfg);
    const auto X = dictionary(fx, 2, 2);
    Eigen::VectorXd resid(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) resid(static_cast<Eigen::Index>(i)) = x[i] - r.component[i] - r.trend[i];
    const double xn = std::sqrt(oracle::energy(x));
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        EXPECT_LE(std::abs(X.col(c).dot(resid)), 1e-8 * xn * X.col(c).norm()) << "column " << c;
    }

    // Second route: unregularised Householder QR on the raw dictionary.
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd beta = X.householderQr().solve(xv);
    const auto osc_cols = X.cols() - 3;
    const Eigen::VectorXd osc = X.leftCols(osc_cols) * beta.head(osc_cols);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(r.component[i], osc(static_cast<Eigen::Index>(i)), 1e-8);
}

TEST(Samd, Idempotent) {
    const std::size_t n = 2500;
    const auto fx = slow_mode(n, 5);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    std::vector<double> x(n);
    for (auto& v : x) v = g(rng);
    const auto first = samd_fit(RealSignal(x, fs), fx.am, fx.phase);
    const auto second = samd_fit(first.component, fx.am, fx.phase);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(second.component[i], first.component[i], 1e-8);
}

TEST(Samd, WhiteNoiseEnergyBoundedByProjectionDimension) {
    const std::size_t n = 3000;
    Fixture fx = slow_mode(n, 6);
    fx.am.assign(n, 1.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g;
        std::vector<double> x(n);
        for (auto& v : x) v = g(rng);
        const SamdConfig cfg;
        const auto r = samd_fit(RealSignal(x, fs), fx.am, fx.phase, cfg);
        const double bound = static_cast<double>(cfg.columns()) / static_cast<double>(n) * oracle::energy(x) * 3.0;
        EXPECT_LE(oracle::energy(r.component.vec()), bound);
    }
}

TEST(Samd, PreconditionsAndConditioning) {
    const std::size_t n = 500;
    const auto fx = slow_mode(n, 8);
    const RealSignal x(std::vector<double>(n, 1.0), fs);
    auto am = fx.am;
    am[10] = 0.0;
    EXPECT_THROW(samd_fit(x, am, fx.phase), InvalidArgument);
    auto ph = fx.phase;
    ph[20] = ph[19];
    EXPECT_THROW(samd_fit(x, fx.am, ph), InvalidArgument);
    EXPECT_THROW(samd_fit(x, std::vector<double>(n - 1, 1.0), fx.phase), InvalidArgument);
    EXPECT_THROW(samd_fit(x, fx.am, fx.phase, {0, 1}), InvalidArgument);

    // A phase that barely moves makes cos/sin columns collinear with the trend.
    std::vector<double> flat(n);
    for (std::size_t i = 0; i < n; ++i) flat[i] = 1e-9 * static_cast<double>(i);
    SamdConfig cfg{2, 2, 0.0, 1e8};
    try {
        samd_fit(x, std::vector<double>(n, 1.0), flat, cfg);
        FAIL() << "expected StageError";
    } catch (const StageError& e) {
        EXPECT_NE(std::string(e.what()).find("condition number"), std::string::npos) << e.what();
    }
}
