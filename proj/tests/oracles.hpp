#pragma once

// Independent reference implementations used by the unit tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tetris/signal_model.hpp"

namespace oracle {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline std::vector<double> tone(double f, std::size_t n, double fs, double amp = 1.0, double ph = 0.0) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::cos(two_pi * f * static_cast<double>(i) / fs + ph);
    return x;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
    const auto n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

inline double energy(std::span<const double> x) {
    double e = 0.0;
    for (double v : x) e += v * v;
    return e;
}

inline double rel_rmse(std::span<const double> est, std::span<const double> ref) {
    double num = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) num += (est[i] - ref[i]) * (est[i] - ref[i]);
    return std::sqrt(num / energy(ref));
}

/// Plain sum over an untruncated window centred on sample `c`.
inline std::complex<double> stft_sum(std::span<const double> x, double fs, std::span<const double> taps,
                                     std::size_t c, double f) {
    const auto J = static_cast<std::ptrdiff_t>((taps.size() - 1) / 2);
    std::complex<double> acc = 0.0;
    for (std::ptrdiff_t j = -J; j <= J; ++j) {
        const auto i = static_cast<std::ptrdiff_t>(c) + j;
        const double u = static_cast<double>(j) / fs;
        acc += x[static_cast<std::size_t>(i)] * taps[static_cast<std::size_t>(j + J)] *
               std::polar(1.0, -two_pi * f * u);
    }
    return acc / fs;
}

/// Natural cubic spline by the Thomas algorithm on the second-derivative system.
class ThomasSpline {
public:
    ThomasSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        m_.assign(n, 0.0);
        if (n < 3) return;
        std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0), d(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
            a[i] = h0;
            b[i] = 2.0 * (h0 + h1);
            c[i] = h1;
            d[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
        }
        for (std::size_t i = 1; i < n; ++i) {
            const double w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        m_[n - 1] = d[n - 1] / b[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
    }

    double operator()(double t) const {
        const auto it = std::upper_bound(x_.begin(), x_.end(), t);
        std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
        i = std::min(i, x_.size() - 2);
        const double h = x_[i + 1] - x_[i];
        const double A = (x_[i + 1] - t) / h, B = (t - x_[i]) / h;
        return A * y_[i] + B * y_[i + 1] +
               ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
    }

private:
    std::vector<double> x_, y_, m_;
};

/// Exhaustive search over every bin curve of a small magnitude matrix.
inline std::vector<int> brute_ridge(const Eigen::MatrixXd& mag, double lambda, const std::vector<double>& ref,
                                    double mu, double floor = 1e-12) {
    const int nf = static_cast<int>(mag.rows()), nt = static_cast<int>(mag.cols());
    std::vector<int> cur(static_cast<std::size_t>(nt), 0), best;
    double best_score = -INFINITY;
    std::function<void(int, double)> go = [&](int m, double acc) {
        if (m == nt) {
            if (acc > best_score) {
                best_score = acc;
                best = cur;
            }
            return;
        }
        for (int c = 0; c < nf; ++c) {
            double s = acc + std::log(mag(c, m) + floor);
            if (m > 0) s -= lambda * std::pow(c - cur[static_cast<std::size_t>(m - 1)], 2);
            if (!ref.empty()) s -= mu * std::pow(c - ref[static_cast<std::size_t>(m)], 2);
            cur[static_cast<std::size_t>(m)] = c;
            go(m + 1, s);
        }
    };
    go(0, 0.0);
    return best;
}

/// Closed-form semi-real trace: (1 + 0.2 cos(2 pi phi0 + beta_a)) sum_l h_l cos(2 pi l phi_1 + beta_l)
/// with phi_1 = phi + b / (2 pi phi0') sin(2 pi phi0).
inline std::vector<double> semireal_closed_form(const tetris::GanhmSpec& s, const double (&h)[4],
                                                const double (&beta)[4], double beta_a, double b) {
    std::vector<double> y(s.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double p0 = s.phi0.phase[i];
        const double phi1 = s.phi.phase[i] + b / (two_pi * s.phi0.derivative[i]) * std::sin(two_pi * p0);
        double c = 0.0;
        for (int l = 1; l <= 4; ++l) c += h[l - 1] * std::cos(two_pi * l * phi1 + beta[l - 1]);
        y[i] = (1.0 + 0.2 * std::cos(two_pi * p0 + beta_a)) * c;
    }
    return y;
}

/// The published second-order aggregation, transcribed term by term for d0 = 2
/// and summed over l >= 1, plus T_0 + R_0.
inline std::vector<double> literal_expansion_sum(const tetris::GanhmSpec& s) {
    const std::size_t n = s.size();
    std::vector<double> y(n);
    const auto r0 = s.riiv();
    const double ba1 = s.riav_beta[0], ba2 = s.d0 > 1 ? s.riav_beta[1] : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double acc = s.trend[0][i] + r0[i];
        const double p = s.phi.phase[i], p0 = s.phi0.phase[i];
        for (int l = 1; l <= s.d1; ++l) {
            const auto L = static_cast<std::size_t>(l);
            const double T = s.trend[L][i];
            const double a1 = s.riav_a[L - 1][0][i];
            const double a2 = s.d0 > 1 ? s.riav_a[L - 1][1][i] : 0.0;
            const double b1 = s.cardiac_phases[L];
            const double th = l * s.fm_depth[i] / (2.0 * s.phi0.derivative[i]);
            auto arg = [&](int k) { return two_pi * (l * p + k * p0) + b1; };
            acc += (T + th * std::cos(ba1) + th * th * (std::cos(ba2) / 4.0 - T)) * std::cos(arg(0));
            acc += (1.0 - th * th) / 2.0 * a1 * std::cos(arg(1) + ba1) + th * T * std::cos(arg(1)) -
                   th / 2.0 * a2 * std::cos(arg(1) + ba2) + th * th / 4.0 * std::cos(arg(1) - ba1);
            acc += (1.0 - th * th) / 2.0 * a1 * std::cos(arg(-1) - ba1) - th * T * std::cos(arg(-1)) +
                   th / 2.0 * a2 * std::cos(arg(-1) - ba2) + th * th / 4.0 * std::cos(arg(-1) + ba1);
            acc += (1.0 - th * th) / 2.0 * a2 * std::cos(arg(2) + ba2) + th / 2.0 * a1 * std::cos(arg(2) + ba1);
            acc += (1.0 - th * th) / 2.0 * a2 * std::cos(arg(-2) - ba2) - th / 2.0 * a1 * std::cos(arg(-2) - ba1);
            acc += th / 2.0 * a2 * std::cos(arg(3) + ba2) + th * th / 4.0 * a1 * std::cos(arg(3) + ba1);
            acc += -th / 2.0 * a2 * std::cos(arg(-3) - ba2) + th * th / 4.0 * a1 * std::cos(arg(-3) - ba1);
            acc += th * th / 4.0 * a2 * std::cos(arg(4) + ba2) + th * th / 4.0 * a2 * std::cos(arg(-4) - ba2);
        }
        y[i] = acc;
    }
    return y;
}

}  // namespace oracle
