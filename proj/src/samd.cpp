#include "tetris/samd.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <sstream>

namespace tetris {

void SamdConfig::validate() const {
    if (harmonic_order < 1) throw InvalidArgument("samd: harmonic order must be >= 1");
    if (poly_order < 0) throw InvalidArgument("samd: polynomial order must be >= 0");
    if (!(ridge_reg >= 0.0)) throw InvalidArgument("samd: ridge_reg must be >= 0");
    if (!(max_condition > 1.0)) throw InvalidArgument("samd: max_condition must exceed 1");
}

SamdResult samd_fit(const RealSignal& x, std::span<const double> am, std::span<const double> phase,
                    const SamdConfig& cfg) {
    cfg.validate();
    const std::size_t n = x.size();
    if (am.size() != n || phase.size() != n) throw InvalidArgument("samd: AM/phase length mismatch");
    const std::size_t ncols = cfg.columns();
    if (ncols * 10 > n) {
        throw InvalidArgument("samd: " + std::to_string(ncols) + " columns need at least " +
                              std::to_string(ncols * 10) + " samples");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(am[i] > 0.0)) throw InvalidArgument("samd: AM not positive at index " + std::to_string(i));
        if (i > 0 && !(phase[i] > phase[i - 1])) {
            throw InvalidArgument("samd: phase not strictly increasing at index " + std::to_string(i));
        }
    }

    const int D = cfg.harmonic_order, P = cfg.poly_order;
    const auto rows = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd X(rows, static_cast<Eigen::Index>(ncols));
    std::vector<double> tau(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        tau[i] = n > 1 ? -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    }
    auto col_index = [&](int l, int j, int s) { return static_cast<Eigen::Index>(((l - 1) * (P + 1) + j) * 2 + s); };
    const auto trend0 = static_cast<Eigen::Index>(2 * D * (P + 1));
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double frac = phase[i] - std::floor(phase[i]);
        for (int l = 1; l <= D; ++l) {
            const double arg = 2.0 * std::numbers::pi * l * frac;
            const double c = am[i] * std::cos(arg), s = am[i] * std::sin(arg);
            double tp = 1.0;
            for (int j = 0; j <= P; ++j) {
                X(r, col_index(l, j, 0)) = tp * c;
                X(r, col_index(l, j, 1)) = tp * s;
                tp *= tau[i];
            }
        }
        double tp = 1.0;
        for (int j = 0; j <= P; ++j) {
            X(r, trend0 + j) = tp;
            tp *= tau[i];
        }
    }

    Eigen::VectorXd scale = X.colwise().norm().transpose();
    for (Eigen::Index c = 0; c < scale.size(); ++c) {
        if (!(scale(c) > 0.0)) throw StageError("samd", "dictionary column " + std::to_string(c) + " vanishes");
    }
    const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
    const double lambda = cfg.ridge_reg * Xs.squaredNorm() / static_cast<double>(ncols);

    const auto cols = static_cast<Eigen::Index>(ncols);
    Eigen::MatrixXd A(rows + cols, cols);
    A.topRows(rows) = Xs;
    A.bottomRows(cols) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(cols, cols);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(rows + cols);
    for (std::size_t i = 0; i < n; ++i) b(static_cast<Eigen::Index>(i)) = x[i];

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    if (!(cond <= cfg.max_condition)) {
        std::ostringstream os;
        os << "design matrix is rank deficient (condition number " << cond << ")";
        throw StageError("samd", os.str());
    }
    const Eigen::VectorXd beta_s = A.colPivHouseholderQr().solve(b);
    const Eigen::VectorXd beta = beta_s.cwiseQuotient(scale);

    SamdResult res{RealSignal(std::vector<double>(n, 0.0), x.fs(), x.t0()), {}, {}, {}, {}, cond};
    std::vector<double> comp(n, 0.0);
    res.harmonics.assign(static_cast<std::size_t>(D), std::vector<double>(n, 0.0));
    for (int l = 1; l <= D; ++l) {
        for (int j = 0; j <= P; ++j) {
            res.coeffs.push_back({l, j, beta(col_index(l, j, 0)), beta(col_index(l, j, 1))});
        }
        auto& h = res.harmonics[static_cast<std::size_t>(l - 1)];
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            double v = 0.0;
            for (int j = 0; j <= P; ++j) {
                v += X(r, col_index(l, j, 0)) * beta(col_index(l, j, 0)) +
                     X(r, col_index(l, j, 1)) * beta(col_index(l, j, 1));
            }
            h[i] = v;
            comp[i] += v;
        }
    }
    res.trend.assign(n, 0.0);
    for (int j = 0; j <= P; ++j) {
        res.trend_coeffs.push_back(beta(trend0 + j));
        for (std::size_t i = 0; i < n; ++i) res.trend[i] += X(static_cast<Eigen::Index>(i), trend0 + j) * beta(trend0 + j);
    }
    res.component = RealSignal(std::move(comp), x.fs(), x.t0());
    return res;
}

}  // namespace tetris
