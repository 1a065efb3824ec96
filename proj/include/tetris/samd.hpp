#pragma once

#include <span>
#include <vector>

#include "tetris/signal.hpp"

namespace tetris {

struct SamdConfig {
    int harmonic_order = 2;  // D
    int poly_order = 2;      // P
    double ridge_reg = 1e-8;
    double max_condition = 1e12;

    void validate() const;
    std::size_t columns() const noexcept {
        return static_cast<std::size_t>(2 * harmonic_order * (poly_order + 1) + (poly_order + 1));
    }
};

struct SamdCoefficient {
    int l = 0;
    int j = 0;
    double cos_coeff = 0.0;
    double sin_coeff = 0.0;
};

struct SamdResult {
    RealSignal component;                 // oscillatory part, trend excluded
    std::vector<std::vector<double>> harmonics;  // per l = 1..D
    std::vector<double> trend;
    std::vector<SamdCoefficient> coeffs;
    std::vector<double> trend_coeffs;     // j = 0..P
    double condition = 0.0;
};

/// Least-squares fit of x over
///   { tau^j am cos(2 pi l phase), tau^j am sin(2 pi l phase) : l = 1..D, j = 0..P }
///   U { tau^j : j = 0..P },  tau = time rescaled to [-1, 1],
/// with Tikhonov term ridge_reg * trace(X'X) / ncols on the normal equations.
SamdResult samd_fit(const RealSignal& x, std::span<const double> am, std::span<const double> phase,
                    const SamdConfig& cfg = {});

}  // namespace tetris
