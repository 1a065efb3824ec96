#pragma once

#include <memory>
#include <span>
#include <vector>

namespace tetris {

/// Natural cubic spline through strictly increasing knots (GSL backed).
/// Two knots degrade to linear interpolation.
class NaturalSpline {
public:
    enum class Extrapolation { constant, linear };

    NaturalSpline(std::span<const double> x, std::span<const double> y,
                  Extrapolation mode = Extrapolation::constant);
    ~NaturalSpline();
    NaturalSpline(NaturalSpline&&) noexcept;
    NaturalSpline& operator=(NaturalSpline&&) noexcept;

    double operator()(double x) const;
    double derivative(double x) const;
    std::vector<double> evaluate(std::span<const double> x) const;

    double x_min() const noexcept { return x_.front(); }
    double x_max() const noexcept { return x_.back(); }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::vector<double> x_, y_;
    Extrapolation mode_;
};

}  // namespace tetris
