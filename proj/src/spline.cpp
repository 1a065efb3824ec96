#include "tetris/spline.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>

#include <cmath>
#include <string>

#include "tetris/error.hpp"

namespace tetris {

struct NaturalSpline::Impl {
    gsl_spline* spline = nullptr;
    ~Impl() {
        if (spline) gsl_spline_free(spline);
    }
};

namespace {

struct GslQuiet {
    gsl_error_handler_t* old;
    GslQuiet() : old(gsl_set_error_handler_off()) {}
    ~GslQuiet() { gsl_set_error_handler(old); }
};

}  // namespace

NaturalSpline::NaturalSpline(std::span<const double> x, std::span<const double> y,
                             Extrapolation mode)
    : impl_(std::make_unique<Impl>()), x_(x.begin(), x.end()), y_(y.begin(), y.end()),
      mode_(mode) {
    if (x_.size() != y_.size()) throw InvalidArgument("spline: knot and value counts differ");
    if (x_.size() < 2) throw InvalidArgument("spline: need at least two knots");
    for (std::size_t i = 0; i < x_.size(); ++i) {
        if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) {
            throw InvalidArgument("spline: non-finite knot at index " + std::to_string(i));
        }
        if (i > 0 && !(x_[i] > x_[i - 1])) {
            throw InvalidArgument("spline: knots not strictly increasing at index " +
                                  std::to_string(i));
        }
    }
    const gsl_interp_type* type = x_.size() >= 3 ? gsl_interp_cspline : gsl_interp_linear;
    GslQuiet quiet;
    impl_->spline = gsl_spline_alloc(type, x_.size());
    if (gsl_spline_init(impl_->spline, x_.data(), y_.data(), x_.size()) != GSL_SUCCESS) {
        throw StageError("spline", "initialisation failed");
    }
}

NaturalSpline::~NaturalSpline() = default;
NaturalSpline::NaturalSpline(NaturalSpline&&) noexcept = default;
NaturalSpline& NaturalSpline::operator=(NaturalSpline&&) noexcept = default;

double NaturalSpline::operator()(double x) const {
    if (x < x_.front()) {
        if (mode_ == Extrapolation::constant) return y_.front();
        return y_.front() + (x - x_.front()) * derivative(x_.front());
    }
    if (x > x_.back()) {
        if (mode_ == Extrapolation::constant) return y_.back();
        return y_.back() + (x - x_.back()) * derivative(x_.back());
    }
    return gsl_spline_eval(impl_->spline, x, nullptr);
}

double NaturalSpline::derivative(double x) const {
    if (x < x_.front() || x > x_.back()) {
        if (mode_ == Extrapolation::constant) return 0.0;
        x = x < x_.front() ? x_.front() : x_.back();
    }
    return gsl_spline_eval_deriv(impl_->spline, x, nullptr);
}

std::vector<double> NaturalSpline::evaluate(std::span<const double> x) const {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (*this)(x[i]);
    return out;
}

}  // namespace tetris
