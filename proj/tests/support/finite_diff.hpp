#ifndef PHFIT_TESTS_FINITE_DIFF_HPP
#define PHFIT_TESTS_FINITE_DIFF_HPP

#include <cmath>
#include <functional>

#include "phfit/ph.hpp"

namespace phfit::testsupport {

struct FdEstimate {
    double deriv = 0.0;
    double noise_floor = 0.0;  // roundoff bound eps |f| / (2h) of the estimate
};

// Central difference with step h = 1e-6 max(1, |theta|).
inline FdEstimate central_diff_est(const std::function<double(double)>& f, double theta) {
    const double h = 1e-6 * std::max(1.0, std::abs(theta));
    const double fp = f(theta + h);
    const double fm = f(theta - h);
    FdEstimate out;
    out.deriv = (fp - fm) / (2.0 * h);
    out.noise_floor =
        4.0 * 2.220446049250313e-16 * std::max(std::abs(fp), std::abs(fm)) / (2.0 * h);
    return out;
}

inline double central_diff(const std::function<double(double)>& f, double theta) {
    return central_diff_est(f, theta).deriv;
}

// Relative agreement check used by the gradient contract: components with
// |analytic| <= threshold are skipped, as are components where the finite
// difference's own roundoff floor exceeds a tenth of the allowed tolerance
// (there the oracle cannot resolve the comparison).
inline bool grad_matches(double analytic, const FdEstimate& fd, double rel_tol = 1e-4,
                         double threshold = 1e-8) {
    if (std::abs(analytic) <= threshold) return true;
    const double denom = std::max(std::abs(analytic), std::abs(fd.deriv));
    if (fd.noise_floor > 0.1 * rel_tol * denom) return true;  // oracle noise floor
    return std::abs(analytic - fd.deriv) <= rel_tol * denom;
}

inline bool grad_matches(double analytic, double numeric, double rel_tol = 1e-4,
                         double threshold = 1e-8) {
    FdEstimate fd;
    fd.deriv = numeric;
    return grad_matches(analytic, fd, rel_tol, threshold);
}

}  // namespace phfit::testsupport

#endif
