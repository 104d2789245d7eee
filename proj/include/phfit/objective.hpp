#ifndef PHFIT_OBJECTIVE_HPP
#define PHFIT_OBJECTIVE_HPP

#include <utility>
#include <vector>

#include "phfit/reparam.hpp"

namespace phfit {

// Weighted moment-regression target, optionally extended with CDF (and PDF)
// shape points traded off by Q.
struct FitTarget {
    MomentVector moments;                          // m_1..m_l, all > 0
    Vector weights;                                // w_1..w_l, all > 0
    std::vector<std::pair<double, double>> cdf_points;  // (x_j, y_j), x > 0, y in (0,1)
    Vector cdf_weights;                            // optional per-point weights, default 1
    std::vector<std::pair<double, double>> pdf_points;  // (x_j, density target)
    double Q = 0.05;

    int l() const { return static_cast<int>(moments.size()); }

    // Throws std::invalid_argument on a malformed target.
    void check() const;
};

// w_i = m_i^{-2}: the loss becomes the sum of squared relative moment errors.
Vector default_weights(const MomentVector& m);

// Target with defaulted weights for the given moments.
FitTarget target_from_moments(const MomentVector& m);

// sum_i w_i (mu_i - m_i)^2 + Q sum_j c_j ((1 - alpha e^{T x_j} 1) - y_j)^2
// with (alpha, T) from the family's forward map. PDF points contribute
// Q (pdf(x_j) - target_j)^2.
double loss(const MarkovianPH& ph, const FitTarget& target);
double loss(const FitParams& params, const FitTarget& target);

// Loss and its gradient with respect to every unconstrained parameter entry;
// the gradient is returned in a parameter pack of the same shape. Contract:
// matches central finite differences to 1e-4 relative wherever the component
// magnitude exceeds 1e-8.
double loss_gradient(const GeneralParams& p, const FitTarget& target, GeneralParams& grad);
double loss_gradient(const CoxianParams& p, const FitTarget& target, CoxianParams& grad);
double loss_gradient(const HyperErlangParams& p, const FitTarget& target, HyperErlangParams& grad);
double loss_gradient(const FitParams& p, const FitTarget& target, FitParams& grad);

namespace detail {

// Adjoint of the loss with respect to the Markovian representation:
// returns the loss, fills G_T = dL/dT and g_alpha = dL/dalpha. Moment terms
// use the linear-solve adjoint on one factorization of T; shape terms use
// reverse-mode through the uniformization series.
double markovian_adjoint(const MarkovianPH& ph, const FitTarget& target, Matrix& G_T,
                         Vector& g_alpha);

}  // namespace detail

}  // namespace phfit

#endif
