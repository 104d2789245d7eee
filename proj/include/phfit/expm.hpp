#ifndef PHFIT_EXPM_HPP
#define PHFIT_EXPM_HPP

#include <Eigen/Dense>
#include <vector>

namespace phfit {

// Uniformization of e^{Tx} for a subgenerator T: with q = max_i |T_ii| and
// P = I + T/q, e^{Tx} v = sum_m pois(m; qx) P^m v. P is substochastic with
// nonnegative entries, so every term is bounded by ||v||_inf and truncating
// the Poisson tail at `tol` bounds the absolute error by tol * ||v||_inf.

// Poisson pmf values pois(0..M; lambda) with M chosen so the omitted tail is
// below tol. Computed by recurrence from the mode, so large lambda does not
// underflow the whole sequence.
std::vector<double> poisson_weights(double lambda, double tol);

// e^{Tx} v (right action). Splits x into segments of bounded q*dx, so any
// nonnegative x is handled with small memory.
Eigen::VectorXd expm_action(const Eigen::MatrixXd& T, double x, const Eigen::VectorXd& v,
                            double tol = 1e-13);

// e^{T'x} v, i.e. the row action w^T = v^T e^{Tx} transposed.
Eigen::VectorXd expm_action_transpose(const Eigen::MatrixXd& T, double x,
                                      const Eigen::VectorXd& v, double tol = 1e-13);

// Recorded forward pass of the uniformization series, kept for reverse-mode
// differentiation of y = e^{Tx} v with respect to T and v.
struct ExpmTrace {
    double q = 0.0;
    std::vector<double> weights;  // pois(m; qx), m = 0..M
    Eigen::MatrixXd V;            // column m holds P^m v
    Eigen::VectorXd y;            // e^{Tx} v
};

// Single-segment recording pass. Throws numeric_error when q*x exceeds
// max_terms (the optimizer treats that as a per-candidate failure).
ExpmTrace expm_action_record(const Eigen::MatrixXd& T, double x, const Eigen::VectorXd& v,
                             double tol = 1e-14, int max_terms = 200000);

// Given ybar = dL/dy, accumulates dL/dT into G_T and returns vbar = dL/dv.
// q and the truncation point are treated as constants of the forward pass;
// the true map is independent of q, so the discrepancy is bounded by the
// series truncation error.
Eigen::VectorXd expm_action_backprop(const ExpmTrace& trace, const Eigen::MatrixXd& T,
                                     const Eigen::VectorXd& ybar, Eigen::MatrixXd& G_T);

}  // namespace phfit

#endif
