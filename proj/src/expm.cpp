#include "phfit/expm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "phfit/errors.hpp"

namespace phfit {

std::vector<double> poisson_weights(double lambda, double tol) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw numeric_error("poisson_weights: invalid lambda");
    if (lambda == 0.0) return {1.0};

    const int mode = static_cast<int>(std::floor(lambda));
    // Generous upper cut; the cumulative test below trims it.
    const int hi = static_cast<int>(std::ceil(lambda + 10.0 * std::sqrt(lambda + 1.0) + 20.0));

    std::vector<double> w(static_cast<size_t>(hi) + 1, 0.0);
    w[mode] = std::exp(mode * std::log(lambda) - lambda - std::lgamma(double(mode) + 1.0));
    for (int m = mode; m > 0; --m) w[m - 1] = w[m] * double(m) / lambda;
    for (int m = mode; m < hi; ++m) w[m + 1] = w[m] * lambda / double(m + 1);

    double cum = 0.0;
    int M = hi;
    for (int m = 0; m <= hi; ++m) {
        cum += w[m];
        if (m >= mode && cum >= 1.0 - tol) {
            M = m;
            break;
        }
    }
    w.resize(static_cast<size_t>(M) + 1);
    return w;
}

namespace {

// q for uniformization; valid subgenerators have strictly negative diagonal.
double uniformization_rate(const Eigen::MatrixXd& T) {
    return std::max(0.0, (-T.diagonal()).maxCoeff());
}

// One uniformization segment, optionally on the transpose.
Eigen::VectorXd segment_action(const Eigen::MatrixXd& T, double q, double dx,
                               const Eigen::VectorXd& v, double tol, bool transpose) {
    const std::vector<double> w = poisson_weights(q * dx, tol);
    Eigen::VectorXd term = v;
    Eigen::VectorXd acc = w[0] * term;
    for (size_t m = 1; m < w.size(); ++m) {
        if (transpose)
            term += (T.transpose() * term).eval() / q;  // P' u = u + T'u/q
        else
            term += (T * term).eval() / q;
        acc += w[m] * term;
    }
    return acc;
}

Eigen::VectorXd action_impl(const Eigen::MatrixXd& T, double x, const Eigen::VectorXd& v,
                            double tol, bool transpose) {
    if (x < 0.0) throw std::invalid_argument("expm_action: negative x");
    const double q = uniformization_rate(T);
    if (x == 0.0 || q == 0.0) return v;

    // Bound q*dx per segment so the Poisson weights stay well scaled.
    const int nseg = std::max(1, static_cast<int>(std::ceil(q * x / 500.0)));
    const double dx = x / nseg;
    Eigen::VectorXd cur = v;
    for (int s = 0; s < nseg; ++s) cur = segment_action(T, q, dx, cur, tol / nseg, transpose);
    return cur;
}

}  // namespace

Eigen::VectorXd expm_action(const Eigen::MatrixXd& T, double x, const Eigen::VectorXd& v,
                            double tol) {
    return action_impl(T, x, v, tol, false);
}

Eigen::VectorXd expm_action_transpose(const Eigen::MatrixXd& T, double x,
                                      const Eigen::VectorXd& v, double tol) {
    return action_impl(T, x, v, tol, true);
}

ExpmTrace expm_action_record(const Eigen::MatrixXd& T, double x, const Eigen::VectorXd& v,
                             double tol, int max_terms) {
    if (x < 0.0) throw std::invalid_argument("expm_action_record: negative x");
    ExpmTrace trace;
    trace.q = uniformization_rate(T);
    const double lambda = trace.q * x;
    if (!std::isfinite(lambda) || lambda > static_cast<double>(max_terms))
        throw numeric_error("expm_action_record: q*x too large for a single segment");

    trace.weights = (x == 0.0 || trace.q == 0.0) ? std::vector<double>{1.0}
                                                 : poisson_weights(lambda, tol);
    const int M = static_cast<int>(trace.weights.size()) - 1;
    const int n = static_cast<int>(v.size());
    trace.V.resize(n, M + 1);
    trace.V.col(0) = v;
    for (int m = 1; m <= M; ++m)
        trace.V.col(m) = trace.V.col(m - 1) + (T * trace.V.col(m - 1)) / trace.q;

    trace.y = Eigen::VectorXd::Zero(n);
    for (int m = 0; m <= M; ++m) trace.y += trace.weights[m] * trace.V.col(m);
    return trace;
}

Eigen::VectorXd expm_action_backprop(const ExpmTrace& trace, const Eigen::MatrixXd& T,
                                     const Eigen::VectorXd& ybar, Eigen::MatrixXd& G_T) {
    const int M = static_cast<int>(trace.weights.size()) - 1;
    const int n = static_cast<int>(ybar.size());
    if (M == 0) return trace.weights[0] * ybar;

    // vbar_m = w_m ybar + P' vbar_{m+1}; dL/dP = sum_{m>=1} vbar_m v_{m-1}'.
    Eigen::MatrixXd Vbar(n, M + 1);
    Vbar.col(M) = trace.weights[M] * ybar;
    for (int m = M - 1; m >= 0; --m)
        Vbar.col(m) = trace.weights[m] * ybar + Vbar.col(m + 1) +
                      (T.transpose() * Vbar.col(m + 1)) / trace.q;

    G_T.noalias() += (Vbar.rightCols(M) * trace.V.leftCols(M).transpose()) / trace.q;
    return Vbar.col(0);
}

}  // namespace phfit
