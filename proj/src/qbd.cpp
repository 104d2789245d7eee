#include "phfit/qbd.hpp"

#include <cmath>

#include "phfit/errors.hpp"
#include "phfit/metrics.hpp"

namespace phfit {

QbdModel QbdModel::make(const MarkovianPH& arrival, const MarkovianPH& service) {
    QbdModel m;
    m.arrival = arrival;
    m.service = service;
    m.rho = mean(service) / mean(arrival);
    return m;
}

Matrix kronecker(const Matrix& A, const Matrix& B) {
    Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

QbdBlocks build_blocks(const MarkovianPH& arrival, const MarkovianPH& service) {
    const int na = arrival.n();
    const int ns = service.n();
    const Matrix& S = arrival.T;
    const Matrix& V = service.T;
    const Vector s0 = arrival.exit_rates();
    const Vector v0 = service.exit_rates();
    const Matrix Ia = Matrix::Identity(na, na);
    const Matrix Is = Matrix::Identity(ns, ns);

    QbdBlocks b;
    b.na = na;
    b.ns = ns;
    b.A0 = kronecker(s0 * arrival.alpha.transpose(), Is);
    b.A1 = kronecker(S, Is) + kronecker(Ia, V);
    b.A2 = kronecker(Ia, v0 * service.alpha.transpose());
    b.B00 = S;
    b.B01 = kronecker(s0 * arrival.alpha.transpose(), service.alpha.transpose());
    b.B10 = kronecker(Ia, v0);
    return b;
}

Matrix solve_R(const QbdBlocks& blocks, double tol, long max_iter) {
    const Eigen::Index m = blocks.A1.rows();
    // X A1 = B  <=>  A1' X' = B'.
    Eigen::PartialPivLU<Matrix> lu(blocks.A1.transpose());
    Matrix R = Matrix::Zero(m, m);
    for (long it = 0; it < max_iter; ++it) {
        const Matrix rhs = -(blocks.A0 + R * R * blocks.A2);
        const Matrix next = lu.solve(rhs.transpose()).transpose();
        const double diff = (next - R).cwiseAbs().maxCoeff();
        R = next;
        if (diff < tol) return R;
    }
    throw convergence_error("solve_R: no convergence (utilization >= 1 or ill-conditioned model)");
}

std::vector<double> stationary_pmf(const QbdModel& model, int k_max, double tol) {
    if (!(model.rho < 1.0))
        throw std::invalid_argument("stationary_pmf: requires utilization < 1 (rho = " +
                                    std::to_string(model.rho) + ")");
    if (k_max < 0) throw std::invalid_argument("stationary_pmf: k_max must be >= 0");

    const QbdBlocks blocks = build_blocks(model.arrival, model.service);
    const Matrix R = solve_R(blocks, tol);
    const int na = blocks.na;
    const int m = na * blocks.ns;

    // Unknowns x = [pi_0, pi_1]; balance equations x K = 0 with
    // K = [[B00, B01], [B10, A1 + R A2]], one equation replaced by the
    // normalization pi_0 1 + pi_1 (I - R)^{-1} 1 = 1.
    Matrix K(na + m, na + m);
    K.topLeftCorner(na, na) = blocks.B00;
    K.topRightCorner(na, m) = blocks.B01;
    K.bottomLeftCorner(m, na) = blocks.B10;
    K.bottomRightCorner(m, m) = blocks.A1 + R * blocks.A2;

    const Matrix IR = Matrix::Identity(m, m) - R;
    Eigen::PartialPivLU<Matrix> ir_lu(IR);
    const Vector tail_weights = ir_lu.solve(Vector::Ones(m));

    Matrix system = K.transpose();
    system.row(0).head(na).setOnes();
    system.row(0).tail(m) = tail_weights.transpose();
    Vector rhs = Vector::Zero(na + m);
    rhs(0) = 1.0;

    Eigen::PartialPivLU<Matrix> sys_lu(system);
    const double min_pivot = sys_lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot > kSingularPivot))
        throw singular_matrix_error("stationary_pmf: boundary system is singular");
    const Vector x = sys_lu.solve(rhs);

    const Vector pi0 = x.head(na);
    Vector pik = x.tail(m);  // pi_1, then advanced through pi_k = pi_{k-1} R

    std::vector<double> p(static_cast<size_t>(k_max) + 1, 0.0);
    p[0] = std::max(0.0, pi0.sum());
    for (int k = 1; k <= k_max; ++k) {
        p[static_cast<size_t>(k)] = std::max(0.0, pik.sum());
        if (k < k_max) pik = R.transpose() * pik;
    }
    return p;
}

QueueStudyResult queue_study(const MarkovianPH& true_arrival, const MarkovianPH& true_service,
                             const std::vector<int>& l_values, const FitConfig& fit_config,
                             int k_max) {
    QueueStudyResult out;
    const QbdModel truth = QbdModel::make(true_arrival, true_service);
    out.p_true = stationary_pmf(truth, k_max);

    for (int l : l_values) {
        try {
            const MomentVector ma = moments(true_arrival, l);
            const MomentVector ms = moments(true_service, l);
            const FitResult fa = fit(target_from_moments(ma), fit_config);
            const FitResult fs = fit(target_from_moments(ms), fit_config);
            const QbdModel fitted = QbdModel::make(fa.ph, fs.ph);
            std::vector<double> p_hat = stationary_pmf(fitted, k_max);
            std::vector<double> acc(static_cast<size_t>(k_max) + 1);
            for (int j = 0; j <= k_max; ++j)
                acc[static_cast<size_t>(j)] = accumulated_error(out.p_true, p_hat, j);
            out.p_hat[l] = std::move(p_hat);
            out.accumulated[l] = std::move(acc);
        } catch (const std::exception& e) {
            out.failures[l] = e.what();
        }
    }
    return out;
}

}  // namespace phfit
