#include "phfit/objective.hpp"

#include <cmath>
#include <stdexcept>

#include "phfit/errors.hpp"
#include "phfit/expm.hpp"

namespace phfit {

void FitTarget::check() const {
    if (moments.size() < 1) throw std::invalid_argument("target: needs at least one moment");
    for (Eigen::Index i = 0; i < moments.size(); ++i)
        if (!(moments(i) > 0.0))
            throw std::invalid_argument("target: moment " + std::to_string(i + 1) +
                                        " must be positive");
    if (weights.size() != moments.size())
        throw std::invalid_argument("target: weights/moments length mismatch");
    for (Eigen::Index i = 0; i < weights.size(); ++i)
        if (!(weights(i) > 0.0)) throw std::invalid_argument("target: weights must be positive");
    for (const auto& [x, y] : cdf_points) {
        if (!(x > 0.0)) throw std::invalid_argument("target: cdf point x must be positive");
        if (!(y > 0.0 && y < 1.0))
            throw std::invalid_argument("target: cdf point y must be in (0,1)");
    }
    if (cdf_weights.size() != 0 &&
        cdf_weights.size() != static_cast<Eigen::Index>(cdf_points.size()))
        throw std::invalid_argument("target: cdf_weights length mismatch");
    for (const auto& [x, y] : pdf_points) {
        if (!(x >= 0.0)) throw std::invalid_argument("target: pdf point x must be nonnegative");
        if (!(y >= 0.0)) throw std::invalid_argument("target: pdf target must be nonnegative");
    }
    if (!(Q >= 0.0)) throw std::invalid_argument("target: Q must be nonnegative");
}

Vector default_weights(const MomentVector& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i)
        if (!(m(i) > 0.0))
            throw std::invalid_argument("default_weights: moment " + std::to_string(i + 1) +
                                        " must be positive");
    return m.array().square().inverse();
}

FitTarget target_from_moments(const MomentVector& m) {
    FitTarget t;
    t.moments = m;
    t.weights = default_weights(m);
    return t;
}

namespace {

// Moment terms accumulated as (sqrt(w) r)^2 so huge raw moments cannot
// overflow the loss before the weight is applied.
double moment_terms(const MarkovianPH& ph, const FitTarget& target) {
    const MomentVector mu = moments(ph, target.l());
    double total = 0.0;
    for (int k = 0; k < target.l(); ++k) {
        const double t = std::sqrt(target.weights(k)) * (mu(k) - target.moments(k));
        total += t * t;
    }
    return total;
}

double cdf_weight(const FitTarget& target, size_t j) {
    return target.cdf_weights.size() ? target.cdf_weights(static_cast<Eigen::Index>(j)) : 1.0;
}

}  // namespace

double loss(const MarkovianPH& ph, const FitTarget& target) {
    target.check();
    double total = moment_terms(ph, target);
    if (!target.cdf_points.empty() && target.Q > 0.0) {
        const Vector ones = Vector::Ones(ph.n());
        for (size_t j = 0; j < target.cdf_points.size(); ++j) {
            const auto& [x, y] = target.cdf_points[j];
            const double c = 1.0 - ph.alpha.dot(expm_action(ph.T, x, ones));
            total += target.Q * cdf_weight(target, j) * (c - y) * (c - y);
        }
    }
    if (!target.pdf_points.empty() && target.Q > 0.0) {
        const Vector t = ph.exit_rates();
        for (const auto& [x, y] : target.pdf_points) {
            const double f = ph.alpha.dot(expm_action(ph.T, x, t));
            total += target.Q * (f - y) * (f - y);
        }
    }
    return total;
}

double loss(const FitParams& params, const FitTarget& target) {
    return loss(to_markovian(params), target);
}

namespace detail {

double markovian_adjoint(const MarkovianPH& ph, const FitTarget& target, Matrix& G_T,
                         Vector& g_alpha) {
    target.check();
    const int n = ph.n();
    const int l = target.l();
    G_T = Matrix::Zero(n, n);
    g_alpha = Vector::Zero(n);
    double total = 0.0;

    // Moment term. With u_k = T^{-k} 1 and v_k' = alpha' T^{-k}:
    //   mu_k       = k! (-1)^k alpha . u_k
    //   dmu_k/dT   = -k! (-1)^k sum_{j=1..k} v_j u_{k+1-j}'
    //   dmu_k/dalpha = k! (-1)^k u_k
    {
        Eigen::PartialPivLU<Matrix> lu(ph.T);
        const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
        if (!(min_pivot > kSingularPivot))
            throw singular_matrix_error("loss: subgenerator is numerically singular");

        Matrix U(n, l + 1);  // column k = u_k
        U.col(0) = Vector::Ones(n);
        for (int k = 1; k <= l; ++k) U.col(k) = lu.solve(U.col(k - 1));
        Matrix V(n, l + 1);  // column k = v_k (as a column vector)
        V.col(0) = ph.alpha;
        for (int k = 1; k <= l; ++k) V.col(k) = lu.transpose().solve(V.col(k - 1));

        Vector c(l + 1);  // c_k = 2 w_k (mu_k - m_k) k! (-1)^k
        double factorial = 1.0, sign = 1.0;
        for (int k = 1; k <= l; ++k) {
            factorial *= k;
            sign = -sign;
            const double mu_k = factorial * sign * ph.alpha.dot(U.col(k));
            const double sw = std::sqrt(target.weights(k - 1));
            const double t = sw * (mu_k - target.moments(k - 1));
            total += t * t;
            c(k) = 2.0 * sw * t * factorial * sign;
            g_alpha += c(k) * U.col(k);
        }
        for (int j = 1; j <= l; ++j) {
            Vector s = Vector::Zero(n);
            for (int k = j; k <= l; ++k) s += c(k) * U.col(k + 1 - j);
            G_T.noalias() -= V.col(j) * s.transpose();
        }
    }

    if (target.Q > 0.0 && !target.cdf_points.empty()) {
        const Vector ones = Vector::Ones(n);
        for (size_t j = 0; j < target.cdf_points.size(); ++j) {
            const auto& [x, y] = target.cdf_points[j];
            const ExpmTrace trace = expm_action_record(ph.T, x, ones);
            const double c = 1.0 - ph.alpha.dot(trace.y);
            const double qw = target.Q * cdf_weight(target, j);
            total += qw * (c - y) * (c - y);
            const double rho = 2.0 * qw * (c - y);
            g_alpha -= rho * trace.y;
            const Vector ybar = -rho * ph.alpha;
            expm_action_backprop(trace, ph.T, ybar, G_T);
        }
    }

    if (target.Q > 0.0 && !target.pdf_points.empty()) {
        const Vector t = ph.exit_rates();
        for (const auto& [x, y] : target.pdf_points) {
            const ExpmTrace trace = expm_action_record(ph.T, x, t);
            const double f = ph.alpha.dot(trace.y);
            total += target.Q * (f - y) * (f - y);
            const double rho = 2.0 * target.Q * (f - y);
            g_alpha += rho * trace.y;
            const Vector ybar = rho * ph.alpha;
            const Vector v0bar = expm_action_backprop(trace, ph.T, ybar, G_T);
            // v_0 = -T 1: each entry of row a of T feeds -v0bar_a.
            G_T.noalias() -= v0bar * Vector::Ones(n).transpose();
        }
    }

    return total;
}

}  // namespace detail

namespace {

// softmax backward: given g = dL/dsoftmax(z), returns dL/dz.
Vector softmax_backward(const Vector& sm, const Vector& g) {
    const double inner = sm.dot(g);
    return sm.array() * (g.array() - inner);
}

}  // namespace

double loss_gradient(const GeneralParams& p, const FitTarget& target, GeneralParams& grad) {
    const MarkovianPH ph = to_markovian(p);
    Matrix G_T;
    Vector g_alpha;
    const double value = detail::markovian_adjoint(ph, target, G_T, g_alpha);

    const int n = p.n();
    const Matrix S = row_softmax(p.Z);
    Matrix M = S;  // T = diag(gamma^2) M with M = S - I - S o I
    M.diagonal().array() = -1.0;

    grad.a = softmax_backward(ph.alpha, g_alpha);
    grad.gamma.resize(n);
    for (int i = 0; i < n; ++i)
        grad.gamma(i) = 2.0 * p.gamma(i) * G_T.row(i).dot(M.row(i));

    // dL/dS_ij = gamma_i^2 G_T(i,j) off the diagonal; S_ii cancels out of T.
    grad.Z.resize(n, n);
    for (int i = 0; i < n; ++i) {
        Vector h = (p.gamma(i) * p.gamma(i)) * G_T.row(i).transpose();
        h(i) = 0.0;
        grad.Z.row(i) = softmax_backward(S.row(i).transpose(), h).transpose();
    }
    return value;
}

double loss_gradient(const CoxianParams& p, const FitTarget& target, CoxianParams& grad) {
    const MarkovianPH ph = to_markovian(p);
    Matrix G_T;
    Vector g_alpha;
    const double value = detail::markovian_adjoint(ph, target, G_T, g_alpha);

    const int n = p.n();
    grad.gamma.resize(n);
    grad.u.resize(n - 1);
    for (int i = 0; i < n; ++i) {
        double d = -G_T(i, i);
        if (i + 1 < n) d += sigmoid(p.u(i)) * G_T(i, i + 1);
        grad.gamma(i) = 2.0 * p.gamma(i) * d;
    }
    for (int i = 0; i + 1 < n; ++i) {
        const double s = sigmoid(p.u(i));
        grad.u(i) = p.gamma(i) * p.gamma(i) * s * (1.0 - s) * G_T(i, i + 1);
    }
    return value;
}

double loss_gradient(const HyperErlangParams& p, const FitTarget& target,
                     HyperErlangParams& grad) {
    const MarkovianPH ph = to_markovian(p);
    Matrix G_T;
    Vector g_alpha;
    const double value = detail::markovian_adjoint(ph, target, G_T, g_alpha);

    const int k = p.k();
    const std::vector<int> heads = block_heads(p.blocks);
    const Vector omega = softmax(p.beta);

    Vector g_omega(k);
    grad.delta.resize(k);
    for (int j = 0; j < k; ++j) {
        g_omega(j) = g_alpha(heads[j]);
        double d = 0.0;
        for (int r = heads[j]; r < heads[j] + p.blocks[j]; ++r) {
            d -= G_T(r, r);
            if (r + 1 < heads[j] + p.blocks[j]) d += G_T(r, r + 1);
        }
        grad.delta(j) = 2.0 * p.delta(j) * d;
    }
    grad.beta = softmax_backward(omega, g_omega);
    grad.blocks = p.blocks;
    return value;
}

double loss_gradient(const FitParams& p, const FitTarget& target, FitParams& grad) {
    if (const auto* g = std::get_if<GeneralParams>(&p)) {
        GeneralParams out;
        const double v = loss_gradient(*g, target, out);
        grad = out;
        return v;
    }
    if (const auto* c = std::get_if<CoxianParams>(&p)) {
        CoxianParams out;
        const double v = loss_gradient(*c, target, out);
        grad = out;
        return v;
    }
    const auto& h = std::get<HyperErlangParams>(p);
    HyperErlangParams out;
    const double v = loss_gradient(h, target, out);
    grad = out;
    return v;
}

}  // namespace phfit
