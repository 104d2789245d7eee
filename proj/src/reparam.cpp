#include "phfit/reparam.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "phfit/errors.hpp"

namespace phfit {

std::string to_string(Structure s) {
    switch (s) {
        case Structure::General: return "general";
        case Structure::Coxian: return "coxian";
        case Structure::HyperErlang: return "hyper-erlang";
    }
    return "?";
}

Structure structure_from_string(const std::string& s) {
    if (s == "general") return Structure::General;
    if (s == "coxian") return Structure::Coxian;
    if (s == "hyper-erlang" || s == "hypererlang") return Structure::HyperErlang;
    throw std::invalid_argument("unknown structure '" + s + "'");
}

int HyperErlangParams::n() const {
    return std::accumulate(blocks.begin(), blocks.end(), 0);
}

Vector softmax(const Vector& v) {
    const double m = v.maxCoeff();
    Vector e = (v.array() - m).exp();
    return e / e.sum();
}

Matrix row_softmax(const Matrix& Z) {
    Matrix S(Z.rows(), Z.cols());
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
        S.row(i) = softmax(Z.row(i).transpose()).transpose();
    return S;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

namespace {

void require_nonzero(const Vector& v, const char* name) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) < 1e-30)
            throw std::invalid_argument(std::string(name) + " entries must be nonzero (index " +
                                        std::to_string(i) + ")");
}

}  // namespace

MarkovianPH to_markovian(const GeneralParams& p) {
    const int n = p.n();
    if (p.gamma.size() != n || p.Z.rows() != n || p.Z.cols() != n)
        throw std::invalid_argument("GeneralParams: inconsistent dimensions");
    require_nonzero(p.gamma, "gamma");

    const Vector alpha = softmax(p.a);
    const Matrix S = row_softmax(p.Z);
    Matrix T = S;
    T.diagonal().array() -= 1.0 + S.diagonal().array();  // S - I - S o I
    T.array().colwise() *= p.gamma.array().square();
    return {alpha, T};
}

MarkovianPH to_markovian(const CoxianParams& p) {
    const int n = p.n();
    if (p.u.size() != n - 1) throw std::invalid_argument("CoxianParams: u must have length n-1");
    require_nonzero(p.gamma, "gamma");

    Vector alpha = Vector::Zero(n);
    alpha(0) = 1.0;
    Matrix T = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double rate = p.gamma(i) * p.gamma(i);
        T(i, i) = -rate;
        if (i + 1 < n) T(i, i + 1) = sigmoid(p.u(i)) * rate;
    }
    return {alpha, T};
}

MarkovianPH to_markovian(const HyperErlangParams& p) {
    const int k = p.k();
    if (p.delta.size() != k || static_cast<int>(p.blocks.size()) != k)
        throw std::invalid_argument("HyperErlangParams: inconsistent dimensions");
    for (int d : p.blocks)
        if (d < 1) throw std::invalid_argument("HyperErlangParams: block sizes must be >= 1");
    require_nonzero(p.delta, "delta");

    const int n = p.n();
    const Vector omega = softmax(p.beta);
    Vector alpha = Vector::Zero(n);
    Matrix T = Matrix::Zero(n, n);
    int head = 0;
    for (int j = 0; j < k; ++j) {
        alpha(head) = omega(j);
        const double rate = p.delta(j) * p.delta(j);
        for (int r = head; r < head + p.blocks[j]; ++r) {
            T(r, r) = -rate;
            if (r + 1 < head + p.blocks[j]) T(r, r + 1) = rate;
        }
        head += p.blocks[j];
    }
    return {alpha, T};
}

MarkovianPH to_markovian(const FitParams& p) {
    return std::visit([](const auto& q) { return to_markovian(q); }, p);
}

Structure structure_of(const FitParams& p) {
    if (std::holds_alternative<GeneralParams>(p)) return Structure::General;
    if (std::holds_alternative<CoxianParams>(p)) return Structure::Coxian;
    return Structure::HyperErlang;
}

GeneralParams from_markovian_general(const MarkovianPH& ph) {
    const int n = ph.n();
    for (int i = 0; i < n; ++i)
        if (!(ph.alpha(i) > 0.0))
            throw interior_violation_error("alpha[" + std::to_string(i) +
                                           "] is zero; not an interior point");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && !(ph.T(i, j) > 0.0))
                throw interior_violation_error("T[" + std::to_string(i) + "][" +
                                               std::to_string(j) +
                                               "] is zero; not an interior point");

    GeneralParams p;
    p.a = ph.alpha.array().log();
    p.gamma = (-ph.T.diagonal().array()).sqrt();

    // D = diag(1/gamma^2) T has -1 diagonal; restore the softmax image E with
    // off-diagonals D_ij and diagonal 1 - sum_{j != i} D_ij (the row slack),
    // then Z = log E.
    Matrix E = ph.T.array().colwise() / ph.T.diagonal().array().abs();
    for (int i = 0; i < n; ++i) {
        const double slack = -E.row(i).sum();  // 1 - sum_{j!=i} D_ij, using E_ii = -1
        if (!(slack > 0.0))
            throw interior_violation_error("row " + std::to_string(i) +
                                           " of T has zero slack; not an interior point");
        E(i, i) = slack;
    }
    p.Z = E.array().log();
    return p;
}

CoxianParams from_markovian_coxian(const Vector& lambda, const Vector& p) {
    const int n = static_cast<int>(lambda.size());
    if (p.size() != n - 1) throw std::invalid_argument("coxian: p must have length n-1");
    for (int i = 0; i < n; ++i)
        if (!(lambda(i) > 0.0)) throw std::invalid_argument("coxian: rates must be positive");
    for (int i = 0; i + 1 < n; ++i)
        if (!(p(i) > 0.0 && p(i) < 1.0))
            throw interior_violation_error("p[" + std::to_string(i) +
                                           "] is on the boundary {0,1}");
    CoxianParams out;
    out.gamma = lambda.array().sqrt();
    out.u.resize(n - 1);
    for (int i = 0; i + 1 < n; ++i) out.u(i) = logit(p(i));
    return out;
}

HyperErlangParams from_markovian_hypererlang(const Vector& omega, const Vector& lambda,
                                             const std::vector<int>& blocks) {
    const int k = static_cast<int>(omega.size());
    if (lambda.size() != k || static_cast<int>(blocks.size()) != k)
        throw std::invalid_argument("hyper-erlang: inconsistent dimensions");
    if (std::abs(omega.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("hyper-erlang: omega must sum to 1");
    for (int j = 0; j < k; ++j) {
        if (!(omega(j) > 0.0))
            throw interior_violation_error("omega[" + std::to_string(j) +
                                           "] is zero; not an interior point");
        if (!(lambda(j) > 0.0))
            throw std::invalid_argument("hyper-erlang: rates must be positive");
    }
    HyperErlangParams out;
    out.beta = omega.array().log();
    out.delta = lambda.array().sqrt();
    out.blocks = blocks;
    return out;
}

MarkovianPH interior_jitter(const MarkovianPH& ph, double eps) {
    const int n = ph.n();
    MarkovianPH out = ph;
    for (int i = 0; i < n; ++i) out.alpha(i) = std::max(out.alpha(i), eps);
    out.alpha /= out.alpha.sum();
    for (int i = 0; i < n; ++i) {
        const double di = -out.T(i, i);
        for (int j = 0; j < n; ++j)
            if (j != i && out.T(i, j) < eps * di) out.T(i, j) = eps * di;
        // Keep strictly negative row slack by shrinking the row if needed.
        double off = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) off += out.T(i, j);
        const double limit = di * (1.0 - eps);
        if (off > limit)
            for (int j = 0; j < n; ++j)
                if (j != i) out.T(i, j) *= limit / off;
    }
    return out;
}

std::vector<int> block_heads(const std::vector<int>& blocks) {
    std::vector<int> heads(blocks.size());
    int pos = 0;
    for (size_t j = 0; j < blocks.size(); ++j) {
        heads[j] = pos;
        pos += blocks[j];
    }
    return heads;
}

}  // namespace phfit
