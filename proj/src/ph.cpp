#include "phfit/ph.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "phfit/errors.hpp"
#include "phfit/expm.hpp"

namespace phfit {

MarkovianPH MarkovianPH::exponential(double rate) {
    Vector a(1);
    a << 1.0;
    Matrix T(1, 1);
    T << -rate;
    return {a, T};
}

MarkovianPH MarkovianPH::erlang(int k, double rate) {
    Vector a = Vector::Zero(k);
    a(0) = 1.0;
    Matrix T = Matrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        T(i, i) = -rate;
        if (i + 1 < k) T(i, i + 1) = rate;
    }
    return {a, T};
}

std::string Violation::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::ShapeMismatch:
            os << "alpha/T dimension mismatch";
            break;
        case Kind::AlphaNegative:
            os << "alpha[" << i << "] negative by " << magnitude;
            break;
        case Kind::AlphaSum:
            os << "sum(alpha) differs from 1 by " << magnitude;
            break;
        case Kind::OffDiagonalNegative:
            os << "T[" << i << "][" << j << "] negative by " << magnitude;
            break;
        case Kind::DiagonalNonNegative:
            os << "T[" << i << "][" << i << "] not negative (value " << magnitude << ")";
            break;
        case Kind::RowSumPositive:
            os << "row " << i << " of T sums to +" << magnitude;
            break;
    }
    return os.str();
}

std::vector<Violation> validate(const MarkovianPH& ph) {
    std::vector<Violation> out;
    const int n = ph.n();
    if (n == 0 || ph.T.rows() != n || ph.T.cols() != n) {
        out.push_back({Violation::Kind::ShapeMismatch, -1, -1, 0.0});
        return out;
    }
    for (int i = 0; i < n; ++i)
        if (ph.alpha(i) < -kValidationTol)
            out.push_back({Violation::Kind::AlphaNegative, i, -1, -ph.alpha(i)});
    const double asum = ph.alpha.sum();
    if (std::abs(asum - 1.0) > kValidationTol)
        out.push_back({Violation::Kind::AlphaSum, -1, -1, std::abs(asum - 1.0)});
    for (int i = 0; i < n; ++i) {
        if (!(ph.T(i, i) < 0.0))
            out.push_back({Violation::Kind::DiagonalNonNegative, i, i, ph.T(i, i)});
        for (int j = 0; j < n; ++j)
            if (j != i && ph.T(i, j) < -kValidationTol)
                out.push_back({Violation::Kind::OffDiagonalNegative, i, j, -ph.T(i, j)});
        const double rs = ph.T.row(i).sum();
        if (rs > kValidationTol)
            out.push_back({Violation::Kind::RowSumPositive, i, -1, rs});
    }
    return out;
}

bool is_valid(const MarkovianPH& ph) { return validate(ph).empty(); }

MomentVector moments(const MarkovianPH& ph, int l) {
    if (l < 1) throw std::invalid_argument("moments: l must be >= 1");
    Eigen::PartialPivLU<Matrix> lu(ph.T);
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot > kSingularPivot))
        throw singular_matrix_error("moments: subgenerator is numerically singular (pivot " +
                                    std::to_string(min_pivot) + ")");

    MomentVector m(l);
    Vector u = Vector::Ones(ph.n());
    double factorial = 1.0;
    double sign = 1.0;
    for (int k = 1; k <= l; ++k) {
        u = lu.solve(u);
        factorial *= k;
        sign = -sign;
        m(k - 1) = factorial * sign * ph.alpha.dot(u);
    }
    return m;
}

double mean(const MarkovianPH& ph) { return moments(ph, 1)(0); }

double cdf(const MarkovianPH& ph, double x) {
    if (x < 0.0) throw std::invalid_argument("cdf: negative x");
    const Vector w = expm_action(ph.T, x, Vector::Ones(ph.n()));
    const double c = 1.0 - ph.alpha.dot(w);
    return std::min(1.0, std::max(0.0, c));
}

double pdf(const MarkovianPH& ph, double x) {
    if (x < 0.0) throw std::invalid_argument("pdf: negative x");
    const Vector w = expm_action(ph.T, x, ph.exit_rates());
    return std::max(0.0, ph.alpha.dot(w));
}

Vector pdf_grid(const MarkovianPH& ph, double x0, double dx, int count) {
    if (count < 1) throw std::invalid_argument("pdf_grid: empty grid");
    if (x0 < 0.0 || dx < 0.0) throw std::invalid_argument("pdf_grid: negative grid");
    const Vector t = ph.exit_rates();
    Vector g = expm_action_transpose(ph.T, x0, ph.alpha);  // g' = alpha e^{Tx}
    Vector out(count);
    out(0) = std::max(0.0, g.dot(t));
    for (int i = 1; i < count; ++i) {
        g = expm_action_transpose(ph.T, dx, g);
        out(i) = std::max(0.0, g.dot(t));
    }
    return out;
}

double quantile(const MarkovianPH& ph, double p, double tol) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile: p must be in (0,1)");
    double hi = mean(ph);
    if (!(hi > 0.0)) hi = 1.0;
    while (cdf(ph, hi) < p) hi *= 2.0;
    double lo = 0.0;
    while (hi - lo > tol * (1.0 + hi)) {
        const double mid = 0.5 * (lo + hi);
        (cdf(ph, mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

MarkovianPH normalize_mean(const MarkovianPH& ph, double target_mean) {
    if (!(target_mean > 0.0)) throw std::invalid_argument("normalize_mean: target must be > 0");
    const double m1 = mean(ph);
    return {ph.alpha, ph.T * (m1 / target_mean)};
}

double sample_absorption_time(const MarkovianPH& ph, Rng& rng) {
    const int n = ph.n();
    // Initial phase from alpha.
    int phase = n - 1;
    {
        double u = rng.uniform01();
        double cum = 0.0;
        for (int i = 0; i < n; ++i) {
            cum += ph.alpha(i);
            if (u < cum) {
                phase = i;
                break;
            }
        }
    }
    double t = 0.0;
    while (true) {
        const double rate = -ph.T(phase, phase);
        t += rng.exponential(rate);
        // Jump: off-diagonal mass T_ij/rate, remainder absorbs.
        double u = rng.uniform01();
        double cum = 0.0;
        int next = -1;
        for (int j = 0; j < n; ++j) {
            if (j == phase) continue;
            cum += ph.T(phase, j) / rate;
            if (u < cum) {
                next = j;
                break;
            }
        }
        if (next < 0) return t;
        phase = next;
    }
}

std::vector<double> sample_absorption(const MarkovianPH& ph, Rng& rng, int count) {
    if (count < 1) throw std::invalid_argument("sample_absorption: count must be >= 1");
    std::vector<double> out(static_cast<size_t>(count));
    for (auto& x : out) x = sample_absorption_time(ph, rng);
    return out;
}

}  // namespace phfit
