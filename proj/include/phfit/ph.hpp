#ifndef PHFIT_PH_HPP
#define PHFIT_PH_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "phfit/rng.hpp"

namespace phfit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Raw moments m_1..m_l; entry k-1 holds the (k)-th moment.
using MomentVector = Eigen::VectorXd;

// Phase-type distribution in the constrained Markovian representation:
// initial probability vector alpha over n transient phases and subgenerator
// T (negative diagonal, nonnegative off-diagonals, nonpositive row sums).
struct MarkovianPH {
    Vector alpha;
    Matrix T;

    MarkovianPH() = default;
    MarkovianPH(Vector alpha_, Matrix T_) : alpha(std::move(alpha_)), T(std::move(T_)) {}

    int n() const { return static_cast<int>(alpha.size()); }

    // Exit rate vector t = -T * 1.
    Vector exit_rates() const { return -T.rowwise().sum(); }

    static MarkovianPH exponential(double rate);
    static MarkovianPH erlang(int k, double rate);
};

struct Violation {
    enum class Kind {
        ShapeMismatch,
        AlphaNegative,
        AlphaSum,
        OffDiagonalNegative,
        DiagonalNonNegative,
        RowSumPositive,
    };
    Kind kind;
    int i = -1;          // offending row / entry
    int j = -1;          // offending column, when applicable
    double magnitude = 0.0;  // size of the violation

    std::string describe() const;
};

// Tolerance on the simplex / row-sum constraints; the reparameterized
// constructions satisfy them to round-off.
inline constexpr double kValidationTol = 1e-12;

// Pivot threshold below which the subgenerator factorization is treated as
// singular.
inline constexpr double kSingularPivot = 1e-14;

// Returns every violated invariant (empty result = valid PH). Singularity is
// not a validity flag; it surfaces as singular_matrix_error from moments().
std::vector<Violation> validate(const MarkovianPH& ph);

bool is_valid(const MarkovianPH& ph);

// First l raw moments via sequential linear solves on one factorization of T
// (m_k = k! (-1)^k alpha T^{-k} 1); T^{-1} is never formed.
MomentVector moments(const MarkovianPH& ph, int l);

double mean(const MarkovianPH& ph);

// P(X <= x) = 1 - alpha e^{Tx} 1, clamped to [0, 1].
double cdf(const MarkovianPH& ph, double x);

// Density alpha e^{Tx} (-T 1).
double pdf(const MarkovianPH& ph, double x);

// Density on the uniform grid x0, x0+dx, ..., x0+(count-1)dx, evaluated by
// propagating alpha e^{Tx} incrementally across the grid.
Vector pdf_grid(const MarkovianPH& ph, double x0, double dx, int count);

// Smallest x with cdf(x) >= p, located by doubling + bisection.
double quantile(const MarkovianPH& ph, double p, double tol = 1e-10);

// Rescales T so the first moment equals target_mean; the k-th moment scales
// by (target_mean / m_1)^k.
MarkovianPH normalize_mean(const MarkovianPH& ph, double target_mean);

// Simulates the absorbing CTMC: initial phase ~ alpha, exponential sojourns
// with rate -T_ii, jumps with probability T_ij / (-T_ii). Deterministic
// given the Rng state.
double sample_absorption_time(const MarkovianPH& ph, Rng& rng);
std::vector<double> sample_absorption(const MarkovianPH& ph, Rng& rng, int count);

}  // namespace phfit

#endif
