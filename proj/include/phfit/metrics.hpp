#ifndef PHFIT_METRICS_HPP
#define PHFIT_METRICS_HPP

#include <string>
#include <vector>

#include "phfit/ph.hpp"

namespace phfit {

struct EvalRecord {
    std::string instance;
    MomentVector target;
    MomentVector fitted;
    Vector per_moment_mape;  // percent
    double max_mape = 0.0;
    double wall_time = 0.0;
};

EvalRecord make_eval_record(std::string instance, const MomentVector& target,
                            const MomentVector& fitted, double wall_time);

// |m_i - m^_i| / m_i * 100, elementwise.
Vector mape(const MomentVector& target, const MomentVector& fitted);

// Percentage of records whose worst per-moment MAPE is at most eta.
double success_rate(const std::vector<EvalRecord>& records, double eta);

// Partial sum of |p_i - p^_i| for i = 0..j.
double accumulated_error(const std::vector<double>& p, const std::vector<double>& p_hat, int j);

// Composite-Simpson quadrature domain for the KL integral. x_max = 0 means
// "the larger of the two (1 - tail_prob) quantiles"; the default tail leaves
// integrand mass ~1e-6 outside the domain for exponential-like tails.
struct QuadratureSpec {
    double x_max = 0.0;
    int panels = 10000;
    double tail_prob = 1e-7;
};

// Numeric integral of f_p log(f_p / f_q) over [0, x_max], densities floored
// at 1e-300 inside the log.
double kl_divergence(const MarkovianPH& p, const MarkovianPH& q,
                     const QuadratureSpec& grid = {});

}  // namespace phfit

#endif
