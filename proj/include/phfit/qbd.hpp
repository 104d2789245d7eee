#ifndef PHFIT_QBD_HPP
#define PHFIT_QBD_HPP

#include <map>
#include <string>
#include <vector>

#include "phfit/optimizer.hpp"

namespace phfit {

// PH/PH/1 queue: customers arrive with PH inter-arrival times and receive PH
// service; the queue-length process is a quasi-birth-death CTMC whose
// stationary distribution is matrix-geometric.
struct QbdModel {
    MarkovianPH arrival;
    MarkovianPH service;
    double rho = 0.0;  // mean service time / mean inter-arrival time

    static QbdModel make(const MarkovianPH& arrival, const MarkovianPH& service);
};

// Repeating-level blocks on the arrival x service product space plus the
// boundary blocks of level 0, which tracks only the arrival phase.
struct QbdBlocks {
    Matrix A0;   // arrival: level up
    Matrix A1;   // phase evolution within a level
    Matrix A2;   // service completion: level down
    Matrix B00;  // level 0 local (arrival phase only)
    Matrix B01;  // level 0 -> 1
    Matrix B10;  // level 1 -> 0
    int na = 0, ns = 0;
};

Matrix kronecker(const Matrix& A, const Matrix& B);

QbdBlocks build_blocks(const MarkovianPH& arrival, const MarkovianPH& service);

// Minimal nonnegative solution of A0 + R A1 + R^2 A2 = 0 by fixed-point
// iteration R <- -(A0 + R^2 A2) A1^{-1}. Throws convergence_error when the
// iteration fails (rho >= 1 or numeric trouble).
Matrix solve_R(const QbdBlocks& blocks, double tol = 1e-12, long max_iter = 1000000);

// Stationary queue-length probabilities p_0..p_{k_max}; the boundary system
// is closed with the geometric tail normalization pi_0 1 + pi_1 (I-R)^{-1} 1.
std::vector<double> stationary_pmf(const QbdModel& model, int k_max, double tol = 1e-12);

// Case-study grid: for each l, fit the first l moments of both PHs with the
// given optimizer configuration, solve the fitted PH/PH/1, and accumulate
// |p_i - p^_{i,l}|.
struct QueueStudyResult {
    std::vector<double> p_true;
    std::map<int, std::vector<double>> p_hat;             // by l
    std::map<int, std::vector<double>> accumulated;       // by l, index j
    std::map<int, std::string> failures;                  // by l, recorded not fatal
};

QueueStudyResult queue_study(const MarkovianPH& true_arrival, const MarkovianPH& true_service,
                             const std::vector<int>& l_values, const FitConfig& fit_config,
                             int k_max);

}  // namespace phfit

#endif
