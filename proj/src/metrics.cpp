#include "phfit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phfit {

EvalRecord make_eval_record(std::string instance, const MomentVector& target,
                            const MomentVector& fitted, double wall_time) {
    EvalRecord r;
    r.instance = std::move(instance);
    r.target = target;
    r.fitted = fitted;
    r.per_moment_mape = mape(target, fitted);
    r.max_mape = r.per_moment_mape.maxCoeff();
    r.wall_time = wall_time;
    return r;
}

Vector mape(const MomentVector& target, const MomentVector& fitted) {
    if (target.size() != fitted.size())
        throw std::invalid_argument("mape: length mismatch (" + std::to_string(target.size()) +
                                    " vs " + std::to_string(fitted.size()) + ")");
    Vector out(target.size());
    for (Eigen::Index i = 0; i < target.size(); ++i) {
        if (!(target(i) > 0.0))
            throw std::invalid_argument("mape: target moment " + std::to_string(i + 1) +
                                        " must be positive");
        out(i) = std::abs(target(i) - fitted(i)) / target(i) * 100.0;
    }
    return out;
}

double success_rate(const std::vector<EvalRecord>& records, double eta) {
    if (records.empty()) throw std::invalid_argument("success_rate: no records");
    int accurate = 0;
    for (const auto& r : records)
        if (r.max_mape <= eta) ++accurate;
    return 100.0 * accurate / static_cast<double>(records.size());
}

double accumulated_error(const std::vector<double>& p, const std::vector<double>& p_hat, int j) {
    if (j < 0 || j >= static_cast<int>(p.size()) || j >= static_cast<int>(p_hat.size()))
        throw std::out_of_range("accumulated_error: index out of range");
    double acc = 0.0;
    for (int i = 0; i <= j; ++i) acc += std::abs(p[static_cast<size_t>(i)] - p_hat[static_cast<size_t>(i)]);
    return acc;
}

double kl_divergence(const MarkovianPH& p, const MarkovianPH& q, const QuadratureSpec& grid) {
    if (grid.panels < 2 || grid.panels % 2 != 0)
        throw std::invalid_argument("kl_divergence: panels must be even and >= 2");
    double x_max = grid.x_max;
    if (!(x_max > 0.0))
        x_max = std::max(quantile(p, 1.0 - grid.tail_prob), quantile(q, 1.0 - grid.tail_prob));

    const int points = grid.panels + 1;
    const double h = x_max / grid.panels;
    const Vector fp = pdf_grid(p, 0.0, h, points);
    const Vector fq = pdf_grid(q, 0.0, h, points);

    constexpr double floor_density = 1e-300;
    auto integrand = [&](int i) {
        const double a = fp(i);
        if (a <= floor_density) return 0.0;  // lim f->0 of f log f
        return a * std::log(a / std::max(fq(i), floor_density));
    };

    double sum = integrand(0) + integrand(points - 1);
    for (int i = 1; i < points - 1; ++i) sum += (i % 2 ? 4.0 : 2.0) * integrand(i);
    return sum * h / 3.0;
}

}  // namespace phfit
