#include "phfit/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "phfit/errors.hpp"
#include "phfit/rng.hpp"

namespace phfit {

std::vector<int> default_hyper_erlang_blocks(int n) {
    switch (n) {
        case 20: return {3, 4, 6, 7};
        case 50: return {3, 4, 6, 7, 8, 10, 12};
        case 100: return {3, 4, 6, 7, 8, 10, 10, 10, 10, 12, 20};
        default:
            throw config_error("no default hyper-erlang blocks for n=" + std::to_string(n) +
                               "; pass blocks explicitly");
    }
}

static std::vector<std::pair<int, int>> default_schedule() {
    return {{1, 10000}, {500, 2000}, {5000, 200}, {15000, 20}};
}

void FitConfig::check() const {
    if (population < 1) throw config_error("population must be >= 1");
    if (max_epochs < 1) throw config_error("max_epochs must be >= 1");
    if (!(epsilon > 0.0)) throw config_error("epsilon must be positive");
    if (!(step_size > 0.0)) throw config_error("step_size must be positive");
    if (structure == Structure::HyperErlang) {
        const auto b = resolved_blocks();
        if (b.empty()) throw config_error("hyper-erlang needs block sizes");
    } else if (n < 1) {
        throw config_error("n must be >= 1");
    }
    const auto& raw = schedule.empty() ? default_schedule() : schedule;
    for (size_t i = 0; i < raw.size(); ++i) {
        if (raw[i].first < 1 || raw[i].second < 1)
            throw config_error("schedule entries must be positive");
        if (i > 0 && raw[i].first <= raw[i - 1].first)
            throw config_error("schedule steps must be strictly increasing");
        if (i > 0 && raw[i].second >= raw[i - 1].second)
            throw config_error("schedule keep-counts must be strictly decreasing");
    }
    if (!schedule.empty() && schedule.back().first > max_epochs)
        throw config_error("max_epochs must cover the last schedule step");
}

std::vector<std::pair<int, int>> FitConfig::normalized_schedule() const {
    const auto raw = schedule.empty() ? default_schedule() : schedule;
    std::vector<std::pair<int, int>> out;
    for (auto [step, keep] : raw) {
        if (step > max_epochs) continue;
        keep = std::min(keep, population);
        if (!out.empty() && out.back().second == keep) continue;
        out.emplace_back(step, keep);
    }
    return out;
}

std::vector<int> FitConfig::resolved_blocks() const {
    if (structure != Structure::HyperErlang) return {};
    if (!blocks.empty()) {
        for (int d : blocks)
            if (d < 1) throw config_error("block sizes must be >= 1");
        return blocks;
    }
    return default_hyper_erlang_blocks(n);
}

namespace {

struct ParamSpace {
    Structure structure;
    int n = 0;
    std::vector<int> blocks;

    static ParamSpace from_config(const FitConfig& c) {
        ParamSpace s;
        s.structure = c.structure;
        if (c.structure == Structure::HyperErlang) {
            s.blocks = c.resolved_blocks();
            s.n = std::accumulate(s.blocks.begin(), s.blocks.end(), 0);
        } else {
            s.n = c.n;
        }
        return s;
    }

    int dim() const {
        switch (structure) {
            case Structure::General: return n * (n + 2);
            case Structure::Coxian: return 2 * n - 1;
            case Structure::HyperErlang: return 2 * static_cast<int>(blocks.size());
        }
        return 0;
    }

    // Draw order is part of the reproducibility contract: a then gamma then
    // Z (general), gamma then u (coxian), beta then delta (hyper-erlang).
    FitParams draw(Rng& rng) const {
        const double hi = std::sqrt(10.0);  // gamma^2 spans [0.01, 10]
        switch (structure) {
            case Structure::General: {
                GeneralParams p;
                p.a.resize(n);
                for (int i = 0; i < n; ++i) p.a(i) = rng.normal();
                p.gamma.resize(n);
                for (int i = 0; i < n; ++i) p.gamma(i) = rng.uniform(0.1, hi);
                p.Z.resize(n, n);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) p.Z(i, j) = rng.normal();
                return p;
            }
            case Structure::Coxian: {
                CoxianParams p;
                p.gamma.resize(n);
                for (int i = 0; i < n; ++i) p.gamma(i) = rng.uniform(0.1, hi);
                p.u.resize(n - 1);
                for (int i = 0; i + 1 < n; ++i) p.u(i) = rng.normal();
                return p;
            }
            case Structure::HyperErlang: {
                HyperErlangParams p;
                const int k = static_cast<int>(blocks.size());
                p.beta.resize(k);
                for (int i = 0; i < k; ++i) p.beta(i) = rng.normal();
                p.delta.resize(k);
                for (int i = 0; i < k; ++i) p.delta(i) = rng.uniform(0.1, hi);
                p.blocks = blocks;
                return p;
            }
        }
        throw config_error("unreachable structure");
    }

    Vector flatten(const FitParams& p) const {
        Vector x(dim());
        if (const auto* g = std::get_if<GeneralParams>(&p)) {
            x.head(n) = g->a;
            x.segment(n, n) = g->gamma;
            for (int i = 0; i < n; ++i) x.segment(2 * n + i * n, n) = g->Z.row(i).transpose();
        } else if (const auto* c = std::get_if<CoxianParams>(&p)) {
            x.head(n) = c->gamma;
            x.tail(n - 1) = c->u;
        } else {
            const auto& h = std::get<HyperErlangParams>(p);
            const int k = static_cast<int>(blocks.size());
            x.head(k) = h.beta;
            x.tail(k) = h.delta;
        }
        return x;
    }

    FitParams unflatten(const Vector& x) const {
        switch (structure) {
            case Structure::General: {
                GeneralParams g;
                g.a = x.head(n);
                g.gamma = x.segment(n, n);
                g.Z.resize(n, n);
                for (int i = 0; i < n; ++i) g.Z.row(i) = x.segment(2 * n + i * n, n).transpose();
                return g;
            }
            case Structure::Coxian: {
                CoxianParams c;
                c.gamma = x.head(n);
                c.u = x.tail(n - 1);
                return c;
            }
            case Structure::HyperErlang: {
                HyperErlangParams h;
                const int k = static_cast<int>(blocks.size());
                h.beta = x.head(k);
                h.delta = x.tail(k);
                h.blocks = blocks;
                return h;
            }
        }
        throw config_error("unreachable structure");
    }

    double loss_gradient_flat(const Vector& x, const FitTarget& target, Vector& grad) const {
        const FitParams p = unflatten(x);
        FitParams g;
        const double value = loss_gradient(p, target, g);
        grad = flatten(g);
        return value;
    }
};

int resolve_workers(int requested) {
    int w = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PHFIT_WORKERS")) {
        const int cap = std::atoi(env);
        if (cap > 0) w = std::min(w, cap);
    }
    return std::max(1, w);
}

struct Candidate {
    Vector x, m, v;  // parameters + adam first/second moment estimates
    double loss = std::numeric_limits<double>::infinity();
    int steps = 0;
    bool alive = true;
};

// Internal mean-1 rescaling: moments m_k / m1^k with weights w_k m1^{2k}
// (the loss value is unchanged by this substitution), CDF abscissae x / m1,
// PDF points mapped onto the normalized scale.
FitTarget normalize_target(const FitTarget& target, double m1) {
    FitTarget t = target;
    double scale = 1.0;
    for (int k = 0; k < target.l(); ++k) {
        scale *= m1;
        t.moments(k) = target.moments(k) / scale;
        t.weights(k) = target.weights(k) * scale * scale;
    }
    for (auto& [x, y] : t.cdf_points) x /= m1;
    for (auto& [x, y] : t.pdf_points) {
        x /= m1;
        y *= m1;
    }
    return t;
}

// X = m1 X' <=> T = T' / m1: divide the squared-rate parameters by m1.
FitParams rescale_params(const FitParams& p, double m1) {
    const double s = 1.0 / std::sqrt(m1);
    FitParams out = p;
    if (auto* g = std::get_if<GeneralParams>(&out))
        g->gamma *= s;
    else if (auto* c = std::get_if<CoxianParams>(&out))
        c->gamma *= s;
    else
        std::get<HyperErlangParams>(out).delta *= s;
    return out;
}

}  // namespace

std::vector<FitParams> init_population(const FitConfig& config) {
    config.check();
    const ParamSpace space = ParamSpace::from_config(config);
    std::vector<FitParams> out;
    out.reserve(static_cast<size_t>(config.population));
    for (int i = 0; i < config.population; ++i) {
        Rng rng(Rng::derive(config.seed, static_cast<std::uint64_t>(i)));
        out.push_back(space.draw(rng));
    }
    return out;
}

FitResult fit(const FitTarget& target, const FitConfig& config) {
    const auto t_start = std::chrono::steady_clock::now();
    config.check();
    target.check();

    const double m1 = target.moments(0);
    const FitTarget internal = normalize_target(target, m1);
    const ParamSpace space = ParamSpace::from_config(config);
    const auto schedule = config.normalized_schedule();
    const int workers = resolve_workers(config.workers);

    std::vector<Candidate> pop(static_cast<size_t>(config.population));
    for (int i = 0; i < config.population; ++i) {
        Rng rng(Rng::derive(config.seed, static_cast<std::uint64_t>(i)));
        pop[static_cast<size_t>(i)].x = space.flatten(space.draw(rng));
        pop[static_cast<size_t>(i)].m = Vector::Zero(space.dim());
        pop[static_cast<size_t>(i)].v = Vector::Zero(space.dim());
    }
    std::vector<int> live(pop.size());
    std::iota(live.begin(), live.end(), 0);

    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    // Global best snapshot, taken at the evaluated (pre-update) point. The
    // min-with-index-tiebreak reduction makes the result independent of the
    // worker partition.
    std::mutex best_mutex;
    std::atomic<double> best_hint{std::numeric_limits<double>::infinity()};
    double best_loss = std::numeric_limits<double>::infinity();
    int best_index = -1;
    Vector best_x;

    auto evaluate_range = [&](size_t lo, size_t hi) {
        Vector grad(space.dim());
        for (size_t k = lo; k < hi; ++k) {
            const int idx = live[k];
            Candidate& cand = pop[static_cast<size_t>(idx)];
            double value;
            try {
                value = space.loss_gradient_flat(cand.x, internal, grad);
                if (!std::isfinite(value) || !grad.allFinite())
                    throw numeric_error("non-finite candidate state");
            } catch (const std::exception&) {
                cand.alive = false;
                continue;
            }
            cand.loss = value;
            if (value <= best_hint.load(std::memory_order_relaxed)) {
                std::lock_guard<std::mutex> lock(best_mutex);
                if (value < best_loss || (value == best_loss && idx < best_index)) {
                    best_loss = value;
                    best_index = idx;
                    best_x = cand.x;
                    best_hint.store(value, std::memory_order_relaxed);
                }
            }
            cand.steps += 1;
            cand.m = beta1 * cand.m + (1.0 - beta1) * grad;
            cand.v = beta2 * cand.v.array() + (1.0 - beta2) * grad.array().square();
            const double c1 = 1.0 - std::pow(beta1, cand.steps);
            const double c2 = 1.0 - std::pow(beta2, cand.steps);
            cand.x.array() -= config.step_size * (cand.m.array() / c1) /
                              ((cand.v.array() / c2).sqrt() + adam_eps);
        }
    };

    FitResult result;
    result.stop_reason = "max_epochs";
    result.epochs_run = config.max_epochs;

    size_t schedule_pos = 0;
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        // Cull to the scheduled keep-count using each candidate's latest loss.
        bool culled = false;
        if (schedule_pos < schedule.size() && schedule[schedule_pos].first == epoch) {
            const size_t keep = static_cast<size_t>(schedule[schedule_pos].second);
            ++schedule_pos;
            if (live.size() > keep) {
                std::stable_sort(live.begin(), live.end(), [&](int a, int b) {
                    return pop[static_cast<size_t>(a)].loss < pop[static_cast<size_t>(b)].loss;
                });
                live.resize(keep);
                std::sort(live.begin(), live.end());
                culled = true;
            }
        }

        if (workers > 1 && live.size() > 1) {
            const size_t nthreads = std::min<size_t>(static_cast<size_t>(workers), live.size());
            std::vector<std::thread> threads;
            threads.reserve(nthreads);
            const size_t chunk = (live.size() + nthreads - 1) / nthreads;
            for (size_t t = 0; t < nthreads; ++t) {
                const size_t lo = t * chunk;
                const size_t hi = std::min(live.size(), lo + chunk);
                if (lo < hi) threads.emplace_back(evaluate_range, lo, hi);
            }
            for (auto& th : threads) th.join();
        } else {
            evaluate_range(0, live.size());
        }
        result.candidates_evaluated += static_cast<std::int64_t>(live.size());

        std::vector<int> survivors;
        survivors.reserve(live.size());
        for (int idx : live)
            if (pop[static_cast<size_t>(idx)].alive) survivors.push_back(idx);
        if (survivors.empty()) throw numeric_error("fit: every candidate failed numerically");
        live.swap(survivors);

        if (config.progress && config.progress_every > 0 &&
            (epoch % config.progress_every == 0 || culled || epoch == 1))
            config.progress(epoch, best_loss, static_cast<int>(live.size()));

        if (best_loss < config.epsilon) {
            result.stop_reason = "epsilon";
            result.epochs_run = epoch;
            break;
        }
    }

    if (best_index < 0) throw numeric_error("fit: no candidate produced a finite loss");

    result.final_loss = best_loss;
    result.params = rescale_params(space.unflatten(best_x), m1);
    result.ph = to_markovian(result.params);

    const MomentVector fitted = moments(result.ph, target.l());
    result.per_moment_mape.resize(target.l());
    for (int k = 0; k < target.l(); ++k)
        result.per_moment_mape(k) =
            std::abs(target.moments(k) - fitted(k)) / target.moments(k) * 100.0;

    result.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

}  // namespace phfit
