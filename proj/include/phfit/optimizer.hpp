#ifndef PHFIT_OPTIMIZER_HPP
#define PHFIT_OPTIMIZER_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "phfit/objective.hpp"

namespace phfit {

// Multi-start gradient-descent configuration. The default schedule culls the
// population at epochs 1/500/5000/15000 down to 10000/2000/200/20 survivors;
// keep-counts are clamped to the population size and entries beyond
// max_epochs are dropped.
struct FitConfig {
    Structure structure = Structure::HyperErlang;
    int n = 20;
    std::vector<int> blocks;  // hyper-erlang only; defaulted from n when empty

    int population = 10000;                          // s
    int max_epochs = 125000;
    double epsilon = 1e-9;                           // loss stop threshold
    std::vector<std::pair<int, int>> schedule;       // (epoch, keep-count), defaulted when empty
    double step_size = 0.01;
    std::uint64_t seed = 12345;
    int workers = 0;  // 0 = hardware concurrency (also capped by PHFIT_WORKERS)

    // Progress hook: (epoch, best-so-far loss, live candidates). Called every
    // progress_every epochs and at culling steps when progress_every > 0.
    std::function<void(int, double, int)> progress;
    int progress_every = 0;

    // Resolved schedule: clamped to population, filtered to max_epochs,
    // deduplicated. Throws config_error on a malformed explicit schedule.
    std::vector<std::pair<int, int>> normalized_schedule() const;

    // Block sizes to use for hyper-erlang (explicit, or the defaults for
    // n in {20, 50, 100}).
    std::vector<int> resolved_blocks() const;

    void check() const;  // throws config_error
};

// Block-size defaults for hyper-erlang at the standard sizes.
std::vector<int> default_hyper_erlang_blocks(int n);

struct FitResult {
    MarkovianPH ph;          // best candidate, mapped back to the target scale
    FitParams params;        // matching family parameters
    double final_loss = 0.0;
    Vector per_moment_mape;  // percent, against the original target moments
    int epochs_run = 0;
    std::int64_t candidates_evaluated = 0;
    double wall_time = 0.0;  // seconds
    std::string stop_reason;  // "epsilon" | "max_epochs"
};

// The s starting points; candidate i is drawn from the stream derived from
// (config.seed, i), so the population is reproducible and order-independent.
std::vector<FitParams> init_population(const FitConfig& config);

// Runs the multi-start descent on the target (internally rescaled to mean 1)
// and returns the best candidate rescaled back to the target's scale.
// Candidates that fail numerically are discarded; the run aborts only if
// every candidate has failed.
FitResult fit(const FitTarget& target, const FitConfig& config);

}  // namespace phfit

#endif
