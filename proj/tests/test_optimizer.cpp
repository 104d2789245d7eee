#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>
#include <vector>

#include "phfit/errors.hpp"
#include "phfit/optimizer.hpp"

using namespace phfit;

namespace {

FitConfig quick_coxian(int n, int population, int max_epochs) {
    FitConfig c;
    c.structure = Structure::Coxian;
    c.n = n;
    c.population = population;
    c.max_epochs = max_epochs;
    c.seed = 4242;
    c.workers = 2;
    return c;
}

MomentVector exp1_moments() {
    MomentVector m(5);
    m << 1, 2, 6, 24, 120;
    return m;
}

}  // namespace

TEST_CASE("config: invalid schedules and sizes are rejected") {
    FitConfig c = quick_coxian(2, 10, 100);
    c.schedule = {{1, 10}, {5, 10}};  // not strictly decreasing
    CHECK_THROWS_AS(c.check(), config_error);
    c.schedule = {{10, 10}, {5, 5}};  // not increasing steps
    CHECK_THROWS_AS(c.check(), config_error);
    c.schedule = {{1, 10}, {500, 2}};
    c.max_epochs = 100;  // does not cover the last step
    CHECK_THROWS_AS(c.check(), config_error);
    c = quick_coxian(0, 10, 100);
    CHECK_THROWS_AS(c.check(), config_error);
}

TEST_CASE("config: default schedule is clamped to the population and deduplicated") {
    FitConfig c = quick_coxian(2, 1000, 30000);
    const auto s = c.normalized_schedule();
    REQUIRE(s.size() == 3);
    CHECK(s[0] == std::pair<int, int>{1, 1000});
    CHECK(s[1] == std::pair<int, int>{5000, 200});
    CHECK(s[2] == std::pair<int, int>{15000, 20});
}

TEST_CASE("config: hyper-erlang block defaults for n in {20, 50, 100}") {
    FitConfig c;
    c.structure = Structure::HyperErlang;
    c.n = 20;
    CHECK(c.resolved_blocks() == std::vector<int>{3, 4, 6, 7});
    c.n = 50;
    CHECK(c.resolved_blocks() == std::vector<int>{3, 4, 6, 7, 8, 10, 12});
    c.n = 100;
    CHECK(c.resolved_blocks() == std::vector<int>{3, 4, 6, 7, 8, 10, 10, 10, 10, 12, 20});
    c.n = 33;
    CHECK_THROWS_AS(c.resolved_blocks(), config_error);
    c.blocks = {16, 17};
    CHECK(c.resolved_blocks() == std::vector<int>{16, 17});
}

TEST_CASE("init_population: deterministic per seed and valid under the forward map") {
    FitConfig c = quick_coxian(3, 50, 10);
    const auto a = init_population(c);
    const auto b = init_population(c);
    REQUIRE(a.size() == 50);
    for (size_t i = 0; i < a.size(); ++i) {
        const auto& pa = std::get<CoxianParams>(a[i]);
        const auto& pb = std::get<CoxianParams>(b[i]);
        CHECK(pa.gamma == pb.gamma);
        CHECK(pa.u == pb.u);
        CHECK(is_valid(to_markovian(a[i])));
    }
}

TEST_CASE("init_population: gamma^2 stays in [0.01, 10] and spans it empirically") {
    FitConfig c = quick_coxian(1, 10000, 10);
    double lo = 1e300, hi = 0.0;
    for (const auto& p : init_population(c)) {
        const double rate = std::pow(std::get<CoxianParams>(p).gamma(0), 2);
        lo = std::min(lo, rate);
        hi = std::max(hi, rate);
        CHECK(rate >= 0.01);
        CHECK(rate <= 10.0);
    }
    CHECK(lo < 0.02);
    CHECK(hi > 9.9);
}

TEST_CASE("fit: recovers the exponential from its first five moments") {
    FitConfig c = quick_coxian(1, 100, 20000);
    c.schedule = {{1, 100}, {200, 20}, {2000, 5}};
    const FitResult r = fit(target_from_moments(exp1_moments()), c);
    CHECK(r.final_loss < 1e-9);
    CHECK(r.stop_reason == "epsilon");
    CHECK(-r.ph.T(0, 0) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.per_moment_mape.maxCoeff() < 1e-2);
}

TEST_CASE("fit: schedule accounting matches the live population per epoch") {
    FitConfig c = quick_coxian(1, 4, 3);
    c.schedule = {{1, 4}, {2, 2}, {3, 1}};
    c.epsilon = 1e-300;  // never stops early
    std::vector<int> live;
    c.progress = [&](int, double, int n) { live.push_back(n); };
    c.progress_every = 1;
    const FitResult r = fit(target_from_moments(exp1_moments()), c);
    CHECK(live == std::vector<int>{4, 2, 1});
    CHECK(r.candidates_evaluated == 7);
    CHECK(r.epochs_run == 3);
    CHECK(r.stop_reason == "max_epochs");
}

TEST_CASE("fit: best-so-far loss is nonincreasing across culling steps") {
    FitConfig c = quick_coxian(3, 60, 400);
    c.schedule = {{1, 60}, {50, 20}, {150, 5}};
    c.epsilon = 1e-300;
    std::vector<double> best;
    c.progress = [&](int, double b, int) { best.push_back(b); };
    c.progress_every = 1;
    MomentVector m(3);
    m << 1.0, 2.4, 8.0;
    fit(target_from_moments(m), c);
    for (size_t i = 1; i < best.size(); ++i) CHECK(best[i] <= best[i - 1]);
}

TEST_CASE("fit: identical seeds give identical results, independent of workers") {
    MomentVector m(4);
    m << 1.0, 1.9, 5.2, 20.0;
    FitConfig c = quick_coxian(4, 40, 300);
    c.schedule = {{1, 40}, {100, 8}};
    c.epsilon = 1e-12;

    c.workers = 1;
    const FitResult r1 = fit(target_from_moments(m), c);
    c.workers = 2;
    const FitResult r2 = fit(target_from_moments(m), c);

    CHECK(r1.final_loss == r2.final_loss);  // min-reduction is order independent
    const auto& p1 = std::get<CoxianParams>(r1.params);
    const auto& p2 = std::get<CoxianParams>(r2.params);
    CHECK(p1.gamma == p2.gamma);
    CHECK(p1.u == p2.u);
    CHECK(r1.epochs_run == r2.epochs_run);
    CHECK(r1.candidates_evaluated == r2.candidates_evaluated);
}

TEST_CASE("fit: rescaling the target rescales the fitted moments") {
    MomentVector m(3);
    m << 1.0, 2.5, 9.0;
    FitConfig c = quick_coxian(3, 50, 500);
    c.schedule = {{1, 50}, {100, 10}};
    c.epsilon = 1e-13;
    const FitResult base = fit(target_from_moments(m), c);

    const double scale = 3.0;
    MomentVector m2(3);
    double f = 1.0;
    for (int k = 0; k < 3; ++k) {
        f *= scale;
        m2(k) = m(k) * f;
    }
    const FitResult scaled = fit(target_from_moments(m2), c);

    const MomentVector mu_base = moments(base.ph, 3);
    const MomentVector mu_scaled = moments(scaled.ph, 3);
    f = 1.0;
    for (int k = 0; k < 3; ++k) {
        f *= scale;
        CHECK(mu_scaled(k) == doctest::Approx(mu_base(k) * f).epsilon(1e-9));
    }
}

TEST_CASE("fit: per-moment MAPE is consistent with the returned PH") {
    MomentVector m(3);
    m << 2.0, 9.0, 55.0;
    FitConfig c = quick_coxian(3, 30, 200);
    c.schedule = {{1, 30}, {100, 5}};
    const FitResult r = fit(target_from_moments(m), c);
    const MomentVector mu = moments(r.ph, 3);
    for (int k = 0; k < 3; ++k) {
        const double expect = std::abs(m(k) - mu(k)) / m(k) * 100.0;
        CHECK(r.per_moment_mape(k) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("fit: stop reasons are consistent with the contract") {
    MomentVector m(2);
    m << 1.0, 2.0;
    FitConfig c = quick_coxian(1, 10, 50);
    c.epsilon = 1e-300;
    const FitResult r = fit(target_from_moments(m), c);
    CHECK(r.stop_reason == "max_epochs");
    CHECK(r.epochs_run == 50);

    c.epsilon = 1e-6;
    c.max_epochs = 20000;
    const FitResult r2 = fit(target_from_moments(m), c);
    if (r2.stop_reason == "epsilon") CHECK(r2.final_loss < 1e-6);
}
