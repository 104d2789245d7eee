#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "phfit/sampler.hpp"

using namespace phfit;

TEST_CASE("sample_general: n=1 yields an exponential with rate in [0.01, 100]") {
    Rng rng(31);
    for (int rep = 0; rep < 200; ++rep) {
        const MarkovianPH ph = sample_general(1, rng);
        CHECK(is_valid(ph));
        const double rate = -ph.T(0, 0);
        CHECK(rate >= 0.01);
        CHECK(rate <= 100.0);
    }
}

TEST_CASE("sample_general: zeroing never breaks validity, row sums stay nonpositive") {
    Rng rng(32);
    for (int rep = 0; rep < 100; ++rep) {
        const MarkovianPH ph = sample_general(2 + rep % 8, rng);
        CHECK(is_valid(ph));
        for (int i = 0; i < ph.n(); ++i) CHECK(ph.T.row(i).sum() <= 1e-12);
    }
}

TEST_CASE("sample_general: zeroed-entry count is uniform on {0..n^2-n} (chi-square)") {
    Rng rng(33);
    const int n = 5, trials = 1000, bins = n * n - n + 1;  // 21
    std::vector<int> hist(bins, 0);
    for (int rep = 0; rep < trials; ++rep) {
        const MarkovianPH ph = sample_general(n, rng);
        int zeros = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && ph.T(i, j) == 0.0) ++zeros;
        ++hist[zeros];
    }
    const double expected = double(trials) / bins;
    double stat = 0.0;
    for (int b = 0; b < bins; ++b) {
        const double d = hist[b] - expected;
        stat += d * d / expected;
    }
    // chi-square critical value, 20 dof, p = 0.01.
    CHECK(stat < 37.566);
}

TEST_CASE("sample_coxian: valid outputs, rate range, p_1 mean near 0.5") {
    Rng rng(34);
    {
        const MarkovianPH ph = sample_coxian(1, rng);
        CHECK(is_valid(ph));
        CHECK(-ph.T(0, 0) >= 0.1);
        CHECK(-ph.T(0, 0) <= 10.0);
    }
    double sum_p1 = 0.0;
    const int trials = 10000;
    for (int rep = 0; rep < trials; ++rep) {
        const MarkovianPH ph = sample_coxian(3, rng);
        CHECK(is_valid(ph));
        sum_p1 += ph.T(0, 1) / (-ph.T(0, 0));
    }
    CHECK(std::abs(sum_p1 / trials - 0.5) < 0.02);
}

TEST_CASE("sample_composition: block sums equal n; uniform over compositions") {
    Rng rng(35);
    std::map<std::pair<int, int>, int> freq;
    const int trials = 10000;
    for (int rep = 0; rep < trials; ++rep) {
        const auto blocks = sample_composition(4, 2, rng);
        REQUIRE(blocks.size() == 2);
        CHECK(blocks[0] + blocks[1] == 4);
        ++freq[{blocks[0], blocks[1]}];
    }
    REQUIRE(freq.size() == 3);  // (1,3), (2,2), (3,1)
    for (const auto& [key, count] : freq)
        CHECK(std::abs(count / double(trials) - 1.0 / 3.0) < 0.02);
}

TEST_CASE("sample_hypererlang: n=1 gives a single exponential; all outputs valid") {
    Rng rng(36);
    {
        const MarkovianPH ph = sample_hypererlang(1, rng);
        CHECK(ph.n() == 1);
        CHECK(is_valid(ph));
    }
    for (int rep = 0; rep < 100; ++rep) {
        const MarkovianPH ph = sample_hypererlang(2 + rep % 12, rng);
        CHECK(is_valid(ph));
        CHECK(ph.n() == 2 + rep % 12);
    }
}

TEST_CASE("generate_testset: mean 1, deterministic, finite positive moments") {
    SampleSpec spec;
    spec.family = Structure::HyperErlang;
    spec.size_min = 1;
    spec.size_max = 40;
    spec.count = 50;
    spec.seed = 2025;
    const auto set = generate_testset(spec);
    const auto again = generate_testset(spec);
    REQUIRE(set.size() == 50);
    for (size_t i = 0; i < set.size(); ++i) {
        CHECK(is_valid(set[i].ph));
        CHECK(std::abs(set[i].moments(0) - 1.0) <= 1e-9);
        for (int k = 0; k < 20; ++k) {
            CHECK(std::isfinite(set[i].moments(k)));
            CHECK(set[i].moments(k) > 0.0);
        }
        CHECK(set[i].ph.T == again[i].ph.T);
        CHECK(set[i].ph.alpha == again[i].ph.alpha);
    }
}

TEST_CASE("generate_testset: coxian m_2 range is broadly consistent with the reference table") {
    SampleSpec spec;
    spec.family = Structure::Coxian;
    spec.count = 200;
    spec.seed = 99;
    const auto set = generate_testset(spec);
    int inside = 0;
    for (const auto& inst : set)
        if (inst.moments(1) >= 1.005 && inst.moments(1) <= 384.63) ++inside;
    CHECK(inside >= 190);  // >= 95%
}
