#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "phfit/errors.hpp"
#include "phfit/ph.hpp"
#include "support/random_ph.hpp"

using namespace phfit;
using testsupport::random_interior_ph;

TEST_CASE("validate: exponential(1) is valid") {
    CHECK(validate(MarkovianPH::exponential(1.0)).empty());
}

TEST_CASE("validate: broken alpha sum is reported with magnitude") {
    Vector a(2);
    a << 0.5, 0.6;
    Matrix T(2, 2);
    T << -1, 0, 0, -1;
    const auto v = validate({a, T});
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == Violation::Kind::AlphaSum);
    CHECK(v[0].magnitude == doctest::Approx(0.1));
}

TEST_CASE("validate: positive row sum is reported with row and excess") {
    Vector a(2);
    a << 1, 0;
    Matrix T(2, 2);
    T << -1, 2, 0, -1;
    const auto v = validate({a, T});
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == Violation::Kind::RowSumPositive);
    CHECK(v[0].i == 0);
    CHECK(v[0].magnitude == doctest::Approx(1.0));
}

TEST_CASE("moments: exponential(1) gives i!") {
    const MomentVector m = moments(MarkovianPH::exponential(1.0), 5);
    const double expected[] = {1, 2, 6, 24, 120};
    for (int i = 0; i < 5; ++i) CHECK(m(i) == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("moments: Erlang-2 rate 2") {
    const MomentVector m = moments(MarkovianPH::erlang(2, 2.0), 2);
    CHECK(m(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m(1) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("moments: singular subgenerator raises") {
    Vector a(2);
    a << 0.5, 0.5;
    Matrix T(2, 2);
    // Row-sum-zero rows in both rows make T singular: rows are multiples.
    T << -1, 1, 1, -1;
    CHECK_THROWS_AS(moments({a, T}, 1), singular_matrix_error);
}

TEST_CASE("moments: agree with Monte Carlo absorption sampling within 4 sigma") {
    Rng rng(99101);
    const MarkovianPH ph = random_interior_ph(5, rng);
    REQUIRE(is_valid(ph));
    const MomentVector m = moments(ph, 3);

    Rng sim(424242);
    const int N = 1000000;
    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(3), sumsq = Eigen::ArrayXd::Zero(3);
    for (int i = 0; i < N; ++i) {
        const double x = sample_absorption_time(ph, sim);
        double p = 1.0;
        for (int k = 0; k < 3; ++k) {
            p *= x;
            sum(k) += p;
            sumsq(k) += p * p;
        }
    }
    for (int k = 0; k < 3; ++k) {
        const double mean_k = sum(k) / N;
        const double var_k = sumsq(k) / N - mean_k * mean_k;
        const double se = std::sqrt(var_k / N);
        CHECK(std::abs(mean_k - m(k)) < 4.0 * se);
    }
}

TEST_CASE("moments: linear-solve path equals explicit inverse powers for n <= 8") {
    Rng rng(7331);
    for (int n : {2, 4, 8}) {
        const MarkovianPH ph = random_interior_ph(n, rng);
        const MomentVector fast = moments(ph, 6);
        const Matrix Tinv = ph.T.inverse();
        Matrix P = Matrix::Identity(n, n);
        double factorial = 1.0, sign = 1.0;
        for (int k = 1; k <= 6; ++k) {
            P = P * Tinv;
            factorial *= k;
            sign = -sign;
            const double direct = factorial * sign * ph.alpha.dot(P * Vector::Ones(n));
            CHECK(fast(k - 1) == doctest::Approx(direct).epsilon(1e-10));
        }
    }
}

TEST_CASE("cdf: exponential closed forms") {
    const MarkovianPH e1 = MarkovianPH::exponential(1.0);
    CHECK(cdf(e1, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(cdf(e1, std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("cdf: Erlang-2 rate 1 at x=2 equals 1 - 3 e^{-2}") {
    CHECK(cdf(MarkovianPH::erlang(2, 1.0), 2.0) ==
          doctest::Approx(1.0 - 3.0 * std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("cdf: nondecreasing on a grid for random PHs") {
    Rng rng(5150);
    for (int rep = 0; rep < 10; ++rep) {
        const MarkovianPH ph = random_interior_ph(4, rng);
        const double m1 = mean(ph);
        double prev = cdf(ph, 0.0);
        for (int i = 1; i <= 50; ++i) {
            const double cur = cdf(ph, i * (5.0 * m1 / 50));
            CHECK(cur >= prev - 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("pdf: exponential closed forms") {
    CHECK(pdf(MarkovianPH::exponential(1.0), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pdf(MarkovianPH::exponential(3.0), 1.0) ==
          doctest::Approx(3.0 * std::exp(-3.0)).epsilon(1e-12));
}

TEST_CASE("pdf: Simpson integral of pdf reproduces cdf within 1e-6") {
    Rng rng(2024);
    for (int rep = 0; rep < 10; ++rep) {
        const MarkovianPH ph = random_interior_ph(3 + rep % 4, rng);
        const double x = 2.0 * mean(ph);
        const int panels = 2000;
        const double h = x / panels;
        const Vector f = pdf_grid(ph, 0.0, h, panels + 1);
        double sum = f(0) + f(panels);
        for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i);
        const double integral = sum * h / 3.0;
        CHECK(integral == doctest::Approx(cdf(ph, x)).epsilon(1e-6));
    }
}

TEST_CASE("pdf: nonnegative over [0, 10 m1] for 50 random PHs") {
    Rng rng(31415);
    for (int rep = 0; rep < 50; ++rep) {
        const MarkovianPH ph = random_interior_ph(1 + rep % 6, rng);
        const double m1 = mean(ph);
        const Vector f = pdf_grid(ph, 0.0, 10.0 * m1 / 99, 100);
        CHECK(f.minCoeff() >= 0.0);
    }
}

TEST_CASE("normalize_mean: exponential(2) to mean 1 is exponential(1)") {
    const MarkovianPH out = normalize_mean(MarkovianPH::exponential(2.0), 1.0);
    CHECK(out.T(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("normalize_mean: identity when already at the target mean") {
    Rng rng(88);
    const MarkovianPH ph = normalize_mean(random_interior_ph(4, rng), 1.0);
    const MarkovianPH out = normalize_mean(ph, 1.0);
    CHECK((out.T - ph.T).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normalize_mean: Erlang-3 rate 1 to mean 1 has moments [1, 4/3]") {
    const MarkovianPH out = normalize_mean(MarkovianPH::erlang(3, 1.0), 1.0);
    const MomentVector m = moments(out, 2);
    CHECK(m(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m(1) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("normalize_mean: first moment exactly 1 within 1e-10 for random PHs") {
    Rng rng(4096);
    for (int rep = 0; rep < 25; ++rep) {
        const MarkovianPH ph = random_interior_ph(1 + rep % 7, rng);
        CHECK(mean(normalize_mean(ph, 1.0)) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("sample_absorption: deterministic given the seed") {
    const MarkovianPH ph = MarkovianPH::erlang(3, 2.0);
    Rng a(777), b(777);
    const auto xs = sample_absorption(ph, a, 1000);
    const auto ys = sample_absorption(ph, b, 1000);
    CHECK(xs == ys);
}

TEST_CASE("sample_absorption: exponential(1) sample mean within 4 sigma of 1") {
    Rng rng(1234);
    const auto xs = sample_absorption(MarkovianPH::exponential(1.0), rng, 1000000);
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean_x = sum / xs.size();
    CHECK(mean_x > 0.996);
    CHECK(mean_x < 1.004);
}

TEST_CASE("sample_absorption: Erlang-2 rate 2 sample mean within 4 sigma of 1") {
    Rng rng(555);
    const auto xs = sample_absorption(MarkovianPH::erlang(2, 2.0), rng, 1000000);
    double sum = 0.0, sumsq = 0.0;
    for (double x : xs) {
        sum += x;
        sumsq += x * x;
    }
    const double mean_x = sum / xs.size();
    const double se = std::sqrt((sumsq / xs.size() - mean_x * mean_x) / xs.size());
    CHECK(std::abs(mean_x - 1.0) < 4.0 * se);
}

TEST_CASE("quantile: exponential(1) median is ln 2") {
    CHECK(quantile(MarkovianPH::exponential(1.0), 0.5) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-8));
}
