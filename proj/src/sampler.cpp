#include "phfit/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phfit/errors.hpp"

namespace phfit {

void SampleSpec::check() const {
    if (size_min < 1 || size_max < size_min)
        throw config_error("sample spec: size range must satisfy 1 <= min <= max");
    if (count < 1) throw config_error("sample spec: count must be >= 1");
    if (moment_count < 1) throw config_error("sample spec: moment_count must be >= 1");
}

MarkovianPH sample_general(int n, Rng& rng) {
    GeneralParams p;
    // Uniform interior simplex point via normalized exponentials, fed to the
    // forward map through its log (softmax(log w) = w / sum w).
    Vector w(n);
    for (int i = 0; i < n; ++i) w(i) = rng.exponential(1.0);
    p.a = w.array().log();
    p.gamma.resize(n);
    for (int i = 0; i < n; ++i) p.gamma(i) = rng.uniform(0.1, 10.0);
    p.Z.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) p.Z(i, j) = rng.uniform01();

    MarkovianPH ph = to_markovian(p);

    // Broaden the moment range by zeroing a uniform count of off-diagonal
    // entries; row sums only become more negative, so validity is preserved.
    const int max_zeros = n * n - n;
    if (max_zeros > 0) {
        const int z = static_cast<int>(rng.uniform_int(0, max_zeros));
        std::vector<int> positions(static_cast<size_t>(max_zeros));
        std::iota(positions.begin(), positions.end(), 0);
        for (int i = 0; i < z; ++i) {
            const int j = static_cast<int>(rng.uniform_int(i, max_zeros - 1));
            std::swap(positions[static_cast<size_t>(i)], positions[static_cast<size_t>(j)]);
            const int pos = positions[static_cast<size_t>(i)];
            const int row = pos / (n - 1);
            int col = pos % (n - 1);
            if (col >= row) ++col;
            ph.T(row, col) = 0.0;
        }
    }
    return ph;
}

MarkovianPH sample_coxian(int n, Rng& rng) {
    Vector alpha = Vector::Zero(n);
    alpha(0) = 1.0;
    Matrix T = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double lambda = rng.uniform(0.1, 10.0);
        T(i, i) = -lambda;
        if (i + 1 < n) T(i, i + 1) = rng.uniform01() * lambda;
    }
    return {alpha, T};
}

std::vector<int> sample_composition(int n, int k, Rng& rng) {
    if (k < 1 || k > n) throw config_error("composition: need 1 <= k <= n");
    // Partial Fisher-Yates over the n-1 gap positions 1..n-1.
    std::vector<int> gaps(static_cast<size_t>(n - 1));
    std::iota(gaps.begin(), gaps.end(), 1);
    std::vector<int> cuts;
    for (int i = 0; i < k - 1; ++i) {
        const int j = static_cast<int>(rng.uniform_int(i, n - 2));
        std::swap(gaps[static_cast<size_t>(i)], gaps[static_cast<size_t>(j)]);
        cuts.push_back(gaps[static_cast<size_t>(i)]);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<int> blocks;
    int prev = 0;
    for (int c : cuts) {
        blocks.push_back(c - prev);
        prev = c;
    }
    blocks.push_back(n - prev);
    return blocks;
}

MarkovianPH sample_hypererlang(int n, Rng& rng) {
    const int k_max = std::max(1, n / 2);
    const int k = static_cast<int>(rng.uniform_int(1, k_max));
    const std::vector<int> blocks = sample_composition(n, k, rng);

    Vector omega(k);
    for (int j = 0; j < k; ++j) {
        double w;
        do {
            w = rng.uniform01();
        } while (w <= 0.0);
        omega(j) = w;
    }
    omega /= omega.sum();
    Vector lambda(k);
    for (int j = 0; j < k; ++j) lambda(j) = rng.uniform(0.1, 10.0);

    return to_markovian(from_markovian_hypererlang(omega, lambda, blocks));
}

MarkovianPH sample_structure(Structure family, int n, Rng& rng) {
    switch (family) {
        case Structure::General: return sample_general(n, rng);
        case Structure::Coxian: return sample_coxian(n, rng);
        case Structure::HyperErlang: return sample_hypererlang(n, rng);
    }
    throw config_error("unreachable family");
}

std::vector<TestInstance> generate_testset(const SampleSpec& spec) {
    spec.check();
    std::vector<TestInstance> out;
    out.reserve(static_cast<size_t>(spec.count));
    for (int i = 0; i < spec.count; ++i) {
        Rng rng(Rng::derive(spec.seed, static_cast<std::uint64_t>(i)));
        TestInstance inst;
        inst.id = i;
        inst.n = static_cast<int>(rng.uniform_int(spec.size_min, spec.size_max));
        inst.ph = normalize_mean(sample_structure(spec.family, inst.n, rng), 1.0);
        inst.moments = moments(inst.ph, spec.moment_count);
        out.push_back(std::move(inst));
    }
    return out;
}

}  // namespace phfit
