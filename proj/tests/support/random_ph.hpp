#ifndef PHFIT_TESTS_RANDOM_PH_HPP
#define PHFIT_TESTS_RANDOM_PH_HPP

#include "phfit/reparam.hpp"
#include "phfit/rng.hpp"

namespace phfit::testsupport {

// Random interior PH via the general forward map (all entries positive,
// strictly negative row sums).
inline MarkovianPH random_interior_ph(int n, Rng& rng) {
    GeneralParams p;
    p.a.resize(n);
    p.gamma.resize(n);
    p.Z.resize(n, n);
    for (int i = 0; i < n; ++i) p.a(i) = rng.normal();
    for (int i = 0; i < n; ++i) p.gamma(i) = rng.uniform(0.3, 2.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) p.Z(i, j) = rng.normal();
    return to_markovian(p);
}

inline GeneralParams random_general_params(int n, Rng& rng, double scale = 1.0) {
    GeneralParams p;
    p.a.resize(n);
    p.gamma.resize(n);
    p.Z.resize(n, n);
    for (int i = 0; i < n; ++i) p.a(i) = scale * rng.normal();
    for (int i = 0; i < n; ++i) p.gamma(i) = rng.uniform(0.3, 2.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) p.Z(i, j) = scale * rng.normal();
    return p;
}

inline CoxianParams random_coxian_params(int n, Rng& rng, double scale = 1.0) {
    CoxianParams p;
    p.gamma.resize(n);
    p.u.resize(n - 1);
    for (int i = 0; i < n; ++i) p.gamma(i) = rng.uniform(0.3, 2.0);
    for (int i = 0; i + 1 < n; ++i) p.u(i) = scale * rng.normal();
    return p;
}

inline HyperErlangParams random_hypererlang_params(const std::vector<int>& blocks, Rng& rng,
                                                   double scale = 1.0) {
    HyperErlangParams p;
    const int k = static_cast<int>(blocks.size());
    p.beta.resize(k);
    p.delta.resize(k);
    p.blocks = blocks;
    for (int i = 0; i < k; ++i) p.beta(i) = scale * rng.normal();
    for (int i = 0; i < k; ++i) p.delta(i) = rng.uniform(0.3, 2.0);
    return p;
}

}  // namespace phfit::testsupport

#endif
