#ifndef PHFIT_SAMPLER_HPP
#define PHFIT_SAMPLER_HPP

#include <cstdint>
#include <vector>

#include "phfit/reparam.hpp"

namespace phfit {

// Test-set generation spec: random PH instances of one family with sizes
// uniform on size_range, mean-normalized to 1, with their leading moments.
struct SampleSpec {
    Structure family = Structure::Coxian;
    int size_min = 1;
    int size_max = 200;
    int count = 500;
    std::uint64_t seed = 12345;
    int moment_count = 20;

    void check() const;  // throws config_error
};

struct TestInstance {
    int id = 0;
    int n = 0;
    MarkovianPH ph;          // mean 1
    MomentVector moments;    // m_1..m_{moment_count}
};

// General family: alpha uniform on the simplex interior, gamma ~ U[0.1,10],
// Z ~ U[0,1], mapped through the general forward map; then a uniform number
// of off-diagonal T entries (0..n^2-n) is zeroed at uniform positions.
MarkovianPH sample_general(int n, Rng& rng);

// Coxian chain with p_i ~ U[0,1] and lambda_i ~ U[0.1,10].
MarkovianPH sample_coxian(int n, Rng& rng);

// Hyper-Erlang with k ~ U{1..max(1, n/2)}, blocks a uniform composition of n
// into k parts, omega ~ U(0,1) normalized, lambda ~ U(0.1,10).
MarkovianPH sample_hypererlang(int n, Rng& rng);

MarkovianPH sample_structure(Structure family, int n, Rng& rng);

// Uniform composition of n into k positive parts (stars and bars: a uniform
// (k-1)-subset of the n-1 gaps).
std::vector<int> sample_composition(int n, int k, Rng& rng);

// Deterministic per (spec.seed, instance id); instances are mean-normalized
// and carry their first moment_count moments.
std::vector<TestInstance> generate_testset(const SampleSpec& spec);

}  // namespace phfit

#endif
