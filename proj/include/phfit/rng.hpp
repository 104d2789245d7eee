#ifndef PHFIT_RNG_HPP
#define PHFIT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace phfit {

// Deterministic random source. All distribution transforms are implemented
// here (rather than via std:: distributions, whose output is
// implementation-defined) so that a given seed produces the same stream on
// every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1).
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Inclusive integer range.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range == 0) return lo + static_cast<std::int64_t>(gen_());
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return lo + static_cast<std::int64_t>(x % range);
    }

    // Box-Muller; consumes two uniforms per draw, no cached state.
    double normal() {
        double u1;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double exponential(double rate) {
        double u;
        do {
            u = uniform01();
        } while (u >= 1.0);
        return -std::log(1.0 - u) / rate;
    }

    // Independent stream for sub-task `stream` of a run seeded with `seed`
    // (per-candidate and per-instance seeding).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
        x = splitmix(x);
        x = splitmix(x);
        return x;
    }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 gen_;
};

}  // namespace phfit

#endif
