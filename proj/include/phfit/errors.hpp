#ifndef PHFIT_ERRORS_HPP
#define PHFIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace phfit {

// Subgenerator factorization hit a pivot below the singularity threshold.
struct singular_matrix_error : std::runtime_error {
    explicit singular_matrix_error(const std::string& what) : std::runtime_error(what) {}
};

// An inverse map was asked to invert a boundary point (zero entry, zero row
// slack); the unconstrained parameterizations only cover the interior.
struct interior_violation_error : std::runtime_error {
    explicit interior_violation_error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid optimizer / sampler configuration.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solver failed to reach its tolerance.
struct convergence_error : std::runtime_error {
    explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

// Per-candidate numeric failure (overflow, series blow-up); the optimizer
// discards the offending candidate instead of aborting the run.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace phfit

#endif
