#ifndef PHFIT_REPARAM_HPP
#define PHFIT_REPARAM_HPP

#include <string>
#include <variant>
#include <vector>

#include "phfit/ph.hpp"

namespace phfit {

enum class Structure { General, Coxian, HyperErlang };

std::string to_string(Structure s);
Structure structure_from_string(const std::string& s);

// Unconstrained parameters of the full PH(n) family:
// alpha = softmax(a), T = diag(gamma^2) [rowsoftmax(Z) - (I + rowsoftmax(Z) o I)].
struct GeneralParams {
    Vector a;
    Vector gamma;
    Matrix Z;

    int n() const { return static_cast<int>(a.size()); }
};

// Unconstrained Coxian parameters: rates lambda = gamma^2, continue
// probabilities p = sigmoid(u); alpha is fixed at e_1.
struct CoxianParams {
    Vector gamma;  // length n
    Vector u;      // length n-1

    int n() const { return static_cast<int>(gamma.size()); }
};

// Unconstrained Hyper-Erlang parameters for fixed block sizes d_1..d_k:
// branch weights omega = softmax(beta), branch rates lambda = delta^2.
struct HyperErlangParams {
    Vector beta;
    Vector delta;
    std::vector<int> blocks;

    int k() const { return static_cast<int>(beta.size()); }
    int n() const;
};

using FitParams = std::variant<GeneralParams, CoxianParams, HyperErlangParams>;

// Numerically stable primitives (max-subtracted softmax, branch-stable
// sigmoid). The optimizer routinely drives arguments to large magnitudes.
Vector softmax(const Vector& v);
Matrix row_softmax(const Matrix& Z);
double sigmoid(double z);
double logit(double p);

// Forward maps (Markovian image always passes validate).
MarkovianPH to_markovian(const GeneralParams& p);
MarkovianPH to_markovian(const CoxianParams& p);
MarkovianPH to_markovian(const HyperErlangParams& p);
MarkovianPH to_markovian(const FitParams& p);

Structure structure_of(const FitParams& p);

// Right-inverses on the interior of each family. Boundary points (zero
// entries / zero row slack) raise interior_violation_error.
GeneralParams from_markovian_general(const MarkovianPH& ph);
CoxianParams from_markovian_coxian(const Vector& lambda, const Vector& p);
HyperErlangParams from_markovian_hypererlang(const Vector& omega, const Vector& lambda,
                                             const std::vector<int>& blocks);

// Perturbs boundary zeros to eps-scale interior values for callers that need
// an invertible approximation of a boundary PH.
MarkovianPH interior_jitter(const MarkovianPH& ph, double eps = 1e-12);

// Block-head positions 0, d_1, d_1+d_2, ... of a Hyper-Erlang layout.
std::vector<int> block_heads(const std::vector<int>& blocks);

}  // namespace phfit

#endif
