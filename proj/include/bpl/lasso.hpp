#pragma once
#include "bpl/core.hpp"
#include "bpl/dense.hpp"

namespace bpl {

// min_x 1/2 ||Ax - b||^2 + lambda ||x||_1
struct LassoInstance {
    Matrix A;
    Vector b;
    double lambda = 1.0;
    double L_f = 0.0;  // upper bound on ||A^T A||_2 (power iteration, inflated)

    static LassoInstance make(Matrix A, Vector b, double lambda);
    double objective(const Vector& x) const;
};

struct FistaWeights {
    std::vector<double> t;      // t_1 = 1, t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2
    std::vector<double> omega;  // omega_1 = 0, omega_{k+1} = (t_k - 1) / t_{k+1}
};

FistaWeights fista_weight_sequence(int k_max);

enum class LassoVariant { fista, restart, backtracked_omega };

struct LassoResult {
    Vector x;
    Trace trace;
};

// Single-block BPL with alpha = 1/L_f from x0 = 0. `restart` re-takes the
// step from x^k with the momentum cleared whenever the objective would
// increase; `backtracked_omega` shrinks the FISTA weight until the objective
// is nonincreasing.
LassoResult solve_lasso(const LassoInstance& instance, LassoVariant variant, int max_iter);

}  // namespace bpl
