#pragma once
#include <functional>

#include "bpl/dense.hpp"

namespace bpl {

struct PowerIterOptions {
    int max_iters = 100;
    double rel_tol = 1e-10;
    double inflate = 1.01;  // multiplies the Ritz value so the result upper-bounds the norm
    std::uint64_t seed = 0x5eedULL;
};

// Largest eigenvalue estimate of a symmetric PSD operator v -> apply(v),
// by power iteration from a seeded random start.
double power_iteration(const std::function<Vector(const Vector&)>& apply, Eigen::Index dim,
                       const PowerIterOptions& opts = {});

// ||A^T A||_2 without forming the Gram matrix.
double gram_spectral_norm(const Matrix& A, const PowerIterOptions& opts = {});

// ||S||_2 for a small symmetric PSD matrix.
double sym_spectral_norm(const Matrix& S, const PowerIterOptions& opts = {});

}  // namespace bpl
