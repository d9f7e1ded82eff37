#pragma once
#include <cstdint>

#include "bpl/core.hpp"
#include "bpl/dense.hpp"

namespace bpl {

// min 1/2 ||X Y^T - M||_F^2  over X >= 0 (m x p), Y >= 0 (n x p),
// solved one column pair (x_i, y_i) at a time.
enum class NmfVariant { rri, modified_cyclic, modified_shuffled };

struct NmfResult {
    Matrix X;
    Matrix Y;
    Trace trace;  // two rows per pair update (x block 2i, y block 2i+1)
    std::vector<double> rel_error;  // ||XY^T - M||_F / ||M||_F per cycle
    bool success = false;
    int cycles = 0;
};

// Exact alternating updates of (alg. RRI): x_i = max(0, R y_i)/||y_i||^2 and
// the symmetric y_i update with the refreshed x_i, R the rank-one residual.
// Requires nonzero columns; throws ZeroColumn outside that region.
void rri_step_original(const Matrix& M, Matrix& X, Matrix& Y, int i);

// Modified update: x_i maximizes c'x over {x >= 0, ||x|| = 1} with
// c = L x_i - E y_i, L = max(L_min, ||y_i||^2) and E = X Y^T - M;
// y_i = max(0, y_i - E^T x_i) afterwards.
void rri_step_modified(const Matrix& M, Matrix& X, Matrix& Y, int i, double L_min);

NmfResult solve_nmf(const Matrix& M, int rank, NmfVariant variant, double L_min, int max_cycles,
                    std::uint64_t seed, double success_tol = 1e-3);

// Same loop from a caller-supplied start (campaigns feed every variant the
// same starting point). The seed only drives the per-cycle shuffles.
NmfResult solve_nmf_from(const Matrix& M, Matrix X0, Matrix Y0, NmfVariant variant, double L_min,
                         int max_cycles, std::uint64_t seed, double success_tol = 1e-3);

}  // namespace bpl
