#pragma once
#include <cstdint>

#include "bpl/core.hpp"
#include "bpl/dense.hpp"

namespace bpl {

// min 1/2 ||C x_1 A_1 ... x_N A_N - M||_F^2 over C >= 0 and A_i >= 0,
// by block proximal gradient steps with extrapolation.
enum class NtdVariant { bpg, bpg_noextrap, frequent_core_cyclic, frequent_core_shuffled };

struct NtdOptions {
    double L_min = 1e-3;         // floor for every blockwise Lipschitz constant
    bool monotone = false;       // enforce a nonincreasing objective by omega backtracking
    double stop_rel_error = 0.0; // > 0: stop early once the cycle error drops below
    double success_tol = 1e-3;
};

struct NtdResult {
    DenseTensor core;
    std::vector<Matrix> factors;
    Trace trace;  // one row per block update; block 0 is the core, i >= 1 factor A_i
    std::vector<double> rel_error;  // ||C x A - M||_F / ||M||_F per cycle
    bool success = false;
    int cycles = 0;
    int cycles_to_success = -1;  // first cycle at or below success_tol, -1 if never
};

DenseTensor ntd_assemble(const DenseTensor& C, const std::vector<Matrix>& A);
// direct assembly-based objective, the reference the fast solver path is tested against
double ntd_objective(const DenseTensor& M, const DenseTensor& C, const std::vector<Matrix>& A);
DenseTensor ntd_core_grad(const DenseTensor& M, const DenseTensor& C, const std::vector<Matrix>& A);
Matrix ntd_factor_grad(const DenseTensor& M, const DenseTensor& C, const std::vector<Matrix>& A,
                       int i);

NtdResult solve_ntd(const DenseTensor& M, const std::vector<int>& core_dims, NtdVariant variant,
                    int max_cycles, std::uint64_t seed, const NtdOptions& opts = {});

// Same loop from a caller-supplied start; the seed only drives the shuffles.
NtdResult solve_ntd_from(const DenseTensor& M, DenseTensor C0, std::vector<Matrix> A0,
                         NtdVariant variant, int max_cycles, std::uint64_t seed,
                         const NtdOptions& opts = {});

}  // namespace bpl
