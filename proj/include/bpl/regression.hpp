#pragma once
#include <cstdint>

#include "bpl/core.hpp"
#include "bpl/dense.hpp"
#include "bpl/prox.hpp"

namespace bpl {

// min_beta 1/(2n) ||X beta - y||^2 + sum_j r_{lambda,gamma}(beta_j)
// with X standardized (centered columns, second moment 1) and y centered.
struct RegressionInstance {
    Matrix X;
    Vector y;
    PenaltySpec spec;
    Vector col_mean;   // of the raw design
    Vector col_scale;  // raw column -> standardized column divisor
    double y_mean = 0.0;

    double objective(const Vector& beta) const;
    // coefficients on the raw scale plus the implied intercept
    Vector destandardize(const Vector& beta, double& intercept) const;
};

// Centers y and the columns of X_raw and rescales each column to unit second
// moment. Throws DegenerateColumn when a column has no variance.
RegressionInstance standardize(const Matrix& X_raw, const Vector& y_raw, const PenaltySpec& spec);

enum class CoordOrder { cyclic, shuffled };

struct RegressionResult {
    Vector beta;
    Trace trace;
    int cycles = 0;
};

// Coordinate descent: each coordinate solves its scalar prox subproblem
// exactly, so the objective is nonincreasing without any extra safeguard.
RegressionResult solve_penalized_regression(const RegressionInstance& instance, CoordOrder order,
                                            int max_cycles, std::uint64_t seed = 0,
                                            double tol_obj = 1e-12);

// Largest objective improvement achievable by re-optimizing one coordinate;
// ~0 certifies a coordinate-wise minimizer.
double coordinate_certificate(const RegressionInstance& instance, const Vector& beta);

}  // namespace bpl
