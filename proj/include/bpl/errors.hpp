#pragma once
#include <stdexcept>
#include <string>

namespace bpl {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Objective, gradient, or prox output became NaN/inf; carries the iteration.
struct NonFiniteObjective : SolverError {
    long iteration;
    explicit NonFiniteObjective(long iter, const std::string& what)
        : SolverError("non-finite value at iteration " + std::to_string(iter) + ": " + what),
          iteration(iter) {}
};

// No stepsize in the backtracking grid satisfied the descent criterion.
struct BacktrackExhausted : SolverError {
    using SolverError::SolverError;
};

// penalty_prox called with a weight that breaks strong convexity of the
// scalar subproblem (mcp: w*gamma <= 1, scad: w*(gamma-1) <= 1).
struct StrongConvexityViolated : SolverError {
    using SolverError::SolverError;
};

// sphere_nonneg_argmax(0): every feasible point is optimal, refuse to guess.
struct ZeroVector : SolverError {
    using SolverError::SolverError;
};

// Standardization hit a zero-variance column.
struct DegenerateColumn : SolverError {
    using SolverError::SolverError;
};

// Original rank-one residue update hit a zero column (outside its validity region).
struct ZeroColumn : SolverError {
    using SolverError::SolverError;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace bpl
