#pragma once
#include "bpl/dense.hpp"

namespace bpl {

enum class PenaltyKind { l1, mcp, scad, indicator_nonneg };

// Sparsity penalty r_{lambda,gamma}. MCP needs gamma > 1, SCAD gamma > 2.
struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::l1;
    double lambda = 1.0;
    double gamma = 3.0;  // ignored for l1 / indicator

    static PenaltySpec l1(double lambda) { return {PenaltyKind::l1, lambda, 0.0}; }
    static PenaltySpec mcp(double lambda, double gamma) { return {PenaltyKind::mcp, lambda, gamma}; }
    static PenaltySpec scad(double lambda, double gamma) { return {PenaltyKind::scad, lambda, gamma}; }
    static PenaltySpec nonneg() { return {PenaltyKind::indicator_nonneg, 0.0, 0.0}; }

    void validate() const;
};

// r_{lambda,gamma}(theta); +inf for indicator_nonneg at theta < 0.
double penalty_value(const PenaltySpec& spec, double theta);

// Unique minimizer of  (weight/2)*(beta - z)^2 + penalty(beta).
// Requires weight > 0 and, for the nonconvex penalties, weight*gamma > 1
// (mcp) or weight*(gamma-1) > 1 (scad) so the scalar subproblem is strongly
// convex; otherwise throws StrongConvexityViolated.
double penalty_prox(const PenaltySpec& spec, double z, double weight);

// Elementwise max(0, v).
Vector project_nonneg(const Vector& v);

// Maximizer of c'x over {x >= 0, ||x|| = 1}. Ties broken at the smallest
// index. Throws ZeroVector for c = 0.
Vector sphere_nonneg_argmax(const Vector& c);

double soft_threshold(double z, double t);
Vector soft_threshold(const Vector& z, double t);

}  // namespace bpl
