#include "bpl/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bpl/errors.hpp"

namespace bpl {

void PenaltySpec::validate() const {
    if (lambda < 0.0) throw std::invalid_argument("penalty: lambda must be >= 0");
    if (kind == PenaltyKind::mcp && gamma <= 1.0)
        throw std::invalid_argument("mcp: gamma must be > 1");
    if (kind == PenaltyKind::scad && gamma <= 2.0)
        throw std::invalid_argument("scad: gamma must be > 2");
}

double penalty_value(const PenaltySpec& spec, double theta) {
    const double a = std::abs(theta);
    const double lam = spec.lambda;
    const double gam = spec.gamma;
    switch (spec.kind) {
        case PenaltyKind::l1:
            return lam * a;
        case PenaltyKind::indicator_nonneg:
            return theta >= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        case PenaltyKind::mcp:
            if (a <= gam * lam) return lam * a - a * a / (2.0 * gam);
            return 0.5 * gam * lam * lam;
        case PenaltyKind::scad:
            if (a <= lam) return lam * a;
            if (a <= gam * lam) return (2.0 * gam * lam * a - (a * a + lam * lam)) / (2.0 * (gam - 1.0));
            return lam * lam * (gam * gam - 1.0) / (2.0 * (gam - 1.0));
    }
    return 0.0;
}

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

Vector soft_threshold(const Vector& z, double t) {
    Vector out(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = soft_threshold(z[i], t);
    return out;
}

namespace {

// The scalar objective (weight/2)(beta - a)^2 + pen(beta) restricted to each
// penalty region is strongly convex under the preconditions, so the global
// minimizer over beta >= 0 is the best of the clamped per-region stationary
// points. Candidates are evaluated on the true objective; this avoids a
// hand-derived multi-branch threshold rule whose boundaries are easy to get
// wrong (the 1D oracle tests then confirm the result).
double best_candidate(const PenaltySpec& spec, double a, double weight,
                      const double* candidates, int count) {
    double best = 0.0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < count; ++i) {
        const double b = candidates[i];
        const double val = 0.5 * weight * (b - a) * (b - a) + penalty_value(spec, b);
        if (val < best_val) {
            best_val = val;
            best = b;
        }
    }
    return best;
}

}  // namespace

double penalty_prox(const PenaltySpec& spec, double z, double weight) {
    if (weight <= 0.0) throw std::invalid_argument("penalty_prox: weight must be > 0");
    const double lam = spec.lambda;
    const double gam = spec.gamma;

    switch (spec.kind) {
        case PenaltyKind::l1:
            return soft_threshold(z, lam / weight);
        case PenaltyKind::indicator_nonneg:
            return std::max(0.0, z);
        case PenaltyKind::mcp: {
            if (weight * gam <= 1.0)
                throw StrongConvexityViolated("mcp prox: weight*gamma must exceed 1");
            const double a = std::abs(z);
            const double s = z < 0.0 ? -1.0 : 1.0;
            const double c1 = std::clamp((weight * a - lam) / (weight - 1.0 / gam), 0.0, gam * lam);
            const double c2 = std::max(a, gam * lam);
            const double cands[] = {0.0, c1, c2};
            return s * best_candidate(spec, a, weight, cands, 3);
        }
        case PenaltyKind::scad: {
            if (weight * (gam - 1.0) <= 1.0)
                throw StrongConvexityViolated("scad prox: weight*(gamma-1) must exceed 1");
            const double a = std::abs(z);
            const double s = z < 0.0 ? -1.0 : 1.0;
            const double c1 = std::clamp(a - lam / weight, 0.0, lam);
            const double c2 = std::clamp((weight * a * (gam - 1.0) - gam * lam) / (weight * (gam - 1.0) - 1.0),
                                         lam, gam * lam);
            const double c3 = std::max(a, gam * lam);
            const double cands[] = {0.0, c1, c2, c3};
            return s * best_candidate(spec, a, weight, cands, 4);
        }
    }
    return 0.0;
}

Vector project_nonneg(const Vector& v) { return v.cwiseMax(0.0); }

Vector sphere_nonneg_argmax(const Vector& c) {
    const Eigen::Index n = c.size();
    if (n == 0) throw std::invalid_argument("sphere_nonneg_argmax: empty vector");
    if ((c.array() == 0.0).all()) throw ZeroVector("sphere_nonneg_argmax: c = 0 has no distinguished maximizer");

    Vector x = Vector::Zero(n);
    if ((c.array() > 0.0).any()) {
        // positive part, normalized; zeros elsewhere
        Vector pos = c.cwiseMax(0.0);
        x = pos / pos.norm();
        return x;
    }
    // c <= 0: a unit coordinate vector; prefer a zero entry, else the largest
    // (least negative) entry, smallest index first in both cases
    Eigen::Index pick = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (c[i] == 0.0) {
            x[i] = 1.0;
            return x;
        }
        if (c[i] > c[pick]) pick = i;
    }
    x[pick] = 1.0;
    return x;
}

}  // namespace bpl
