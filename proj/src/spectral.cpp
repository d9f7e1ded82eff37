#include "bpl/spectral.hpp"

#include <cmath>
#include <stdexcept>

#include "bpl/rng.hpp"

namespace bpl {

double power_iteration(const std::function<Vector(const Vector&)>& apply, Eigen::Index dim,
                       const PowerIterOptions& opts) {
    if (dim <= 0) throw std::invalid_argument("power_iteration: empty operator");
    Rng rng(opts.seed);
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.next_normal();
    double vnorm = v.norm();
    if (vnorm == 0.0) v.setOnes(), vnorm = std::sqrt(static_cast<double>(dim));
    v /= vnorm;

    double ritz = 0.0;
    for (int it = 0; it < opts.max_iters; ++it) {
        Vector w = apply(v);
        const double wnorm = w.norm();
        if (wnorm == 0.0) return 0.0;  // v in the null space: operator norm 0 along this start
        const double next = v.dot(w);
        v = w / wnorm;
        if (it > 0 && std::abs(next - ritz) <= opts.rel_tol * std::abs(next)) {
            ritz = next;
            break;
        }
        ritz = next;
    }
    return std::max(ritz, 0.0) * opts.inflate;
}

double gram_spectral_norm(const Matrix& A, const PowerIterOptions& opts) {
    return power_iteration(
        [&A](const Vector& v) -> Vector { return A.transpose() * (A * v); }, A.cols(), opts);
}

double sym_spectral_norm(const Matrix& S, const PowerIterOptions& opts) {
    if (S.rows() != S.cols()) throw std::invalid_argument("sym_spectral_norm: matrix not square");
    return power_iteration([&S](const Vector& v) -> Vector { return S * v; }, S.rows(), opts);
}

}  // namespace bpl
