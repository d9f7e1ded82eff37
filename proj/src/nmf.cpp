#include "bpl/nmf.hpp"

#include <cmath>

#include "bpl/errors.hpp"
#include "bpl/prox.hpp"
#include "bpl/rng.hpp"

namespace bpl {

namespace {

// The residual E = X Y^T - M is maintained across column updates; each
// update applies one rank-one correction.

// x_i = max(0, R y_i)/||y_i||^2 with R = M - sum_{j != i} x_j y_j^T = -E + x_i y_i^T
void step_original_x(Matrix& X, const Matrix& Y, Matrix& E, int i) {
    const Vector y = Y.col(i);
    const double yn2 = y.squaredNorm();
    if (yn2 == 0.0) throw ZeroColumn("rri: column " + std::to_string(i) + " of Y is zero");
    Vector Ry = X.col(i) * yn2 - E * y;
    Vector x_new = project_nonneg(Ry) / yn2;
    E.noalias() += (x_new - X.col(i)) * y.transpose();
    X.col(i) = x_new;
}

void step_original_y(const Matrix& X, Matrix& Y, Matrix& E, int i) {
    const Vector x = X.col(i);
    const double xn2 = x.squaredNorm();
    if (xn2 == 0.0) throw ZeroColumn("rri: column " + std::to_string(i) + " of X vanished");
    Vector Rtx = Y.col(i) * xn2 - E.transpose() * x;
    Vector y_new = project_nonneg(Rtx) / xn2;
    E.noalias() += x * (y_new - Y.col(i)).transpose();
    Y.col(i) = y_new;
}

// unit-sphere nonnegative prox-linear step: maximize c'x, c = L x_i - E y_i
void step_modified_x(Matrix& X, const Matrix& Y, Matrix& E, int i, double L_min) {
    const Vector y = Y.col(i);
    const double L = std::max(L_min, y.squaredNorm());
    Vector c = L * X.col(i) - E * y;
    Vector x_new = sphere_nonneg_argmax(c);
    E.noalias() += (x_new - X.col(i)) * y.transpose();
    X.col(i) = x_new;
}

// exact nonnegative least squares for y against the residual without the
// i-th pair; with ||x_i|| = 1 it collapses to max(0, y_i - E^T x_i)
void step_modified_y(const Matrix& X, Matrix& Y, Matrix& E, int i) {
    const Vector x = X.col(i);
    Vector y_new = project_nonneg(Y.col(i) - E.transpose() * x);
    E.noalias() += x * (y_new - Y.col(i)).transpose();
    Y.col(i) = y_new;
}

void check_shapes(const Matrix& M, const Matrix& X, const Matrix& Y, int i) {
    if (X.rows() != M.rows() || Y.rows() != M.cols() || X.cols() != Y.cols())
        throw std::invalid_argument("nmf: factor shapes do not match M");
    if (i < 0 || i >= X.cols()) throw std::invalid_argument("nmf: column index out of range");
}

}  // namespace

void rri_step_original(const Matrix& M, Matrix& X, Matrix& Y, int i) {
    check_shapes(M, X, Y, i);
    Matrix E = X * Y.transpose() - M;
    step_original_x(X, Y, E, i);
    step_original_y(X, Y, E, i);
}

void rri_step_modified(const Matrix& M, Matrix& X, Matrix& Y, int i, double L_min) {
    check_shapes(M, X, Y, i);
    if (L_min <= 0.0) throw std::invalid_argument("nmf: L_min must be > 0");
    Matrix E = X * Y.transpose() - M;
    step_modified_x(X, Y, E, i, L_min);
    step_modified_y(X, Y, E, i);
}

NmfResult solve_nmf(const Matrix& M, int rank, NmfVariant variant, double L_min, int max_cycles,
                    std::uint64_t seed, double success_tol) {
    Rng rng(seed);
    Matrix X0(M.rows(), rank), Y0(M.cols(), rank);
    for (Eigen::Index t = 0; t < X0.size(); ++t) X0.data()[t] = rng.next_double();
    for (Eigen::Index t = 0; t < Y0.size(); ++t) Y0.data()[t] = rng.next_double();
    std::uint64_t shuffle_seed = seed + 0x9E3779B97F4A7C15ULL;
    shuffle_seed = splitmix64_next(shuffle_seed);
    return solve_nmf_from(M, std::move(X0), std::move(Y0), variant, L_min, max_cycles, shuffle_seed,
                          success_tol);
}

NmfResult solve_nmf_from(const Matrix& M, Matrix X0, Matrix Y0, NmfVariant variant, double L_min,
                         int max_cycles, std::uint64_t seed, double success_tol) {
    if (!M.allFinite()) throw std::invalid_argument("nmf: M has non-finite entries");
    if ((M.array() < 0.0).any()) throw std::invalid_argument("nmf: M must be nonnegative");
    if (L_min <= 0.0) throw std::invalid_argument("nmf: L_min must be > 0");
    const int p = static_cast<int>(X0.cols());
    check_shapes(M, X0, Y0, 0);

    NmfResult result;
    result.X = std::move(X0);
    result.Y = std::move(Y0);
    Matrix& X = result.X;
    Matrix& Y = result.Y;

    const bool modified = variant != NmfVariant::rri;
    if (modified) {
        for (int j = 0; j < p; ++j) {
            const double norm = X.col(j).norm();
            if (norm == 0.0) throw ZeroColumn("nmf: zero starting column cannot be normalized");
            X.col(j) /= norm;
        }
    }

    Matrix E = X * Y.transpose() - M;
    const double M_norm = M.norm();
    result.trace.initial_objective = 0.5 * E.squaredNorm();

    Rng shuffle_rng(seed);
    std::vector<int> order(p);
    for (int j = 0; j < p; ++j) order[j] = j;
    std::vector<int> counts(2 * p, 0);

    for (int cycle = 1; cycle <= max_cycles; ++cycle) {
        if (variant == NmfVariant::modified_shuffled) shuffle_rng.shuffle(order);
        for (int i : order) {
            const Vector x_before = X.col(i);
            const Vector y_before = Y.col(i);
            const double Lx = modified ? std::max(L_min, y_before.squaredNorm())
                                       : y_before.squaredNorm();
            if (modified)
                step_modified_x(X, Y, E, i, L_min);
            else
                step_original_x(X, Y, E, i);
            counts[2 * i] += 1;
            const double dx = (X.col(i) - x_before).norm();
            result.trace.record(2 * i, 0.5 * E.squaredNorm(), dx, 1.0 / Lx, 0.0, Lx, dx * Lx, counts);

            const double Ly = std::max(modified ? L_min : 0.0, X.col(i).squaredNorm());
            if (modified)
                step_modified_y(X, Y, E, i);
            else
                step_original_y(X, Y, E, i);
            counts[2 * i + 1] += 1;
            const double dy = (Y.col(i) - y_before).norm();
            result.trace.record(2 * i + 1, 0.5 * E.squaredNorm(), dy, 1.0 / Ly, 0.0, Ly, dy * Ly,
                                counts);
        }
        result.rel_error.push_back(E.norm() / M_norm);
        result.trace.cycle_rel_error.push_back(result.rel_error.back());
        result.cycles = cycle;
    }
    result.success = !result.rel_error.empty() && result.rel_error.back() < success_tol;
    return result;
}

}  // namespace bpl
