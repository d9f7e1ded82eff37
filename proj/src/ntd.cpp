#include "bpl/ntd.hpp"

#include <cmath>

#include "bpl/errors.hpp"
#include "bpl/rng.hpp"
#include "bpl/spectral.hpp"

namespace bpl {

namespace {

constexpr double kNtdCapDelta = 0.9999;  // weight cap multiplier for the multi-convex blocks

Eigen::Map<const Vector> as_vec(const Matrix& A) { return {A.data(), A.size()}; }

void check_instance(const DenseTensor& M, const DenseTensor& C, const std::vector<Matrix>& A) {
    const int N = M.order();
    if (C.order() != N || static_cast<int>(A.size()) != N)
        throw std::invalid_argument("ntd: core order / factor count mismatch");
    for (int i = 0; i < N; ++i) {
        if (A[i].rows() != M.dims()[i] || A[i].cols() != C.dims()[i])
            throw std::invalid_argument("ntd: factor " + std::to_string(i) + " shape mismatch");
        if (C.dims()[i] > M.dims()[i])
            throw std::invalid_argument("ntd: core dimension exceeds tensor dimension");
    }
}

// fast objective pieces: with T_j = A_j^T A_j, H(C) = C x_1 T_1 ... x_N T_N and
// Q = M x_1 A_1^T ... x_N A_N^T,
//   f = 1/2 <H(C), C> - <C, Q> + 1/2 ||M||^2.
DenseTensor apply_gram_chain(const DenseTensor& C, const std::vector<Matrix>& T) {
    DenseTensor H = C;
    for (std::size_t j = 0; j < T.size(); ++j) H = mode_product(H, T[j], static_cast<int>(j));
    return H;
}

DenseTensor project_tensor_back(const DenseTensor& M, const std::vector<Matrix>& A) {
    DenseTensor Q = M;
    for (std::size_t j = 0; j < A.size(); ++j)
        Q = mode_product(Q, Matrix(A[j].transpose()), static_cast<int>(j));
    return Q;
}

struct CoreQuadratic {
    DenseTensor Q;       // M projected through the factors
    double L = 0.0;      // product of factor Gram spectral norms, floored
    double f(const DenseTensor& C, const std::vector<Matrix>& T, double M_sq_half) const {
        DenseTensor H = apply_gram_chain(C, T);
        return 0.5 * H.dot(C) - C.dot(Q) + M_sq_half;
    }
};

struct FactorQuadratic {
    Matrix S;  // B_(i) B_(i)^T, r_i x r_i
    Matrix P;  // M_(i) B_(i)^T, d_i x r_i
    double L = 0.0;
    double f(const Matrix& Ai, double M_sq_half) const {
        return 0.5 * (Ai * S).cwiseProduct(Ai).sum() - Ai.cwiseProduct(P).sum() + M_sq_half;
    }
    Matrix grad(const Matrix& Ai) const { return Ai * S - P; }
};

FactorQuadratic factor_quadratic(const DenseTensor& M, const DenseTensor& C,
                                 const std::vector<Matrix>& A, int i, double L_min) {
    DenseTensor B = C;
    for (std::size_t j = 0; j < A.size(); ++j)
        if (static_cast<int>(j) != i) B = mode_product(B, A[j], static_cast<int>(j));
    FactorQuadratic q;
    q.S = contract_all_but(B, B, i);
    q.P = contract_all_but(M, B, i);
    q.L = std::max(L_min, sym_spectral_norm(q.S));
    return q;
}

double core_lipschitz(const std::vector<Matrix>& T, double L_min) {
    double L = 1.0;
    for (const auto& Tj : T) L *= sym_spectral_norm(Tj);
    return std::max(L_min, L);
}

double capped_weight(double omega_k, double L_prev, double L_curr) {
    const double cap = kNtdCapDelta * std::sqrt(L_prev / L_curr);
    return std::min(omega_k, std::min(cap, 1.0));
}

}  // namespace

DenseTensor ntd_assemble(const DenseTensor& C, const std::vector<Matrix>& A) {
    DenseTensor G = C;
    for (std::size_t j = 0; j < A.size(); ++j) G = mode_product(G, A[j], static_cast<int>(j));
    return G;
}

double ntd_objective(const DenseTensor& M, const DenseTensor& C, const std::vector<Matrix>& A) {
    check_instance(M, C, A);
    DenseTensor G = ntd_assemble(C, A);
    return 0.5 * (G.vec() - M.vec()).squaredNorm();
}

DenseTensor ntd_core_grad(const DenseTensor& M, const DenseTensor& C, const std::vector<Matrix>& A) {
    check_instance(M, C, A);
    std::vector<Matrix> T(A.size());
    for (std::size_t j = 0; j < A.size(); ++j) T[j] = A[j].transpose() * A[j];
    DenseTensor H = apply_gram_chain(C, T);
    DenseTensor Q = project_tensor_back(M, A);
    DenseTensor g = H;
    g.vec() -= Q.vec();
    return g;
}

Matrix ntd_factor_grad(const DenseTensor& M, const DenseTensor& C, const std::vector<Matrix>& A,
                       int i) {
    check_instance(M, C, A);
    FactorQuadratic q = factor_quadratic(M, C, A, i, 1e-300);
    return q.grad(A[i]);
}

NtdResult solve_ntd(const DenseTensor& M, const std::vector<int>& core_dims, NtdVariant variant,
                    int max_cycles, std::uint64_t seed, const NtdOptions& opts) {
    if (static_cast<int>(core_dims.size()) != M.order())
        throw std::invalid_argument("ntd: core_dims order mismatch");
    Rng rng(seed);
    DenseTensor C0(core_dims);
    for (std::int64_t t = 0; t < C0.size(); ++t) C0.data()[t] = std::abs(rng.next_normal());
    std::vector<Matrix> A0(M.order());
    for (int i = 0; i < M.order(); ++i) {
        A0[i].resize(M.dims()[i], core_dims[i]);
        for (Eigen::Index t = 0; t < A0[i].size(); ++t) A0[i].data()[t] = std::abs(rng.next_normal());
    }
    std::uint64_t shuffle_seed = seed + 0x9E3779B97F4A7C15ULL;
    shuffle_seed = splitmix64_next(shuffle_seed);
    return solve_ntd_from(M, std::move(C0), std::move(A0), variant, max_cycles, shuffle_seed, opts);
}

NtdResult solve_ntd_from(const DenseTensor& M, DenseTensor C0, std::vector<Matrix> A0,
                         NtdVariant variant, int max_cycles, std::uint64_t seed,
                         const NtdOptions& opts) {
    check_instance(M, C0, A0);
    if (!M.vec().allFinite()) throw std::invalid_argument("ntd: M has non-finite entries");
    if ((M.vec().array() < 0.0).any()) throw std::invalid_argument("ntd: M must be nonnegative");
    if (opts.L_min <= 0.0) throw std::invalid_argument("ntd: L_min must be > 0");
    const int N = M.order();
    const double M_sq_half = 0.5 * M.vec().squaredNorm();
    const double M_norm = M.norm();

    NtdResult result;
    result.core = std::move(C0);
    result.factors = std::move(A0);
    DenseTensor& C = result.core;
    std::vector<Matrix>& A = result.factors;
    for (auto& Ai : A) Ai = Ai.cwiseMax(0.0);
    C.vec() = C.vec().cwiseMax(0.0);

    std::vector<Matrix> T(N);
    for (int j = 0; j < N; ++j) T[j] = A[j].transpose() * A[j];

    DenseTensor C_prev = C;
    std::vector<Matrix> A_prev = A;
    double L_core_prev = 0.0;
    std::vector<double> L_factor_prev(N, 0.0);

    const bool extrapolated = variant != NtdVariant::bpg_noextrap;
    const bool frequent_core = variant == NtdVariant::frequent_core_cyclic ||
                               variant == NtdVariant::frequent_core_shuffled;

    Rng shuffle_rng(seed);
    std::vector<int> order(N);
    for (int j = 0; j < N; ++j) order[j] = j;
    std::vector<int> counts(N + 1, 0);

    CoreQuadratic core;
    core.Q = project_tensor_back(M, A);
    core.L = core_lipschitz(T, opts.L_min);
    double f_prev = core.f(C, T, M_sq_half);
    result.trace.initial_objective = f_prev;

    double t_fista = 1.0;
    double omega_k = 0.0;

    auto slack = [](double ref) { return 1e-13 * (1.0 + std::abs(ref)); };

    // one prox-gradient step on the core from the current extrapolation weight,
    // shrinking omega if monotone mode demands it
    auto core_step = [&]() {
        core.Q = project_tensor_back(M, A);
        core.L = core_lipschitz(T, opts.L_min);
        const double L_prev = L_core_prev > 0.0 ? L_core_prev : core.L;
        double omega = extrapolated ? capped_weight(omega_k, L_prev, core.L) : 0.0;
        DenseTensor C_new = C;
        double f_new = 0.0;
        for (int trial = 0;; ++trial) {
            DenseTensor C_hat = C;
            C_hat.vec() += omega * (C.vec() - C_prev.vec());
            DenseTensor g = apply_gram_chain(C_hat, T);
            g.vec() -= core.Q.vec();
            C_new.vec() = (C_hat.vec() - g.vec() / core.L).cwiseMax(0.0);
            f_new = core.f(C_new, T, M_sq_half);
            if (!opts.monotone || f_new <= f_prev + slack(f_prev) || omega == 0.0) break;
            omega = trial < 10 ? omega * 0.5 : 0.0;
        }
        const double step = (C_new.vec() - C.vec()).norm();
        C_prev = C;
        C = std::move(C_new);
        L_core_prev = core.L;
        counts[0] += 1;
        result.trace.record(0, f_new, step, 1.0 / core.L, extrapolated ? omega : 0.0, core.L,
                            step * core.L, counts);
        f_prev = f_new;
    };

    auto factor_step = [&](int i) {
        FactorQuadratic q = factor_quadratic(M, C, A, i, opts.L_min);
        const double L_prev = L_factor_prev[i] > 0.0 ? L_factor_prev[i] : q.L;
        double omega = extrapolated ? capped_weight(omega_k, L_prev, q.L) : 0.0;
        Matrix A_new;
        double f_new = 0.0;
        for (int trial = 0;; ++trial) {
            Matrix A_hat = A[i] + omega * (A[i] - A_prev[i]);
            A_new = (A_hat - q.grad(A_hat) / q.L).cwiseMax(0.0);
            f_new = q.f(A_new, M_sq_half);
            if (!opts.monotone || f_new <= f_prev + slack(f_prev) || omega == 0.0) break;
            omega = trial < 10 ? omega * 0.5 : 0.0;
        }
        const double step = (as_vec(A_new) - as_vec(A[i])).norm();
        A_prev[i] = A[i];
        A[i] = std::move(A_new);
        T[i] = A[i].transpose() * A[i];
        L_factor_prev[i] = q.L;
        counts[i + 1] += 1;
        result.trace.record(i + 1, f_new, step, 1.0 / q.L, omega, q.L, step * q.L, counts);
        f_prev = f_new;
    };

    for (int cycle = 1; cycle <= max_cycles; ++cycle) {
        if (cycle > 1) {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_fista * t_fista));
            omega_k = (t_fista - 1.0) / t_next;
            t_fista = t_next;
        }
        if (variant == NtdVariant::frequent_core_shuffled) shuffle_rng.shuffle(order);

        if (frequent_core) {
            for (int i : order) {
                core_step();
                factor_step(i);
            }
        } else {
            core_step();
            for (int i : order) factor_step(i);
        }

        const double rel = std::sqrt(2.0 * std::max(f_prev, 0.0)) / M_norm;
        result.rel_error.push_back(rel);
        result.trace.cycle_rel_error.push_back(rel);
        result.cycles = cycle;
        if (result.cycles_to_success < 0 && rel <= opts.success_tol)
            result.cycles_to_success = cycle;
        if (opts.stop_rel_error > 0.0 && rel <= opts.stop_rel_error) break;
    }
    result.success = !result.rel_error.empty() && result.rel_error.back() < opts.success_tol;
    return result;
}

}  // namespace bpl
