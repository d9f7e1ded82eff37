#include "bpl/lasso.hpp"

#include <cmath>

#include "bpl/errors.hpp"
#include "bpl/prox.hpp"
#include "bpl/spectral.hpp"

namespace bpl {

LassoInstance LassoInstance::make(Matrix A, Vector b, double lambda) {
    if (A.rows() != b.size()) throw std::invalid_argument("lasso: A rows must match b length");
    if (lambda <= 0.0) throw std::invalid_argument("lasso: lambda must be > 0");
    if (!A.allFinite() || !b.allFinite())
        throw std::invalid_argument("lasso: non-finite entries in the data");
    LassoInstance inst{std::move(A), std::move(b), lambda, 0.0};
    inst.L_f = gram_spectral_norm(inst.A);
    return inst;
}

double LassoInstance::objective(const Vector& x) const {
    return 0.5 * (A * x - b).squaredNorm() + lambda * x.lpNorm<1>();
}

FistaWeights fista_weight_sequence(int k_max) {
    if (k_max < 1) throw std::invalid_argument("fista_weight_sequence: k_max must be >= 1");
    FistaWeights w;
    w.t.resize(k_max);
    w.omega.resize(k_max);
    w.t[0] = 1.0;
    w.omega[0] = 0.0;
    for (int k = 1; k < k_max; ++k) {
        w.t[k] = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * w.t[k - 1] * w.t[k - 1]));
        w.omega[k] = (w.t[k - 1] - 1.0) / w.t[k];
    }
    return w;
}

namespace {

BlockProblem lasso_problem(const LassoInstance& inst) {
    BlockProblem p;
    p.num_blocks = 1;
    p.block_dims = {static_cast<int>(inst.A.cols())};
    p.eval_f = [&inst](const Point& x) { return 0.5 * (inst.A * x[0] - inst.b).squaredNorm(); };
    p.eval_r = [&inst](int, const Vector& v) { return inst.lambda * v.lpNorm<1>(); };
    p.grad_block = [&inst](int, const Point& x) -> Vector {
        return inst.A.transpose() * (inst.A * x[0] - inst.b);
    };
    p.prox_block = [&inst](int, const Vector& v, double a) {
        return soft_threshold(v, a * inst.lambda);
    };
    p.lipschitz_block = [&inst](int, const Point&) { return inst.L_f; };
    return p;
}

}  // namespace

LassoResult solve_lasso(const LassoInstance& instance, LassoVariant variant, int max_iter) {
    if (max_iter < 1) throw std::invalid_argument("solve_lasso: max_iter must be >= 1");
    BlockProblem problem = lasso_problem(instance);
    const double L = instance.L_f;
    const double alpha = 1.0 / L;

    ExtrapRule omega_rule;  // backtracked variant: default shrink 0.5, 10 trials, then 0

    Point x{Vector::Zero(instance.A.cols())};
    Vector x_prev = x[0];
    double F_prev = problem.eval_F(x);

    LassoResult result;
    result.trace.initial_objective = F_prev;

    double t_cur = 1.0;
    double omega_cur = 0.0;
    std::vector<int> counts{0};

    for (int k = 1; k <= max_iter; ++k) {
        double omega = omega_cur;
        Vector x_hat = extrapolate(x[0], x_prev, omega);
        Vector u = block_update(problem, x, 0, x_hat, alpha);
        Point trial{u};
        double F_new = problem.eval_F(trial);
        bool restarted = false;

        switch (variant) {
            case LassoVariant::fista:
                break;
            case LassoVariant::restart:
                if (F_new > F_prev) {
                    // restart from x^k: momentum cleared, plain prox step
                    omega = 0.0;
                    x_hat = x[0];
                    u = block_update(problem, x, 0, x_hat, alpha);
                    trial[0] = u;
                    F_new = problem.eval_F(trial);
                    restarted = true;
                }
                break;
            case LassoVariant::backtracked_omega: {
                OmegaResult om = backtrack_omega(problem, x, 0, x_prev, alpha, omega, omega_rule, F_prev);
                omega = om.omega;
                u = std::move(om.x_new);
                F_new = om.objective;
                x_hat = extrapolate(x[0], x_prev, omega);
                break;
            }
        }
        if (!std::isfinite(F_new)) throw NonFiniteObjective(k, "lasso objective");

        counts[0] = k;
        result.trace.record(0, F_new, (u - x[0]).norm(), alpha, omega, L,
                            (x_hat - u).norm() / alpha, counts);

        x_prev = x[0];
        x[0] = std::move(u);
        F_prev = F_new;

        if (restarted) {
            t_cur = 1.0;
            omega_cur = 0.0;
            x_prev = x[0];  // momentum stays cleared for the next step
        } else {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_cur * t_cur));
            omega_cur = (t_cur - 1.0) / t_next;
            t_cur = t_next;
        }
    }
    result.x = std::move(x[0]);
    return result;
}

}  // namespace bpl
