#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bpl/dense.hpp"
#include "bpl/rng.hpp"

namespace bpl {

// One point of the product space, one vector per block.
using Point = std::vector<Vector>;

// Composite objective F = f + sum_i r_i split into blocks, described by its
// oracles. Empty eval_r / prox_block mean r_i == 0; empty lipschitz_block
// means the constant is unknown and stepsizes must be backtracked.
struct BlockProblem {
    int num_blocks = 1;
    std::vector<int> block_dims;
    std::function<double(const Point&)> eval_f;
    std::function<double(int, const Vector&)> eval_r;
    std::function<Vector(int, const Point&)> grad_block;
    // minimizer of r_i(u) + (1/(2*step)) * ||u - point||^2
    std::function<Vector(int, const Vector&, double)> prox_block;
    // gradient Lipschitz constant of block i at the other blocks' current values
    std::function<double(int, const Point&)> lipschitz_block;

    double eval_F(const Point& x) const;
    void validate(const Point& x0) const;
};

enum class ScheduleKind { cyclic, shuffled_per_cycle, explicit_order };

struct Schedule {
    ScheduleKind kind = ScheduleKind::cyclic;
    int num_blocks = 0;  // 0: taken from the problem at solve time
    std::vector<int> order;  // explicit_order only; its length is the period T
    std::uint64_t seed = 0;

    int period() const;
    // every window of `period` consecutive emitted indices must contain all blocks
    void validate() const;
};

// Emits b_k for k = 1, 2, ...; shuffled_per_cycle draws an independent
// Fisher-Yates permutation at each cycle start from the seeded generator.
class ScheduleState {
public:
    explicit ScheduleState(Schedule sched);
    ScheduleState(Schedule sched, std::uint64_t seed_override);
    int next_block(long k);

private:
    Schedule sched_;
    Rng rng_;
    std::vector<int> perm_;
};

enum class StepMode { lipschitz, backtracking };

struct StepRule {
    StepMode mode = StepMode::lipschitz;
    double gamma = 2.0;      // alpha_k = 1 / (gamma * L_k), gamma > 1
    double bt_shrink = 0.5;  // in (0,1)
    int bt_max = 30;
    double alpha_init = 1.0;  // backtracking start when L is unknown

    void validate() const;
};

enum class ExtrapMode { none, capped, fista_capped, custom };

struct ExtrapRule {
    ExtrapMode mode = ExtrapMode::fista_capped;
    double delta = 0.9999;   // < 1
    double cap_scale = 0.0;  // 0 resolves to delta (multiconvex) or delta*(gamma-1)/(2*(gamma+1))
    bool multiconvex = false;
    bool monotone = false;  // enforce F(x^k) <= F(x^{k-1}) by omega backtracking
    double omega_bt_shrink = 0.5;
    int omega_bt_max = 10;
    std::function<double(long k, int j)> custom_omega;  // mode == custom

    void validate() const;
};

struct SolverConfig {
    Schedule schedule;
    StepRule step;
    ExtrapRule extrap;
    std::uint64_t seed = 0;
    int max_cycles = 1000;
    double tol_obj = 1e-10;       // relative objective change over one cycle
    double tol_residual = 1e-8;   // prox-gradient residual

    void validate() const;
};

// Flat key=value file; keys mirror the field names (schedule.kind, step.gamma,
// extrap.delta, extrap.monotone, seed, max_cycles, tol_obj, tol_residual, ...).
SolverConfig load_config(const std::string& path);
void save_config(const std::string& path, const SolverConfig& config);

// Per-iteration record of a solve. The residual column is the prox-gradient
// residual of the updated block at its extrapolated point, ||x_hat - x_new|| / alpha.
struct Trace {
    double initial_objective = 0.0;
    std::vector<double> objective;
    std::vector<int> block_index;  // 0-based
    std::vector<double> step_norm;
    std::vector<std::vector<int>> update_counts;  // running d_i^k, one row per iteration
    std::vector<double> alpha_used;
    std::vector<double> omega_used;
    std::vector<double> lipschitz_used;
    std::vector<double> residual;
    std::vector<double> cycle_rel_error;  // factorization solvers: relative error per cycle

    std::size_t iterations() const { return objective.size(); }
    void record(int block, double obj, double step, double alpha, double omega, double lips,
                double resid, const std::vector<int>& counts);
    // CSV with header iter,block,objective,step_norm,alpha,omega,residual
    void write_csv(const std::string& path) const;
};

enum class StopReason { max_cycles, objective_tol, residual_tol };

struct SolveResult {
    Point x;
    Trace trace;
    StopReason reason = StopReason::max_cycles;
    long iterations = 0;
    int cycles = 0;
};

// --- engine operations ---

// x_hat = x_prev_update + omega * (x_prev_update - x_prev_prev)
Vector extrapolate(const Vector& x_prev_update, const Vector& x_prev_prev, double omega);

// cap_scale resolved against the stepsize gamma when the rule leaves it 0
double resolve_cap_scale(const ExtrapRule& rule, double step_gamma);

// min(1, cap_scale * sqrt(L_prev / L_curr)); rule.cap_scale must be resolved
double omega_cap(const ExtrapRule& rule, double L_prev, double L_curr);

// one prox-linear step on block i from extrapolated point x_hat_i
Vector block_update(const BlockProblem& problem, const Point& x, int i, const Vector& x_hat_i,
                    double alpha);

struct AlphaResult {
    double alpha = 0.0;
    Vector x_new;
};

// Largest alpha in {alpha0 * bt_shrink^t} whose trial update satisfies
// f(x_trial) <= f(x_old) + <grad_i f(x_old), dx> + ||dx||^2 / (2*gamma*alpha).
// Throws BacktrackExhausted when the grid runs out.
AlphaResult backtrack_alpha(const BlockProblem& problem, const Point& x_old, int i,
                            const Vector& x_hat_i, double alpha0, const StepRule& rule);

struct OmegaResult {
    double omega = 0.0;
    Vector x_new;
    double objective = 0.0;
};

// Largest omega in {omega0 * omega_bt_shrink^t} U {0} whose update keeps
// F nonincreasing; omega = 0 always terminates the search.
OmegaResult backtrack_omega(const BlockProblem& problem, const Point& x_old, int i,
                            const Vector& x_prev_prev_i, double alpha, double omega0,
                            const ExtrapRule& rule, double objective_old);

// sqrt( sum_i ||x_i - prox_{steps_i r_i}(x_i - steps_i grad_i f(x))||^2 / steps_i^2 );
// zero exactly at fixed points of all block prox-gradient maps.
double prox_residual(const BlockProblem& problem, const Point& x, const std::vector<double>& steps);

SolveResult solve(const BlockProblem& problem, const Point& x0, const SolverConfig& config);

}  // namespace bpl
