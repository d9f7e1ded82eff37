#include "bpl/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bpl/errors.hpp"

namespace bpl {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// acceptance slack for floating-point-tied descent comparisons; well inside
// the 1e-12 relative tolerance of the monotonicity contract
double descent_slack(double ref) { return 1e-13 * (1.0 + std::abs(ref)); }
}  // namespace

// ---------------------------------------------------------------- problem

double BlockProblem::eval_F(const Point& x) const {
    double F = eval_f(x);
    if (eval_r)
        for (int i = 0; i < num_blocks; ++i) F += eval_r(i, x[i]);
    return F;
}

void BlockProblem::validate(const Point& x0) const {
    if (num_blocks < 1) throw std::invalid_argument("BlockProblem: num_blocks must be >= 1");
    if (static_cast<int>(block_dims.size()) != num_blocks)
        throw std::invalid_argument("BlockProblem: block_dims size mismatch");
    if (!eval_f || !grad_block) throw std::invalid_argument("BlockProblem: eval_f and grad_block required");
    if (static_cast<int>(x0.size()) != num_blocks)
        throw std::invalid_argument("BlockProblem: starting point block count mismatch");
    for (int i = 0; i < num_blocks; ++i) {
        if (block_dims[i] <= 0) throw std::invalid_argument("BlockProblem: block dims must be positive");
        if (x0[i].size() != block_dims[i])
            throw std::invalid_argument("BlockProblem: starting point dimension mismatch");
    }
}

// ---------------------------------------------------------------- schedule

int Schedule::period() const {
    if (kind == ScheduleKind::explicit_order) return static_cast<int>(order.size());
    return num_blocks;
}

void Schedule::validate() const {
    if (num_blocks < 1) throw std::invalid_argument("Schedule: num_blocks must be >= 1");
    if (kind == ScheduleKind::explicit_order) {
        if (order.empty()) throw std::invalid_argument("Schedule: explicit order empty");
        for (int b : order)
            if (b < 0 || b >= num_blocks) throw std::invalid_argument("Schedule: order entry out of range");
        // a periodic sequence meets the T-window property exactly when every
        // block appears somewhere in one period
        std::vector<bool> seen(num_blocks, false);
        for (int b : order) seen[b] = true;
        if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
            throw std::invalid_argument("Schedule: explicit order misses a block");
    }
}

ScheduleState::ScheduleState(Schedule sched) : ScheduleState(sched, sched.seed) {}

ScheduleState::ScheduleState(Schedule sched, std::uint64_t seed_override)
    : sched_(std::move(sched)), rng_(seed_override) {
    sched_.validate();
}

int ScheduleState::next_block(long k) {
    if (k < 1) throw std::invalid_argument("next_block: k must be >= 1");
    const int T = sched_.period();
    const int pos = static_cast<int>((k - 1) % T);
    switch (sched_.kind) {
        case ScheduleKind::cyclic:
            return pos;
        case ScheduleKind::shuffled_per_cycle:
            if (pos == 0) perm_ = rng_.permutation(sched_.num_blocks);
            return perm_[pos];
        case ScheduleKind::explicit_order:
            return sched_.order[pos];
    }
    return 0;
}

// ---------------------------------------------------------------- rules

void StepRule::validate() const {
    if (gamma <= 1.0) throw std::invalid_argument("StepRule: gamma must be > 1");
    if (bt_shrink <= 0.0 || bt_shrink >= 1.0)
        throw std::invalid_argument("StepRule: bt_shrink must be in (0,1)");
    if (bt_max < 1) throw std::invalid_argument("StepRule: bt_max must be >= 1");
    if (alpha_init <= 0.0) throw std::invalid_argument("StepRule: alpha_init must be > 0");
}

void ExtrapRule::validate() const {
    if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("ExtrapRule: delta must be in (0,1)");
    if (cap_scale < 0.0) throw std::invalid_argument("ExtrapRule: cap_scale must be >= 0");
    if (omega_bt_shrink <= 0.0 || omega_bt_shrink >= 1.0)
        throw std::invalid_argument("ExtrapRule: omega_bt_shrink must be in (0,1)");
    if (omega_bt_max < 0) throw std::invalid_argument("ExtrapRule: omega_bt_max must be >= 0");
    if (mode == ExtrapMode::custom && !custom_omega)
        throw std::invalid_argument("ExtrapRule: custom mode needs custom_omega");
}

void SolverConfig::validate() const {
    step.validate();
    extrap.validate();
    if (max_cycles < 1) throw std::invalid_argument("SolverConfig: max_cycles must be >= 1");
    if (tol_obj < 0.0 || tol_residual < 0.0)
        throw std::invalid_argument("SolverConfig: tolerances must be >= 0");
}

// ---------------------------------------------------------------- trace

void Trace::record(int block, double obj, double step, double alpha, double omega, double lips,
                   double resid, const std::vector<int>& counts) {
    block_index.push_back(block);
    objective.push_back(obj);
    step_norm.push_back(step);
    alpha_used.push_back(alpha);
    omega_used.push_back(omega);
    lipschitz_used.push_back(lips);
    residual.push_back(resid);
    update_counts.push_back(counts);
}

void Trace::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "iter,block,objective,step_norm,alpha,omega,residual\n";
    for (std::size_t k = 0; k < objective.size(); ++k) {
        out << (k + 1) << "," << block_index[k] << "," << format_double(objective[k]) << ","
            << format_double(step_norm[k]) << "," << format_double(alpha_used[k]) << ","
            << format_double(omega_used[k]) << "," << format_double(residual[k]) << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------- config io

namespace {

std::string schedule_kind_name(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::cyclic: return "cyclic";
        case ScheduleKind::shuffled_per_cycle: return "shuffled_per_cycle";
        case ScheduleKind::explicit_order: return "explicit";
    }
    return "cyclic";
}

ScheduleKind schedule_kind_from(const std::string& s) {
    if (s == "cyclic") return ScheduleKind::cyclic;
    if (s == "shuffled_per_cycle") return ScheduleKind::shuffled_per_cycle;
    if (s == "explicit") return ScheduleKind::explicit_order;
    throw IoError("unknown schedule.kind: " + s);
}

std::string extrap_mode_name(ExtrapMode m) {
    switch (m) {
        case ExtrapMode::none: return "none";
        case ExtrapMode::capped: return "capped";
        case ExtrapMode::fista_capped: return "fista_capped";
        case ExtrapMode::custom: return "custom";
    }
    return "fista_capped";
}

ExtrapMode extrap_mode_from(const std::string& s) {
    if (s == "none") return ExtrapMode::none;
    if (s == "capped") return ExtrapMode::capped;
    if (s == "fista_capped") return ExtrapMode::fista_capped;
    throw IoError("unknown extrap.mode: " + s + " (custom is programmatic only)");
}

bool bool_from(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw IoError("bad boolean: " + s);
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

void apply_config_key(SolverConfig& cfg, const std::string& key, const std::string& val) {
    if (key == "schedule.kind") cfg.schedule.kind = schedule_kind_from(val);
    else if (key == "schedule.order") {
        cfg.schedule.order.clear();
        std::stringstream ss(val);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.schedule.order.push_back(std::stoi(tok));
    }
    else if (key == "schedule.seed") cfg.schedule.seed = std::stoull(val);
    else if (key == "step.mode") {
        if (val == "lipschitz") cfg.step.mode = StepMode::lipschitz;
        else if (val == "backtracking") cfg.step.mode = StepMode::backtracking;
        else throw IoError("unknown step.mode: " + val);
    }
    else if (key == "step.gamma") cfg.step.gamma = std::stod(val);
    else if (key == "step.bt_shrink") cfg.step.bt_shrink = std::stod(val);
    else if (key == "step.bt_max") cfg.step.bt_max = std::stoi(val);
    else if (key == "step.alpha_init") cfg.step.alpha_init = std::stod(val);
    else if (key == "extrap.mode") cfg.extrap.mode = extrap_mode_from(val);
    else if (key == "extrap.delta") cfg.extrap.delta = std::stod(val);
    else if (key == "extrap.cap_scale") cfg.extrap.cap_scale = std::stod(val);
    else if (key == "extrap.multiconvex") cfg.extrap.multiconvex = bool_from(val);
    else if (key == "extrap.monotone") cfg.extrap.monotone = bool_from(val);
    else if (key == "extrap.omega_bt_shrink") cfg.extrap.omega_bt_shrink = std::stod(val);
    else if (key == "extrap.omega_bt_max") cfg.extrap.omega_bt_max = std::stoi(val);
    else if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "max_cycles") cfg.max_cycles = std::stoi(val);
    else if (key == "tol_obj") cfg.tol_obj = std::stod(val);
    else if (key == "tol_residual") cfg.tol_residual = std::stod(val);
    else throw IoError("unknown config key: " + key);
}

}  // namespace

SolverConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    SolverConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError("bad config line: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            apply_config_key(cfg, key, val);
        } catch (const IoError&) {
            throw;
        } catch (const std::exception&) {
            throw IoError("bad value for config key " + key + ": " + val);
        }
    }
    return cfg;
}

void save_config(const std::string& path, const SolverConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "schedule.kind=" << schedule_kind_name(cfg.schedule.kind) << "\n";
    if (!cfg.schedule.order.empty()) {
        out << "schedule.order=";
        for (std::size_t i = 0; i < cfg.schedule.order.size(); ++i)
            out << (i ? "," : "") << cfg.schedule.order[i];
        out << "\n";
    }
    out << "schedule.seed=" << cfg.schedule.seed << "\n";
    out << "step.mode=" << (cfg.step.mode == StepMode::lipschitz ? "lipschitz" : "backtracking") << "\n";
    out << "step.gamma=" << format_double(cfg.step.gamma) << "\n";
    out << "step.bt_shrink=" << format_double(cfg.step.bt_shrink) << "\n";
    out << "step.bt_max=" << cfg.step.bt_max << "\n";
    out << "step.alpha_init=" << format_double(cfg.step.alpha_init) << "\n";
    out << "extrap.mode=" << extrap_mode_name(cfg.extrap.mode) << "\n";
    out << "extrap.delta=" << format_double(cfg.extrap.delta) << "\n";
    out << "extrap.cap_scale=" << format_double(cfg.extrap.cap_scale) << "\n";
    out << "extrap.multiconvex=" << (cfg.extrap.multiconvex ? "true" : "false") << "\n";
    out << "extrap.monotone=" << (cfg.extrap.monotone ? "true" : "false") << "\n";
    out << "extrap.omega_bt_shrink=" << format_double(cfg.extrap.omega_bt_shrink) << "\n";
    out << "extrap.omega_bt_max=" << cfg.extrap.omega_bt_max << "\n";
    out << "seed=" << cfg.seed << "\n";
    out << "max_cycles=" << cfg.max_cycles << "\n";
    out << "tol_obj=" << format_double(cfg.tol_obj) << "\n";
    out << "tol_residual=" << format_double(cfg.tol_residual) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------- ops

Vector extrapolate(const Vector& x_prev_update, const Vector& x_prev_prev, double omega) {
    if (x_prev_update.size() != x_prev_prev.size())
        throw std::invalid_argument("extrapolate: length mismatch");
    if (omega < 0.0) throw std::invalid_argument("extrapolate: omega must be >= 0");
    if (omega == 0.0) return x_prev_update;
    return x_prev_update + omega * (x_prev_update - x_prev_prev);
}

double resolve_cap_scale(const ExtrapRule& rule, double step_gamma) {
    if (rule.cap_scale > 0.0) return rule.cap_scale;
    if (rule.multiconvex) return rule.delta;
    return rule.delta * (step_gamma - 1.0) / (2.0 * (step_gamma + 1.0));
}

double omega_cap(const ExtrapRule& rule, double L_prev, double L_curr) {
    if (!(L_prev > 0.0) || !(L_curr > 0.0))
        throw std::invalid_argument("omega_cap: Lipschitz constants must be positive");
    // unresolved cap_scale falls back to the alpha = 1/(2L) family (gamma = 2)
    const double c = rule.cap_scale > 0.0 ? rule.cap_scale : resolve_cap_scale(rule, 2.0);
    const double cap = c * std::sqrt(L_prev / L_curr);
    return std::clamp(cap, 0.0, 1.0);
}

namespace {

Vector block_update_impl(const BlockProblem& problem, const Point& x, int i, const Vector& x_hat_i,
                         double alpha, long iteration) {
    if (!(alpha > 0.0)) throw std::invalid_argument("block_update: alpha must be > 0");
    Point x_eval = x;
    x_eval[i] = x_hat_i;
    Vector g = problem.grad_block(i, x_eval);
    if (g.size() != problem.block_dims[i])
        throw SolverError("grad_block returned wrong length for block " + std::to_string(i));
    if (!g.allFinite()) throw NonFiniteObjective(iteration, "gradient of block " + std::to_string(i));
    Vector v = x_hat_i - alpha * g;
    Vector u = problem.prox_block ? problem.prox_block(i, v, alpha) : std::move(v);
    if (!u.allFinite()) throw NonFiniteObjective(iteration, "prox output of block " + std::to_string(i));
    return u;
}

}  // namespace

Vector block_update(const BlockProblem& problem, const Point& x, int i, const Vector& x_hat_i,
                    double alpha) {
    return block_update_impl(problem, x, i, x_hat_i, alpha, -1);
}

AlphaResult backtrack_alpha(const BlockProblem& problem, const Point& x_old, int i,
                            const Vector& x_hat_i, double alpha0, const StepRule& rule) {
    if (!(alpha0 > 0.0)) throw std::invalid_argument("backtrack_alpha: alpha0 must be > 0");
    Point x_eval = x_old;
    x_eval[i] = x_hat_i;
    Vector g_hat = problem.grad_block(i, x_eval);
    if (!g_hat.allFinite()) throw SolverError("backtrack_alpha: non-finite gradient at trial point");
    Vector g_old = problem.grad_block(i, x_old);
    const double f_old = problem.eval_f(x_old);

    double alpha = alpha0;
    Point x_trial = x_old;
    for (int t = 0; t <= rule.bt_max; ++t) {
        Vector v = x_hat_i - alpha * g_hat;
        Vector u = problem.prox_block ? problem.prox_block(i, v, alpha) : std::move(v);
        x_trial[i] = u;
        const double f_trial = problem.eval_f(x_trial);
        const Vector dx = u - x_old[i];
        const double rhs = f_old + g_old.dot(dx) + dx.squaredNorm() / (2.0 * rule.gamma * alpha) +
                           descent_slack(f_old);
        if (std::isfinite(f_trial) && f_trial <= rhs) return {alpha, std::move(u)};
        alpha *= rule.bt_shrink;
    }
    throw BacktrackExhausted("backtrack_alpha: no stepsize in the grid satisfied the criterion");
}

OmegaResult backtrack_omega(const BlockProblem& problem, const Point& x_old, int i,
                            const Vector& x_prev_prev_i, double alpha, double omega0,
                            const ExtrapRule& rule, double objective_old) {
    if (omega0 < 0.0 || omega0 > 1.0)
        throw std::invalid_argument("backtrack_omega: omega0 must be in [0,1]");
    Point x_trial = x_old;
    double omega = omega0;
    const double slack = descent_slack(objective_old);
    for (int t = 0; t <= rule.omega_bt_max + 1; ++t) {
        if (t == rule.omega_bt_max + 1 || omega0 == 0.0) omega = 0.0;
        Vector x_hat = extrapolate(x_old[i], x_prev_prev_i, omega);
        Vector u = block_update(problem, x_old, i, x_hat, alpha);
        x_trial[i] = u;
        const double F_trial = problem.eval_F(x_trial);
        // omega = 0, the plain prox-linear step, ends the search unconditionally
        if (F_trial <= objective_old + slack || omega == 0.0)
            return {omega, std::move(u), F_trial};
        omega *= rule.omega_bt_shrink;
    }
    throw SolverError("backtrack_omega: unreachable");
}

double prox_residual(const BlockProblem& problem, const Point& x, const std::vector<double>& steps) {
    if (static_cast<int>(steps.size()) != problem.num_blocks)
        throw std::invalid_argument("prox_residual: one stepsize per block required");
    double sum = 0.0;
    for (int i = 0; i < problem.num_blocks; ++i) {
        const double a = steps[i];
        if (!(a > 0.0)) throw std::invalid_argument("prox_residual: steps must be positive");
        Vector g = problem.grad_block(i, x);
        Vector v = x[i] - a * g;
        Vector u = problem.prox_block ? problem.prox_block(i, v, a) : std::move(v);
        sum += (x[i] - u).squaredNorm() / (a * a);
    }
    return std::sqrt(sum);
}

// ---------------------------------------------------------------- solve

SolveResult solve(const BlockProblem& problem, const Point& x0, const SolverConfig& config) {
    config.validate();
    problem.validate(x0);

    Schedule sched = config.schedule;
    if (sched.num_blocks <= 0) sched.num_blocks = problem.num_blocks;
    if (sched.num_blocks != problem.num_blocks)
        throw std::invalid_argument("solve: schedule block count does not match problem");
    sched.validate();
    const int T = sched.period();
    // schedule.seed, when set, keeps a standalone schedule stream; else the run seed
    ScheduleState schedule(sched, sched.seed != 0 ? sched.seed : config.seed);

    ExtrapRule extrap = config.extrap;
    extrap.cap_scale = resolve_cap_scale(extrap, config.step.gamma);
    const StepRule& step = config.step;
    const bool lipschitz_mode = step.mode == StepMode::lipschitz;
    if (lipschitz_mode && !problem.lipschitz_block)
        throw std::invalid_argument("solve: lipschitz step mode requires a lipschitz_block oracle");

    SolveResult result;
    result.x = x0;
    Point& x = result.x;
    Point x_prev_prev = x0;  // per block: value before the block's latest update

    double F_prev = problem.eval_F(x);
    if (!std::isfinite(F_prev)) throw NonFiniteObjective(0, "objective at starting point");
    result.trace.initial_objective = F_prev;

    std::vector<double> L_prev(problem.num_blocks, 0.0);
    std::vector<double> alpha_last(problem.num_blocks, step.alpha_init);
    std::vector<int> counts(problem.num_blocks, 0);

    double t_fista = 1.0;
    double omega_fista = 0.0;
    double prev_cycle_F = kNan;
    int cycle = 1;

    for (long k = 1;; ++k) {
        const int pos = static_cast<int>((k - 1) % T);
        if (pos == 0 && k > 1) {
            // new cycle: advance the FISTA candidate weight sequence
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_fista * t_fista));
            omega_fista = (t_fista - 1.0) / t_next;
            t_fista = t_next;
        }

        const int i = schedule.next_block(k);
        const int j = counts[i] + 1;

        double alpha = 0.0;
        double L_curr = 0.0;
        if (lipschitz_mode) {
            L_curr = problem.lipschitz_block(i, x);
            if (!(L_curr > 0.0) || !std::isfinite(L_curr))
                throw SolverError("lipschitz_block returned a nonpositive or non-finite constant");
            alpha = 1.0 / (step.gamma * L_curr);
        } else {
            // warm start from the block's last accepted stepsize, one growth step allowed
            const double alpha0 = std::min(step.alpha_init, alpha_last[i] / step.bt_shrink);
            alpha = alpha0;
            L_curr = 1.0 / (step.gamma * alpha0);  // implied constant for the weight cap
        }

        double omega = 0.0;
        const double Lp = L_prev[i] > 0.0 ? L_prev[i] : L_curr;  // first update: L_prev = L_curr
        switch (extrap.mode) {
            case ExtrapMode::none: omega = 0.0; break;
            case ExtrapMode::capped: omega = omega_cap(extrap, Lp, L_curr); break;
            case ExtrapMode::fista_capped:
                omega = std::min(omega_fista, omega_cap(extrap, Lp, L_curr));
                break;
            case ExtrapMode::custom:
                omega = std::min(std::max(0.0, extrap.custom_omega(k, j)),
                                 omega_cap(extrap, Lp, L_curr));
                break;
        }

        Vector x_hat = extrapolate(x[i], x_prev_prev[i], omega);
        Vector x_new;
        if (lipschitz_mode) {
            x_new = block_update_impl(problem, x, i, x_hat, alpha, k);
        } else {
            AlphaResult ar = backtrack_alpha(problem, x, i, x_hat, alpha, step);
            alpha = ar.alpha;
            x_new = std::move(ar.x_new);
            L_curr = 1.0 / (step.gamma * alpha);
        }

        double F_new;
        if (extrap.monotone) {
            OmegaResult om = backtrack_omega(problem, x, i, x_prev_prev[i], alpha, omega, extrap, F_prev);
            omega = om.omega;
            x_new = std::move(om.x_new);
            F_new = om.objective;
            if (F_new > F_prev + descent_slack(F_prev)) {
                // plain step still increased F: the stepsize was too long for the
                // true local constant, shrink it under the descent criterion
                AlphaResult ar = backtrack_alpha(problem, x, i, x[i], alpha * step.bt_shrink, step);
                alpha = ar.alpha;
                omega = 0.0;
                x_new = std::move(ar.x_new);
                Point x_trial = x;
                x_trial[i] = x_new;
                F_new = problem.eval_F(x_trial);
                if (F_new > F_prev + descent_slack(F_prev))
                    throw SolverError("monotone enforcement failed; check the problem oracles");
            }
            x_hat = extrapolate(x[i], x_prev_prev[i], omega);  // base point of the accepted trial
        } else {
            Point x_trial = x;
            x_trial[i] = x_new;
            F_new = problem.eval_F(x_trial);
        }
        if (!std::isfinite(F_new)) throw NonFiniteObjective(k, "objective");

        const double step_norm = (x_new - x[i]).norm();
        const double resid = (x_hat - x_new).norm() / alpha;

        x_prev_prev[i] = x[i];
        x[i] = std::move(x_new);
        L_prev[i] = L_curr;
        alpha_last[i] = alpha;
        counts[i] += 1;
        result.trace.record(i, F_new, step_norm, alpha, omega, L_curr, resid, counts);
        F_prev = F_new;

        if (pos == T - 1) {  // cycle boundary: stopping checks
            result.iterations = k;
            result.cycles = cycle;
            if (std::isfinite(prev_cycle_F) &&
                std::abs(F_new - prev_cycle_F) <= config.tol_obj * (1.0 + std::abs(prev_cycle_F))) {
                result.reason = StopReason::objective_tol;
                return result;
            }
            prev_cycle_F = F_new;
            if (prox_residual(problem, x, alpha_last) <= config.tol_residual) {
                result.reason = StopReason::residual_tol;
                return result;
            }
            if (cycle >= config.max_cycles) {
                result.reason = StopReason::max_cycles;
                return result;
            }
            ++cycle;
        }
    }
}

}  // namespace bpl
