#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "bpl/core.hpp"
#include "bpl/errors.hpp"
#include "bpl/prox.hpp"
#include "oracles.hpp"

using bpl::BlockProblem;
using bpl::ExtrapMode;
using bpl::ExtrapRule;
using bpl::Point;
using bpl::Schedule;
using bpl::ScheduleKind;
using bpl::ScheduleState;
using bpl::SolverConfig;
using bpl::StepRule;
using bpl::Vector;

namespace {

// separable quadratic f(x) = 1/2 sum_i ||x_i - c_i||^2, r == 0
BlockProblem separable_quadratic(const Point& centers) {
    BlockProblem p;
    p.num_blocks = static_cast<int>(centers.size());
    for (const auto& c : centers) p.block_dims.push_back(static_cast<int>(c.size()));
    p.eval_f = [centers](const Point& x) {
        double f = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) f += 0.5 * (x[i] - centers[i]).squaredNorm();
        return f;
    };
    p.grad_block = [centers](int i, const Point& x) -> Vector { return x[i] - centers[i]; };
    p.lipschitz_block = [](int, const Point&) { return 1.0; };
    return p;
}

Point single(double v) {
    Point x(1);
    x[0] = Vector::Constant(1, v);
    return x;
}

}  // namespace

TEST_SUITE_BEGIN("core");

TEST_CASE("cyclic schedule emits 0,1,2,0,...") {
    Schedule s{ScheduleKind::cyclic, 3, {}, 0};
    ScheduleState st(s);
    CHECK(st.next_block(1) == 0);
    CHECK(st.next_block(2) == 1);
    CHECK(st.next_block(3) == 2);
    CHECK(st.next_block(4) == 0);
}

TEST_CASE("shuffled schedule emits one permutation per cycle, deterministically") {
    Schedule s{ScheduleKind::shuffled_per_cycle, 3, {}, 77};
    ScheduleState a(s), b(s);
    for (int cyc = 0; cyc < 20; ++cyc) {
        std::vector<bool> seen(3, false);
        for (int t = 1; t <= 3; ++t) {
            const long k = 3L * cyc + t;
            const int ia = a.next_block(k);
            CHECK(ia == b.next_block(k));
            seen[ia] = true;
        }
        CHECK((seen[0] && seen[1] && seen[2]));
    }
}

TEST_CASE("explicit order window property") {
    Schedule s{ScheduleKind::explicit_order, 3, {0, 1, 0, 2}, 0};
    s.validate();
    ScheduleState st(s);
    std::vector<int> emitted;
    for (long k = 1; k <= 40; ++k) emitted.push_back(st.next_block(k));
    for (std::size_t start = 0; start + 4 <= emitted.size(); ++start) {
        std::vector<bool> seen(3, false);
        for (int t = 0; t < 4; ++t) seen[emitted[start + t]] = true;
        CHECK((seen[0] && seen[1] && seen[2]));
    }
    // block 2 never appears: no window of any length can contain it
    Schedule bad{ScheduleKind::explicit_order, 3, {0, 1, 0, 1}, 0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("extrapolate") {
    Vector a = Vector::Constant(1, 2.0);
    Vector b = Vector::Constant(1, 1.0);
    CHECK(bpl::extrapolate(a, b, 0.0)[0] == 2.0);
    CHECK(bpl::extrapolate(a, a, 0.77)[0] == 2.0);
    CHECK(bpl::extrapolate(a, b, 0.5)[0] == doctest::Approx(2.5));
    Vector c(2);
    CHECK_THROWS_AS(bpl::extrapolate(a, c, 0.5), std::invalid_argument);
}

TEST_CASE("omega_cap and cap-scale resolution") {
    ExtrapRule general;
    general.delta = 0.6;
    // unresolved cap assumes gamma = 2: c = delta/6
    CHECK(bpl::omega_cap(general, 1.0, 1.0) == doctest::Approx(0.1));

    ExtrapRule multi;
    multi.delta = 0.9999;
    multi.multiconvex = true;
    multi.cap_scale = bpl::resolve_cap_scale(multi, 2.0);
    CHECK(multi.cap_scale == doctest::Approx(0.9999));
    // unclamped would be 0.9999 * sqrt(4) = 1.9998
    CHECK(bpl::omega_cap(multi, 4.0, 1.0) == doctest::Approx(1.0));

    ExtrapRule relaxed;
    relaxed.delta = 0.5;
    CHECK(bpl::resolve_cap_scale(relaxed, 3.0) == doctest::Approx(0.125));

    CHECK_THROWS_AS(bpl::omega_cap(general, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(bpl::omega_cap(general, 1.0, -2.0), std::invalid_argument);
}

TEST_CASE("block_update solves the prox-linear subproblem") {
    // r == 0, f quadratic, x_hat at the center: gradient zero, returns the center
    Point c = single(1.5);
    auto p = separable_quadratic(c);
    Vector u = bpl::block_update(p, c, 0, c[0], 0.7);
    CHECK(u[0] == doctest::Approx(1.5));

    // nonneg indicator, f = 1/2 (u + 1)^2, x_hat = 0, alpha = 1: projected step lands at 0
    BlockProblem q = separable_quadratic(single(-1.0));
    q.eval_r = [](int, const Vector& v) {
        return (v.array() >= 0.0).all() ? 0.0 : std::numeric_limits<double>::infinity();
    };
    q.prox_block = [](int, const Vector& v, double) -> Vector { return v.cwiseMax(0.0); };
    Vector u2 = bpl::block_update(q, single(0.0), 0, Vector::Zero(1), 1.0);
    CHECK(u2[0] == doctest::Approx(0.0));

    // r = |.|, f = 1/2 (u-3)^2, alpha = 1, x_hat = 3: soft-threshold(3,1) = 2,
    // cross-checked against the scalar grid oracle
    BlockProblem l1 = separable_quadratic(single(3.0));
    l1.eval_r = [](int, const Vector& v) { return v.lpNorm<1>(); };
    l1.prox_block = [](int, const Vector& v, double a) { return bpl::soft_threshold(v, a); };
    Vector u3 = bpl::block_update(l1, single(3.0), 0, Vector::Constant(1, 3.0), 1.0);
    CHECK(u3[0] == doctest::Approx(2.0));
    const double oracle_min = oracle::scalar_argmin(
        [](double b) { return 0.5 * (b - 3.0) * (b - 3.0) + std::abs(b); }, -5.0, 5.0);
    CHECK(u3[0] == doctest::Approx(oracle_min).epsilon(1e-6));
}

TEST_CASE("backtrack_alpha accepts 1/(gamma L) immediately and shrinks huge steps") {
    auto p = separable_quadratic(single(0.0));  // f = u^2/2, L = 1
    StepRule rule;
    rule.mode = bpl::StepMode::backtracking;
    Point x = single(1.0);

    auto r1 = bpl::backtrack_alpha(p, x, 0, x[0], 1.0 / (rule.gamma * 1.0), rule);
    CHECK(r1.alpha == doctest::Approx(0.5));

    auto r2 = bpl::backtrack_alpha(p, x, 0, x[0], 1e6, rule);
    CHECK(r2.alpha < 1e6);
    // verify the acceptance inequality numerically at the returned point
    const double f_old = 0.5;
    const double dx = r2.x_new[0] - 1.0;
    const double f_new = 0.5 * r2.x_new[0] * r2.x_new[0];
    CHECK(f_new <= f_old + 1.0 * dx + dx * dx / (2.0 * rule.gamma * r2.alpha) + 1e-9);

    // zero gradient at x_hat: both sides equal, first alpha accepted
    auto r3 = bpl::backtrack_alpha(p, single(0.0), 0, Vector::Zero(1), 123.0, rule);
    CHECK(r3.alpha == doctest::Approx(123.0));

    // a backtracking grid that cannot reach a feasible step
    StepRule tiny;
    tiny.mode = bpl::StepMode::backtracking;
    tiny.bt_max = 1;
    tiny.bt_shrink = 0.99;
    CHECK_THROWS_AS(bpl::backtrack_alpha(p, x, 0, x[0], 1e18, tiny), bpl::BacktrackExhausted);
}

TEST_CASE("backtrack_omega") {
    auto p = separable_quadratic(single(0.0));
    ExtrapRule rule;
    Point x = single(1.0);
    Vector x_prev = Vector::Constant(1, 2.0);
    const double F_old = 0.5;

    // omega0 = 0 returns the plain prox step
    auto r0 = bpl::backtrack_omega(p, x, 0, x_prev, 0.5, 0.0, rule, F_old);
    CHECK(r0.omega == 0.0);
    CHECK(r0.x_new[0] == doctest::Approx(0.5));

    // equal history points: extrapolation is a no-op, omega0 accepted as given
    auto r1 = bpl::backtrack_omega(p, x, 0, x[0], 0.5, 0.9, rule, F_old);
    CHECK(r1.omega == doctest::Approx(0.9));

    // aggressive omega near the solution backs off and still descends
    Point near = single(0.01);
    Vector far = Vector::Constant(1, -1.0);
    auto r2 = bpl::backtrack_omega(p, near, 0, far, 0.5, 1.0, rule, 0.5 * 0.01 * 0.01);
    CHECK(r2.omega < 1.0);
    CHECK(r2.objective <= 0.5 * 0.01 * 0.01 + 1e-12);
}

TEST_CASE("prox_residual") {
    auto p = separable_quadratic(single(2.0));
    CHECK(bpl::prox_residual(p, single(2.0), {0.3}) == doctest::Approx(0.0));
    CHECK(bpl::prox_residual(p, single(5.0), {0.3}) > 0.1);

    BlockProblem l1 = separable_quadratic(single(3.0));
    l1.eval_r = [](int, const Vector& v) { return v.lpNorm<1>(); };
    l1.prox_block = [](int, const Vector& v, double a) { return bpl::soft_threshold(v, a); };
    // x = 2: prox(2 - 1*(2-3)) = soft(3,1) = 2, a fixed point
    CHECK(bpl::prox_residual(l1, single(2.0), {1.0}) == doctest::Approx(0.0));
}

TEST_CASE("solve: single quadratic block converges geometrically") {
    auto p = separable_quadratic(single(4.0));
    SolverConfig cfg;
    cfg.extrap.mode = ExtrapMode::none;
    cfg.max_cycles = 200;
    cfg.tol_obj = 0.0;  // stop on the prox-gradient residual
    auto res = bpl::solve(p, single(0.0), cfg);
    CHECK(res.x[0][0] == doctest::Approx(4.0).epsilon(1e-7));
    CHECK(res.reason == bpl::StopReason::residual_tol);
    // alpha = 1/(2L): x^+ - c = (x - c)/2, step norms halve
    for (std::size_t k = 1; k < std::min<std::size_t>(res.trace.step_norm.size(), 20); ++k)
        CHECK(res.trace.step_norm[k] == doctest::Approx(0.5 * res.trace.step_norm[k - 1]).epsilon(1e-9));
}

TEST_CASE("solve: two separable blocks, count identity, both minimized") {
    Point c(2);
    c[0] = Vector::Constant(2, 1.0);
    c[1] = Vector::Constant(3, -2.0);
    auto p = separable_quadratic(c);
    SolverConfig cfg;
    cfg.max_cycles = 300;
    cfg.tol_obj = 0.0;
    auto res = bpl::solve(p, Point{Vector::Zero(2), Vector::Zero(3)}, cfg);
    CHECK((res.x[0] - c[0]).norm() <= 1e-7);
    CHECK((res.x[1] - c[1]).norm() <= 1e-7);
    for (std::size_t k = 0; k < res.trace.iterations(); ++k) {
        const auto& d = res.trace.update_counts[k];
        CHECK(d[0] + d[1] == static_cast<int>(k + 1));  // sum_i d_i^k = k
        CHECK(std::abs(d[0] - d[1]) <= 1);
    }
}

TEST_CASE("solve: monotone trace on a nonconvex composite") {
    // f couples the blocks; r is MCP, so plain extrapolated steps can overshoot
    auto spec = bpl::PenaltySpec::mcp(0.4, 2.0);
    BlockProblem p;
    p.num_blocks = 2;
    p.block_dims = {2, 2};
    p.eval_f = [](const Point& x) {
        return 0.5 * (x[0] - Vector::Constant(2, 1.0)).squaredNorm() +
               0.5 * (x[1] + Vector::Constant(2, 0.5)).squaredNorm() + 0.25 * x[0].dot(x[1]);
    };
    p.grad_block = [](int i, const Point& x) -> Vector {
        if (i == 0) return x[0] - Vector::Constant(2, 1.0) + 0.25 * x[1];
        return x[1] + Vector::Constant(2, 0.5) + 0.25 * x[0];
    };
    p.lipschitz_block = [](int, const Point&) { return 1.0; };
    p.eval_r = [spec](int, const Vector& v) {
        double r = 0.0;
        for (int t = 0; t < v.size(); ++t) r += bpl::penalty_value(spec, v[t]);
        return r;
    };
    p.prox_block = [spec](int, const Vector& v, double a) {
        Vector u(v.size());
        for (int t = 0; t < v.size(); ++t) u[t] = bpl::penalty_prox(spec, v[t], 1.0 / a);
        return u;
    };

    SolverConfig cfg;
    cfg.extrap.monotone = true;
    cfg.schedule.kind = ScheduleKind::shuffled_per_cycle;
    cfg.seed = 5;
    cfg.max_cycles = 150;
    Point x0{Vector::Constant(2, 2.0), Vector::Constant(2, -2.0)};
    auto res = bpl::solve(p, x0, cfg);
    double prev = res.trace.initial_objective;
    for (double f : res.trace.objective) {
        CHECK(f <= prev + 1e-12 * (1.0 + std::abs(prev)));
        prev = f;
    }
}

TEST_CASE("solve: identical config reproduces the trace bit-for-bit") {
    Point c(3);
    for (int i = 0; i < 3; ++i) c[i] = Vector::Constant(2, i - 1.0);
    auto p = separable_quadratic(c);
    SolverConfig cfg;
    cfg.schedule.kind = ScheduleKind::shuffled_per_cycle;
    cfg.seed = 99;
    cfg.max_cycles = 40;
    Point x0{Vector::Zero(2), Vector::Zero(2), Vector::Zero(2)};
    auto a = bpl::solve(p, x0, cfg);
    auto b = bpl::solve(p, x0, cfg);
    REQUIRE(a.trace.iterations() == b.trace.iterations());
    for (std::size_t k = 0; k < a.trace.iterations(); ++k) {
        CHECK(a.trace.objective[k] == b.trace.objective[k]);
        CHECK(a.trace.block_index[k] == b.trace.block_index[k]);
        CHECK(a.trace.step_norm[k] == b.trace.step_norm[k]);
        CHECK(a.trace.omega_used[k] == b.trace.omega_used[k]);
    }
}

TEST_CASE("solve: omega stays under the cap") {
    Point c(2);
    c[0] = Vector::Constant(2, 1.0);
    c[1] = Vector::Constant(2, -1.0);
    auto p = separable_quadratic(c);
    SolverConfig cfg;
    cfg.max_cycles = 50;
    auto res = bpl::solve(p, Point{Vector::Zero(2), Vector::Zero(2)}, cfg);
    ExtrapRule resolved = cfg.extrap;
    resolved.cap_scale = bpl::resolve_cap_scale(resolved, cfg.step.gamma);
    for (std::size_t k = 0; k < res.trace.iterations(); ++k) {
        // constant Lipschitz problem: the cap is cap_scale itself
        CHECK(res.trace.omega_used[k] <=
              bpl::omega_cap(resolved, res.trace.lipschitz_used[k], res.trace.lipschitz_used[k]) + 1e-15);
    }
}

TEST_CASE("solve: backtracking mode needs no lipschitz oracle") {
    Point c(2);
    c[0] = Vector::Constant(2, 2.0);
    c[1] = Vector::Constant(2, -1.0);
    auto p = separable_quadratic(c);
    p.lipschitz_block = nullptr;
    SolverConfig cfg;
    cfg.step.mode = bpl::StepMode::backtracking;
    cfg.step.alpha_init = 100.0;  // force the grid to shrink
    cfg.extrap.monotone = true;
    cfg.max_cycles = 200;
    cfg.tol_obj = 0.0;
    auto res = bpl::solve(p, Point{Vector::Zero(2), Vector::Zero(2)}, cfg);
    CHECK((res.x[0] - c[0]).norm() <= 1e-6);
    CHECK((res.x[1] - c[1]).norm() <= 1e-6);
    double prev = res.trace.initial_objective;
    for (double f : res.trace.objective) {
        CHECK(f <= prev + 1e-12 * (1.0 + std::abs(prev)));
        prev = f;
    }
    // lipschitz mode without an oracle is rejected
    SolverConfig bad;
    CHECK_THROWS_AS(bpl::solve(p, Point{Vector::Zero(2), Vector::Zero(2)}, bad),
                    std::invalid_argument);
}

TEST_CASE("solve: custom extrapolation weights are capped") {
    auto p = separable_quadratic(single(1.0));
    SolverConfig cfg;
    cfg.extrap.mode = ExtrapMode::custom;
    cfg.extrap.custom_omega = [](long, int) { return 1.0; };  // always ask for the maximum
    cfg.max_cycles = 30;
    auto res = bpl::solve(p, single(0.0), cfg);
    ExtrapRule resolved = cfg.extrap;
    resolved.cap_scale = bpl::resolve_cap_scale(resolved, cfg.step.gamma);
    const double cap = bpl::omega_cap(resolved, 1.0, 1.0);
    for (std::size_t k = 1; k < res.trace.iterations(); ++k)
        CHECK(res.trace.omega_used[k] <= cap + 1e-15);
}

TEST_CASE("solve: non-finite objective aborts with the iteration attached") {
    BlockProblem p;
    p.num_blocks = 1;
    p.block_dims = {1};
    p.eval_f = [](const Point& x) { return x[0][0] > 10.0 ? std::nan("") : 0.5 * x[0].squaredNorm(); };
    p.grad_block = [](int, const Point& x) -> Vector {
        return Vector::Constant(1, x[0][0] - 100.0);  // drives x past 10
    };
    p.lipschitz_block = [](int, const Point&) { return 1.0; };
    SolverConfig cfg;
    cfg.max_cycles = 50;
    CHECK_THROWS_AS(bpl::solve(p, single(0.0), cfg), bpl::NonFiniteObjective);
}

TEST_CASE("solve: square-summable step diagnostic") {
    auto p = separable_quadratic(single(2.0));
    SolverConfig cfg;
    cfg.max_cycles = 400;
    cfg.tol_obj = 0.0;
    cfg.tol_residual = 0.0;  // run the full budget
    auto res = bpl::solve(p, single(-3.0), cfg);
    const auto& s = res.trace.step_norm;
    const std::size_t q = s.size() / 4;
    double first = 0.0, last = 0.0, total = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        total += s[k] * s[k];
        if (k < q) first += s[k] * s[k];
        if (k >= s.size() - q) last += s[k] * s[k];
    }
    CHECK(last < first);
    CHECK(last < 0.01 * total);
}

TEST_CASE("config file round trip") {
    SolverConfig cfg;
    cfg.schedule.kind = ScheduleKind::explicit_order;
    cfg.schedule.order = {0, 1, 0, 2};
    cfg.schedule.seed = 4;
    cfg.step.mode = bpl::StepMode::backtracking;
    cfg.step.gamma = 3.5;
    cfg.step.alpha_init = 0.25;
    cfg.extrap.mode = ExtrapMode::capped;
    cfg.extrap.delta = 0.77;
    cfg.extrap.monotone = true;
    cfg.seed = 1234567;
    cfg.max_cycles = 321;
    cfg.tol_obj = 2.5e-9;
    cfg.tol_residual = 1e-7;
    const std::string path = "test_core_config.txt";
    bpl::save_config(path, cfg);
    auto r = bpl::load_config(path);
    CHECK(r.schedule.kind == cfg.schedule.kind);
    CHECK(r.schedule.order == cfg.schedule.order);
    CHECK(r.schedule.seed == cfg.schedule.seed);
    CHECK(r.step.mode == cfg.step.mode);
    CHECK(r.step.gamma == cfg.step.gamma);
    CHECK(r.step.alpha_init == cfg.step.alpha_init);
    CHECK(r.extrap.mode == cfg.extrap.mode);
    CHECK(r.extrap.delta == cfg.extrap.delta);
    CHECK(r.extrap.monotone == cfg.extrap.monotone);
    CHECK(r.seed == cfg.seed);
    CHECK(r.max_cycles == cfg.max_cycles);
    CHECK(r.tol_obj == cfg.tol_obj);
    CHECK(r.tol_residual == cfg.tol_residual);
    std::remove(path.c_str());
}

TEST_CASE("config rejects unknown keys and malformed lines") {
    {
        std::ofstream out("test_core_badcfg.txt");
        out << "step.gamma=2.5\nnot_a_key=1\n";
    }
    CHECK_THROWS_AS(bpl::load_config("test_core_badcfg.txt"), bpl::IoError);
    {
        std::ofstream out("test_core_badcfg.txt");
        out << "just some words\n";
    }
    CHECK_THROWS_AS(bpl::load_config("test_core_badcfg.txt"), bpl::IoError);
    std::remove("test_core_badcfg.txt");
    CHECK_THROWS_AS(bpl::load_config("no_such_config.txt"), bpl::IoError);
}

TEST_CASE("trace csv round trip") {
    auto p = separable_quadratic(single(1.0));
    SolverConfig cfg;
    cfg.max_cycles = 10;
    auto res = bpl::solve(p, single(0.0), cfg);
    const std::string path = "test_core_trace.csv";
    res.trace.write_csv(path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "iter,block,objective,step_norm,alpha,omega,residual");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        long iter;
        int block;
        double obj, sn, al, om, resd;
        REQUIRE(std::sscanf(line.c_str(), "%ld,%d,%lf,%lf,%lf,%lf,%lf", &iter, &block, &obj, &sn,
                            &al, &om, &resd) == 7);
        CHECK(obj == res.trace.objective[rows]);
        CHECK(sn == res.trace.step_norm[rows]);
        ++rows;
    }
    CHECK(rows == res.trace.iterations());
    std::remove(path.c_str());
}

TEST_CASE("gradient oracle check harness on the shipped core test problems") {
    bpl::Rng rng(31);
    Point c(2);
    c[0] = Vector::Constant(2, 0.3);
    c[1] = Vector::Constant(3, -1.2);
    auto p = separable_quadratic(c);
    for (int rep = 0; rep < 5; ++rep) {
        Point x{oracle::random_vector(rng, 2, -2, 2), oracle::random_vector(rng, 3, -2, 2)};
        for (int i = 0; i < 2; ++i) {
            Vector g = p.grad_block(i, x);
            Vector fd = oracle::central_diff(
                [&](const Vector& v) {
                    Point y = x;
                    y[i] = v;
                    return p.eval_f(y);
                },
                x[i]);
            CHECK((g - fd).norm() <= 1e-5 * (1.0 + g.norm()));
        }
    }
}

TEST_SUITE_END();
