#include <doctest.h>

#include <cmath>

#include "bpl/datagen.hpp"
#include "bpl/lasso.hpp"
#include "oracles.hpp"

using bpl::LassoVariant;
using bpl::Vector;

namespace {

int iters_to(const std::vector<double>& objective, double target) {
    for (std::size_t k = 0; k < objective.size(); ++k)
        if (objective[k] <= target) return static_cast<int>(k + 1);
    return static_cast<int>(objective.size()) + 1;
}

}  // namespace

TEST_SUITE_BEGIN("lasso");

TEST_CASE("fista weight sequence") {
    auto w = bpl::fista_weight_sequence(100);
    CHECK(w.t[0] == 1.0);
    CHECK(w.omega[0] == 0.0);
    CHECK(w.omega[1] == 0.0);  // (t_1 - 1)/t_2 with t_1 = 1
    CHECK(w.t[1] == doctest::Approx(0.5 * (1.0 + std::sqrt(5.0))));
    for (int k = 1; k < 100; ++k) {
        CHECK(w.t[k] > w.t[k - 1]);
        CHECK(w.omega[k] >= 0.0);
        CHECK(w.omega[k] < 1.0);
        if (k >= 2) CHECK(w.omega[k] > w.omega[k - 1]);
    }
}

TEST_CASE("lambda above the subgradient bound keeps zero optimal") {
    auto data = bpl::gen_lasso(20, 50, 5, 0.1, 3);
    const double lam_max = (data.instance.A.transpose() * data.instance.b).cwiseAbs().maxCoeff();
    auto inst = bpl::LassoInstance::make(data.instance.A, data.instance.b, lam_max * 1.01);
    auto res = bpl::solve_lasso(inst, LassoVariant::fista, 5);
    CHECK(res.x.norm() == 0.0);
    for (double s : res.trace.step_norm) CHECK(s == 0.0);
}

TEST_CASE("restart and backtracked variants are nonincreasing") {
    auto data = bpl::gen_lasso(40, 200, 8, 0.1, 11);
    for (auto v : {LassoVariant::restart, LassoVariant::backtracked_omega}) {
        auto res = bpl::solve_lasso(data.instance, v, 400);
        double prev = res.trace.initial_objective;
        for (double f : res.trace.objective) {
            CHECK(f <= prev + 1e-12 * (1.0 + std::abs(prev)));
            prev = f;
        }
    }
}

TEST_CASE("variants agree in the limit and order by iterations-to-tolerance") {
    auto data = bpl::gen_lasso(40, 200, 8, 0.1, 7);
    const int max_iter = 3000;
    auto fista = bpl::solve_lasso(data.instance, LassoVariant::fista, max_iter);
    auto restart = bpl::solve_lasso(data.instance, LassoVariant::restart, max_iter);
    auto backtracked = bpl::solve_lasso(data.instance, LassoVariant::backtracked_omega, max_iter);

    const double F_best = std::min({fista.trace.objective.back(), restart.trace.objective.back(),
                                    backtracked.trace.objective.back()});
    CHECK(fista.trace.objective.back() - F_best <= 1e-6);
    CHECK(restart.trace.objective.back() - F_best <= 1e-6);
    CHECK(backtracked.trace.objective.back() - F_best <= 1e-6);

    // both monotone variants beat plain fista on iterations-to-tolerance; the
    // full backtracked <= restart <= fista ordering is a property of the
    // full-size instance and is pinned by the acceptance suite
    const double target = F_best + 1e-6;
    const int it_f = iters_to(fista.trace.objective, target);
    const int it_r = iters_to(restart.trace.objective, target);
    const int it_b = iters_to(backtracked.trace.objective, target);
    CHECK(it_b <= it_f);
    CHECK(it_r <= it_f);
}

TEST_CASE("subgradient certificate at a tight solve") {
    auto data = bpl::gen_lasso(30, 80, 5, 0.05, 19);
    auto res = bpl::solve_lasso(data.instance, LassoVariant::backtracked_omega, 4000);
    const Vector g = data.instance.A.transpose() * (data.instance.A * res.x - data.instance.b);
    const double lam = data.instance.lambda;
    for (Eigen::Index j = 0; j < res.x.size(); ++j) {
        if (res.x[j] == 0.0)
            CHECK(std::abs(g[j]) <= lam + 1e-4);
        else
            CHECK(std::abs(g[j] + lam * (res.x[j] > 0 ? 1.0 : -1.0)) <= 1e-4);
    }
}

TEST_CASE("lasso gradient matches finite differences") {
    auto data = bpl::gen_lasso(15, 25, 4, 0.1, 23);
    const auto& A = data.instance.A;
    const auto& b = data.instance.b;
    bpl::Rng rng(5);
    for (int rep = 0; rep < 5; ++rep) {
        Vector x = oracle::random_vector(rng, 25, -1.0, 1.0);
        Vector g = A.transpose() * (A * x - b);
        Vector fd = oracle::central_diff(
            [&](const Vector& v) { return 0.5 * (A * v - b).squaredNorm(); }, x);
        CHECK((g - fd).norm() <= 1e-5 * (1.0 + g.norm()));
    }
}

TEST_SUITE_END();
