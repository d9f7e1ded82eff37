#include <doctest.h>

#include <cmath>

#include "bpl/datagen.hpp"
#include "bpl/errors.hpp"
#include "bpl/nmf.hpp"
#include "oracles.hpp"

using bpl::Matrix;
using bpl::NmfVariant;
using bpl::Vector;

namespace {

double nmf_objective(const Matrix& M, const Matrix& X, const Matrix& Y) {
    return 0.5 * (X * Y.transpose() - M).squaredNorm();
}

Matrix random_nonneg(bpl::Rng& rng, int rows, int cols) {
    Matrix M(rows, cols);
    for (Eigen::Index t = 0; t < M.size(); ++t) M.data()[t] = rng.next_double();
    return M;
}

}  // namespace

TEST_SUITE_BEGIN("nmf");

TEST_CASE("rank-one instance is solved exactly in one pair update") {
    Vector u(3), v(4);
    u << 1.0, 2.0, 0.5;
    v << 0.3, 0.7, 1.1, 0.2;
    Matrix M = u * v.transpose();

    Matrix X = u;
    Matrix Y = v;
    bpl::rri_step_original(M, X, Y, 0);
    CHECK(nmf_objective(M, X, Y) <= 1e-24);

    // also from a perturbed positive start
    X(0, 0) = 2.5;
    Y(1, 0) = 0.9;
    bpl::rri_step_original(M, X, Y, 0);
    CHECK(nmf_objective(M, X, Y) <= 1e-20);
}

TEST_CASE("original updates never increase the objective") {
    bpl::Rng rng(5);
    Matrix M = random_nonneg(rng, 5, 4);
    Matrix X = random_nonneg(rng, 5, 2);
    Matrix Y = random_nonneg(rng, 4, 2);
    double prev = nmf_objective(M, X, Y);
    for (int rep = 0; rep < 6; ++rep)
        for (int i = 0; i < 2; ++i) {
            bpl::rri_step_original(M, X, Y, i);
            const double now = nmf_objective(M, X, Y);
            CHECK(now <= prev + 1e-12 * (1.0 + prev));
            prev = now;
        }
}

TEST_CASE("closed-form x-update cannot be improved by projected gradient") {
    bpl::Rng rng(9);
    Matrix M = random_nonneg(rng, 6, 5);
    Matrix X = random_nonneg(rng, 6, 3);
    Matrix Y = random_nonneg(rng, 5, 3);
    const int i = 1;
    Matrix X_before = X;
    Matrix Y_before = Y;
    bpl::rri_step_original(M, X, Y, i);

    // residual against the other columns, x_i update only
    Matrix R = M;
    for (int j = 0; j < 3; ++j)
        if (j != i) R -= X_before.col(j) * Y_before.col(j).transpose();
    const Vector y = Y_before.col(i);
    auto f = [&](const Vector& x) { return 0.5 * (x * y.transpose() - R).squaredNorm(); };
    auto grad = [&](const Vector& x) -> Vector { return (x * y.transpose() - R) * y; };
    auto project = [](const Vector& x) -> Vector { return x.cwiseMax(0.0); };
    const double refined =
        oracle::refine_projected_gradient(f, grad, project, X.col(i), 0.5 / y.squaredNorm(), 500);
    CHECK(f(X.col(i)) <= refined + 1e-10);
}

TEST_CASE("modified update keeps unit nonnegative x and solves y exactly") {
    bpl::Rng rng(13);
    Matrix M = random_nonneg(rng, 7, 6);
    Matrix X = random_nonneg(rng, 7, 3);
    Matrix Y = random_nonneg(rng, 6, 3);
    for (int j = 0; j < 3; ++j) X.col(j) /= X.col(j).norm();

    for (int i = 0; i < 3; ++i) {
        Matrix X_before = X;
        Matrix Y_before = Y;
        bpl::rri_step_modified(M, X, Y, i, 1e-3);
        CHECK(std::abs(X.col(i).norm() - 1.0) <= 1e-12);
        CHECK((X.col(i).array() >= 0.0).all());
        CHECK((Y.col(i).array() >= 0.0).all());

        // x-step descends the prox-linear model (L = ||y||^2 here, identity order)
        Matrix Xx = X_before;
        Xx.col(i) = X.col(i);
        CHECK(nmf_objective(M, Xx, Y_before) <=
              nmf_objective(M, X_before, Y_before) + 1e-12 * (1.0 + nmf_objective(M, X_before, Y_before)));

        // y-step equals nonnegative least squares for the column
        Matrix R = M;
        for (int j = 0; j < 3; ++j)
            if (j != i) R -= X.col(j) * Y.col(j).transpose();
        const Vector x = X.col(i);
        auto f = [&](const Vector& yv) { return 0.5 * (x * yv.transpose() - R).squaredNorm(); };
        auto grad = [&](const Vector& yv) -> Vector { return (x * yv.transpose() - R).transpose() * x; };
        auto project = [](const Vector& v) -> Vector { return v.cwiseMax(0.0); };
        const double refined = oracle::refine_projected_gradient(f, grad, project, Y.col(i), 0.5, 800);
        CHECK(f(Y.col(i)) <= refined + 1e-8);
    }
}

TEST_CASE("zero columns raise ZeroColumn for the original method") {
    Matrix M = Matrix::Ones(3, 3);
    Matrix X = Matrix::Ones(3, 2);
    Matrix Y = Matrix::Ones(3, 2);
    Y.col(0).setZero();
    CHECK_THROWS_AS(bpl::rri_step_original(M, X, Y, 0), bpl::ZeroColumn);
}

TEST_CASE("solver at an exact factorization stays there") {
    auto sw = bpl::gen_swimmer();
    const Matrix& M = sw.M;
    Matrix Y0 = sw.Y_witness;
    Matrix X0 = sw.X_witness;

    auto rri = bpl::solve_nmf_from(M, X0, Y0, NmfVariant::rri, 1e-3, 3, 1);
    CHECK(rri.rel_error.back() <= 1e-12);

    // unit-column scaling of the same factorization for the modified method
    Matrix Xn = X0;
    Matrix Yn = Y0;
    for (int j = 0; j < Xn.cols(); ++j) {
        const double norm = Xn.col(j).norm();
        Xn.col(j) /= norm;
        Yn.col(j) *= norm;
    }
    auto mod = bpl::solve_nmf_from(M, Xn, Yn, NmfVariant::modified_cyclic, 1e-3, 3, 1);
    CHECK(mod.rel_error.back() <= 1e-12);
    CHECK(mod.success);
}

TEST_CASE("solver trace: monotone objective, unit columns, boundedness witness") {
    bpl::Rng rng(21);
    Matrix M = random_nonneg(rng, 20, 15);
    const int p = 3;
    for (auto variant : {NmfVariant::rri, NmfVariant::modified_cyclic, NmfVariant::modified_shuffled}) {
        auto res = bpl::solve_nmf(M, p, variant, 1e-3, 25, 77);
        double prev = res.trace.initial_objective;
        for (double f : res.trace.objective) {
            CHECK(f <= prev + 1e-12 * (1.0 + std::abs(prev)));
            prev = f;
        }
        if (variant != NmfVariant::rri) {
            for (int j = 0; j < p; ++j) CHECK(std::abs(res.X.col(j).norm() - 1.0) <= 1e-12);
            // Y entries bounded by a*sqrt(m), a the largest entry of E + M = X Y^T
            const double a = (res.X * res.Y.transpose()).maxCoeff();
            CHECK(res.Y.maxCoeff() <= a * std::sqrt(static_cast<double>(M.rows())) + 1e-9);
        }
        // count identity and essentially cyclic window over pairs
        const int s = 2 * p;
        for (std::size_t k = 0; k < res.trace.iterations(); ++k) {
            int total = 0;
            for (int d : res.trace.update_counts[k]) total += d;
            CHECK(total == static_cast<int>(k + 1));
        }
        for (std::size_t start = 0; start + s <= res.trace.iterations(); start += s) {
            std::vector<bool> seen(s, false);
            for (int t = 0; t < s; ++t) seen[res.trace.block_index[start + t]] = true;
            CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
        }
    }
}

TEST_CASE("seeded runs are bit-identical") {
    bpl::Rng rng(31);
    Matrix M = random_nonneg(rng, 12, 9);
    auto a = bpl::solve_nmf(M, 3, NmfVariant::modified_shuffled, 1e-3, 15, 99);
    auto b = bpl::solve_nmf(M, 3, NmfVariant::modified_shuffled, 1e-3, 15, 99);
    CHECK((a.X - b.X).norm() == 0.0);
    CHECK((a.Y - b.Y).norm() == 0.0);
    REQUIRE(a.trace.iterations() == b.trace.iterations());
    for (std::size_t k = 0; k < a.trace.iterations(); ++k) {
        CHECK(a.trace.objective[k] == b.trace.objective[k]);
        CHECK(a.trace.block_index[k] == b.trace.block_index[k]);
    }
}

TEST_SUITE_END();
