#include "bpl/regression.hpp"

#include <cmath>

#include "bpl/errors.hpp"
#include "bpl/rng.hpp"

namespace bpl {

double RegressionInstance::objective(const Vector& beta) const {
    const double n = static_cast<double>(X.rows());
    double pen = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) pen += penalty_value(spec, beta[j]);
    return 0.5 / n * (X * beta - y).squaredNorm() + pen;
}

Vector RegressionInstance::destandardize(const Vector& beta, double& intercept) const {
    Vector raw = beta.cwiseQuotient(col_scale);
    intercept = y_mean - col_mean.dot(raw);
    return raw;
}

RegressionInstance standardize(const Matrix& X_raw, const Vector& y_raw, const PenaltySpec& spec) {
    spec.validate();
    const Eigen::Index n = X_raw.rows();
    const Eigen::Index p = X_raw.cols();
    if (y_raw.size() != n) throw std::invalid_argument("standardize: X rows must match y length");
    if (n < 2) throw std::invalid_argument("standardize: need at least two samples");
    if (!X_raw.allFinite() || !y_raw.allFinite())
        throw std::invalid_argument("standardize: non-finite entries in the data");

    RegressionInstance inst;
    inst.spec = spec;
    inst.y_mean = y_raw.mean();
    inst.y = y_raw.array() - inst.y_mean;
    inst.col_mean = X_raw.colwise().mean();
    inst.col_scale = Vector(p);
    inst.X = X_raw;
    for (Eigen::Index j = 0; j < p; ++j) {
        inst.X.col(j).array() -= inst.col_mean[j];
        const double second_moment = inst.X.col(j).squaredNorm() / static_cast<double>(n);
        if (second_moment <= 1e-24)
            throw DegenerateColumn("standardize: column " + std::to_string(j) + " has no variance");
        inst.col_scale[j] = std::sqrt(second_moment);
        inst.X.col(j) /= inst.col_scale[j];
    }
    return inst;
}

RegressionResult solve_penalized_regression(const RegressionInstance& instance, CoordOrder order,
                                            int max_cycles, std::uint64_t seed, double tol_obj) {
    instance.spec.validate();
    const Eigen::Index n = instance.X.rows();
    const Eigen::Index p = instance.X.cols();
    const double nd = static_cast<double>(n);

    Vector weights(p);  // ||x_j||^2 / n, == 1 for standardized designs
    for (Eigen::Index j = 0; j < p; ++j) weights[j] = instance.X.col(j).squaredNorm() / nd;

    RegressionResult result;
    Vector beta = Vector::Zero(p);
    Vector r = -instance.y;  // X beta - y
    double pen_sum = 0.0;
    double F = 0.5 / nd * r.squaredNorm();
    result.trace.initial_objective = F;

    Rng shuffle_rng(seed);
    std::vector<int> idx(p);
    for (Eigen::Index j = 0; j < p; ++j) idx[j] = static_cast<int>(j);
    std::vector<int> counts(p, 0);

    double prev_cycle_F = F;
    for (int cycle = 1; cycle <= max_cycles; ++cycle) {
        if (order == CoordOrder::shuffled) shuffle_rng.shuffle(idx);
        for (int j : idx) {
            const double w = weights[j];
            const double g = instance.X.col(j).dot(r) / nd;
            const double z = beta[j] - g / w;
            const double b_new = penalty_prox(instance.spec, z, w);
            const double delta = b_new - beta[j];
            if (delta != 0.0) {
                r += instance.X.col(j) * delta;
                pen_sum += penalty_value(instance.spec, b_new) - penalty_value(instance.spec, beta[j]);
                beta[j] = b_new;
            }
            F = 0.5 / nd * r.squaredNorm() + pen_sum;
            counts[j] += 1;
            result.trace.record(j, F, std::abs(delta), 1.0 / w, 0.0, w, std::abs(delta) * w, counts);
        }
        result.cycles = cycle;
        if (std::abs(F - prev_cycle_F) <= tol_obj * (1.0 + std::abs(prev_cycle_F))) break;
        prev_cycle_F = F;
    }
    result.beta = std::move(beta);
    return result;
}

double coordinate_certificate(const RegressionInstance& instance, const Vector& beta) {
    const Eigen::Index p = instance.X.cols();
    const double nd = static_cast<double>(instance.X.rows());
    const Vector r = instance.X * beta - instance.y;
    const double F = instance.objective(beta);
    double best_improvement = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double w = instance.X.col(j).squaredNorm() / nd;
        const double g = instance.X.col(j).dot(r) / nd;
        const double z = beta[j] - g / w;
        const double b_new = penalty_prox(instance.spec, z, w);
        if (b_new == beta[j]) continue;
        Vector trial = beta;
        trial[j] = b_new;
        best_improvement = std::max(best_improvement, F - instance.objective(trial));
    }
    return best_improvement;
}

}  // namespace bpl
