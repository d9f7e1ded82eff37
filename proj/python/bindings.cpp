#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bpl/campaign.hpp"
#include "bpl/core.hpp"
#include "bpl/datagen.hpp"
#include "bpl/lasso.hpp"
#include "bpl/nmf.hpp"
#include "bpl/ntd.hpp"
#include "bpl/prox.hpp"
#include "bpl/regression.hpp"

namespace py = pybind11;
using namespace bpl;

namespace {

PenaltySpec make_spec(const std::string& kind, double lambda, double gamma) {
    if (kind == "l1") return PenaltySpec::l1(lambda);
    if (kind == "mcp") return PenaltySpec::mcp(lambda, gamma);
    if (kind == "scad") return PenaltySpec::scad(lambda, gamma);
    if (kind == "indicator_nonneg") return PenaltySpec::nonneg();
    throw std::invalid_argument("unknown penalty kind: " + kind);
}

DenseTensor tensor_from_numpy(const py::array_t<double, py::array::f_style | py::array::forcecast>& arr) {
    std::vector<int> dims(arr.ndim());
    for (int i = 0; i < arr.ndim(); ++i) dims[i] = static_cast<int>(arr.shape(i));
    Vector data = Eigen::Map<const Vector>(arr.data(), arr.size());
    return DenseTensor(std::move(dims), std::move(data));
}

py::array_t<double> tensor_to_numpy(const DenseTensor& T) {
    std::vector<py::ssize_t> shape(T.dims().begin(), T.dims().end());
    std::vector<py::ssize_t> strides(T.order());
    py::ssize_t stride = sizeof(double);
    for (int i = 0; i < T.order(); ++i) {
        strides[i] = stride;
        stride *= T.dims()[i];
    }
    return py::array_t<double>(shape, strides, T.data());
}

py::dict trace_to_dict(const Trace& tr) {
    py::dict d;
    d["initial_objective"] = tr.initial_objective;
    d["objective"] = py::array_t<double>(tr.objective.size(), tr.objective.data());
    d["block"] = py::array_t<int>(tr.block_index.size(), tr.block_index.data());
    d["step_norm"] = py::array_t<double>(tr.step_norm.size(), tr.step_norm.data());
    d["alpha"] = py::array_t<double>(tr.alpha_used.size(), tr.alpha_used.data());
    d["omega"] = py::array_t<double>(tr.omega_used.size(), tr.omega_used.data());
    d["residual"] = py::array_t<double>(tr.residual.size(), tr.residual.data());
    return d;
}

}  // namespace

PYBIND11_MODULE(_bplopt, m) {
    m.doc() = "block prox-linear optimization toolkit";

    // --- proximal operators ---
    m.def(
        "penalty_value",
        [](const std::string& kind, double lambda, double gamma, double theta) {
            return penalty_value(make_spec(kind, lambda, gamma), theta);
        },
        py::arg("kind"), py::arg("lam"), py::arg("gamma"), py::arg("theta"));
    m.def(
        "penalty_prox",
        [](const std::string& kind, double lambda, double gamma, double z, double weight) {
            return penalty_prox(make_spec(kind, lambda, gamma), z, weight);
        },
        py::arg("kind"), py::arg("lam"), py::arg("gamma"), py::arg("z"), py::arg("weight") = 1.0);
    m.def("project_nonneg", [](const Vector& v) { return project_nonneg(v); }, py::arg("v"));
    m.def("sphere_nonneg_argmax", [](const Vector& c) { return sphere_nonneg_argmax(c); },
          py::arg("c"));
    m.def("soft_threshold", [](const Vector& v, double t) { return soft_threshold(v, t); },
          py::arg("v"), py::arg("t"));

    // --- fista / lasso ---
    m.def(
        "fista_weight_sequence",
        [](int k_max) {
            auto w = fista_weight_sequence(k_max);
            return py::make_tuple(py::array_t<double>(w.t.size(), w.t.data()),
                                  py::array_t<double>(w.omega.size(), w.omega.data()));
        },
        py::arg("k_max"));
    m.def(
        "solve_lasso",
        [](const Matrix& A, const Vector& b, double lambda, const std::string& variant,
           int max_iter) {
            LassoVariant v;
            if (variant == "fista") v = LassoVariant::fista;
            else if (variant == "restart") v = LassoVariant::restart;
            else if (variant == "backtracked_omega") v = LassoVariant::backtracked_omega;
            else throw std::invalid_argument("unknown lasso variant: " + variant);
            auto inst = LassoInstance::make(A, b, lambda);
            auto res = solve_lasso(inst, v, max_iter);
            py::dict d;
            d["x"] = res.x;
            d["L_f"] = inst.L_f;
            d["trace"] = trace_to_dict(res.trace);
            return d;
        },
        py::arg("A"), py::arg("b"), py::arg("lam") = 1.0, py::arg("variant") = "fista",
        py::arg("max_iter") = 5000);

    // --- penalized regression ---
    m.def(
        "solve_regression",
        [](const Matrix& X, const Vector& y, const std::string& penalty, double lambda,
           double gamma, const std::string& order, int max_cycles, std::uint64_t seed) {
            auto inst = standardize(X, y, make_spec(penalty, lambda, gamma));
            auto ord = order == "shuffled" ? CoordOrder::shuffled : CoordOrder::cyclic;
            auto res = solve_penalized_regression(inst, ord, max_cycles, seed);
            double intercept = 0.0;
            Vector raw = inst.destandardize(res.beta, intercept);
            py::dict d;
            d["beta"] = res.beta;
            d["beta_raw"] = raw;
            d["intercept"] = intercept;
            d["certificate"] = coordinate_certificate(inst, res.beta);
            d["cycles"] = res.cycles;
            d["trace"] = trace_to_dict(res.trace);
            return d;
        },
        py::arg("X"), py::arg("y"), py::arg("penalty") = "mcp", py::arg("lam") = 0.1,
        py::arg("gamma") = 3.0, py::arg("order") = "cyclic", py::arg("max_cycles") = 200,
        py::arg("seed") = 0);

    // --- nmf ---
    m.def(
        "solve_nmf",
        [](const Matrix& M, int rank, const std::string& variant, double L_min, int max_cycles,
           std::uint64_t seed, double success_tol) {
            NmfVariant v;
            if (variant == "rri") v = NmfVariant::rri;
            else if (variant == "modified_cyclic") v = NmfVariant::modified_cyclic;
            else if (variant == "modified_shuffled") v = NmfVariant::modified_shuffled;
            else throw std::invalid_argument("unknown nmf variant: " + variant);
            auto res = solve_nmf(M, rank, v, L_min, max_cycles, seed, success_tol);
            py::dict d;
            d["X"] = res.X;
            d["Y"] = res.Y;
            d["rel_error"] = py::array_t<double>(res.rel_error.size(), res.rel_error.data());
            d["success"] = res.success;
            d["trace"] = trace_to_dict(res.trace);
            return d;
        },
        py::arg("M"), py::arg("rank"), py::arg("variant") = "modified_shuffled",
        py::arg("L_min") = 1e-3, py::arg("max_cycles") = 100, py::arg("seed") = 0,
        py::arg("success_tol") = 1e-3);

    // --- ntd ---
    m.def("mode_product",
          [](const py::array_t<double, py::array::f_style | py::array::forcecast>& T,
             const Matrix& A, int mode) { return tensor_to_numpy(mode_product(tensor_from_numpy(T), A, mode)); },
          py::arg("T"), py::arg("A"), py::arg("mode"));
    m.def(
        "solve_ntd",
        [](const py::array_t<double, py::array::f_style | py::array::forcecast>& T,
           const std::vector<int>& core_dims, const std::string& variant, int max_cycles,
           std::uint64_t seed, double L_min, bool monotone, double success_tol) {
            NtdVariant v;
            if (variant == "bpg") v = NtdVariant::bpg;
            else if (variant == "bpg_noextrap") v = NtdVariant::bpg_noextrap;
            else if (variant == "frequent_core_cyclic") v = NtdVariant::frequent_core_cyclic;
            else if (variant == "frequent_core_shuffled") v = NtdVariant::frequent_core_shuffled;
            else throw std::invalid_argument("unknown ntd variant: " + variant);
            NtdOptions opts;
            opts.L_min = L_min;
            opts.monotone = monotone;
            opts.success_tol = success_tol;
            auto res = solve_ntd(tensor_from_numpy(T), core_dims, v, max_cycles, seed, opts);
            py::dict d;
            d["core"] = tensor_to_numpy(res.core);
            py::list factors;
            for (const auto& A : res.factors) factors.append(py::cast(A));
            d["factors"] = factors;
            d["rel_error"] = py::array_t<double>(res.rel_error.size(), res.rel_error.data());
            d["success"] = res.success;
            d["cycles_to_success"] = res.cycles_to_success;
            return d;
        },
        py::arg("T"), py::arg("core_dims"), py::arg("variant") = "bpg", py::arg("max_cycles") = 500,
        py::arg("seed") = 0, py::arg("L_min") = 1e-3, py::arg("monotone") = false,
        py::arg("success_tol") = 1e-3);

    // --- data generators ---
    m.def(
        "gen_lasso",
        [](int m, int n, int sparsity, double noise_sigma, std::uint64_t seed, double lambda) {
            auto data = gen_lasso(m, n, sparsity, noise_sigma, seed, lambda);
            py::dict d;
            d["A"] = data.instance.A;
            d["b"] = data.instance.b;
            d["x_true"] = data.x_true;
            d["L_f"] = data.instance.L_f;
            return d;
        },
        py::arg("m") = 100, py::arg("n") = 2000, py::arg("sparsity") = 20,
        py::arg("noise_sigma") = 0.1, py::arg("seed") = 0, py::arg("lam") = 1.0);
    m.def("gen_swimmer", []() {
        auto sw = gen_swimmer();
        py::dict d;
        d["M"] = sw.M;
        d["X_witness"] = sw.X_witness;
        d["Y_witness"] = sw.Y_witness;
        return d;
    });
    m.def(
        "gen_random_ntd",
        [](const std::vector<int>& dims, const std::vector<int>& core_dims, std::uint64_t seed) {
            auto data = gen_random_ntd(dims, core_dims, seed);
            py::dict d;
            d["tensor"] = tensor_to_numpy(data.tensor);
            d["core"] = tensor_to_numpy(data.core);
            py::list factors;
            for (const auto& A : data.factors) factors.append(py::cast(A));
            d["factors"] = factors;
            return d;
        },
        py::arg("dims"), py::arg("core_dims"), py::arg("seed") = 0);
}
