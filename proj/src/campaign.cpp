#include "bpl/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "bpl/datagen.hpp"
#include "bpl/errors.hpp"
#include "bpl/nmf.hpp"
#include "bpl/ntd.hpp"
#include "bpl/regression.hpp"
#include "bpl/rng.hpp"

namespace bpl {

ExperimentId experiment_from_name(const std::string& name) {
    if (name == "lasso_fig1") return ExperimentId::lasso_fig1;
    if (name == "nmf_swimmer") return ExperimentId::nmf_swimmer;
    if (name == "ntd_swimmer") return ExperimentId::ntd_swimmer;
    if (name == "ntd_random") return ExperimentId::ntd_random;
    if (name == "regression") return ExperimentId::regression;
    throw std::invalid_argument("unknown experiment: " + name);
}

std::string experiment_name(ExperimentId id) {
    switch (id) {
        case ExperimentId::lasso_fig1: return "lasso_fig1";
        case ExperimentId::nmf_swimmer: return "nmf_swimmer";
        case ExperimentId::ntd_swimmer: return "ntd_swimmer";
        case ExperimentId::ntd_random: return "ntd_random";
        case ExperimentId::regression: return "regression";
    }
    return "";
}

std::vector<std::string> experiment_variants(ExperimentId id) {
    switch (id) {
        case ExperimentId::lasso_fig1: return {"fista", "restart", "backtracked_omega"};
        case ExperimentId::nmf_swimmer: return {"rri", "modified_cyclic", "modified_shuffled"};
        case ExperimentId::ntd_swimmer: return {"frequent_core_cyclic", "frequent_core_shuffled"};
        case ExperimentId::ntd_random: return {"bpg_noextrap", "bpg"};
        case ExperimentId::regression: return {"cyclic", "shuffled"};
    }
    return {};
}

namespace {

std::pair<std::string, std::string> contingency_pair(ExperimentId id) {
    switch (id) {
        case ExperimentId::lasso_fig1: return {"fista", "backtracked_omega"};
        case ExperimentId::nmf_swimmer: return {"modified_cyclic", "modified_shuffled"};
        case ExperimentId::ntd_swimmer: return {"frequent_core_cyclic", "frequent_core_shuffled"};
        case ExperimentId::ntd_random: return {"bpg_noextrap", "bpg"};
        case ExperimentId::regression: return {"cyclic", "shuffled"};
    }
    return {};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t s = seed + tag * 0x9E3779B97F4A7C15ULL;
    return splitmix64_next(s);
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

struct CellOutput {
    CellResult cell;
    ConvergenceTrace convergence;
    Trace trace;
};

// every variant of a run consumes the same instance and starting point,
// both pure functions of the run seed
CellOutput run_one_cell(const Campaign& c, const std::string& variant, int run,
                        std::uint64_t seed) {
    CellOutput out;
    out.cell.variant = variant;
    out.cell.run = run;
    out.cell.seed = seed;
    out.convergence.variant = variant;
    out.convergence.run = run;

    switch (c.experiment) {
        case ExperimentId::lasso_fig1: {
            LassoData data = gen_lasso(100, 2000, 20, 0.1, seed);
            LassoVariant v = variant == "fista" ? LassoVariant::fista
                             : variant == "restart" ? LassoVariant::restart
                                                    : LassoVariant::backtracked_omega;
            LassoResult res = solve_lasso(data.instance, v, c.max_cycles);
            out.cell.cycles = static_cast<int>(res.trace.iterations());
            out.cell.final_error = res.trace.objective.back();  // rewritten to F - F_best later
            out.convergence.objective = res.trace.objective;
            out.convergence.rel_error = res.trace.residual;
            out.trace = std::move(res.trace);
            break;
        }
        case ExperimentId::regression: {
            Rng rng(seed);
            const int n = 100, p = 20, k = 5;
            Matrix X(n, p);
            for (Eigen::Index t = 0; t < X.size(); ++t) X.data()[t] = rng.next_normal();
            Vector beta_true = Vector::Zero(p);
            std::vector<int> pos(p);
            for (int j = 0; j < p; ++j) pos[j] = j;
            rng.shuffle(pos);
            for (int t = 0; t < k; ++t) beta_true[pos[t]] = rng.next_normal();
            Vector y = X * beta_true;
            for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += 0.5 * rng.next_normal();
            RegressionInstance inst = standardize(X, y, PenaltySpec::mcp(0.1, 3.0));
            CoordOrder order = variant == "cyclic" ? CoordOrder::cyclic : CoordOrder::shuffled;
            RegressionResult res = solve_penalized_regression(inst, order, c.max_cycles,
                                                              derive_seed(seed, 2));
            out.cell.cycles = res.cycles;
            out.cell.final_error = coordinate_certificate(inst, res.beta);
            out.cell.success = out.cell.final_error <= c.success_tol;
            out.convergence.objective = res.trace.objective;
            out.convergence.rel_error = res.trace.residual;
            out.trace = std::move(res.trace);
            break;
        }
        case ExperimentId::nmf_swimmer: {
            SwimmerData sw = gen_swimmer();
            const int rank = 17;
            Rng rng(seed);
            Matrix X0(sw.M.rows(), rank), Y0(sw.M.cols(), rank);
            for (Eigen::Index t = 0; t < X0.size(); ++t) X0.data()[t] = rng.next_double();
            for (Eigen::Index t = 0; t < Y0.size(); ++t) Y0.data()[t] = rng.next_double();
            NmfVariant v = variant == "rri" ? NmfVariant::rri
                           : variant == "modified_cyclic" ? NmfVariant::modified_cyclic
                                                          : NmfVariant::modified_shuffled;
            NmfResult res = solve_nmf_from(sw.M, std::move(X0), std::move(Y0), v, 1e-3,
                                           c.max_cycles, derive_seed(seed, 3), c.success_tol);
            out.cell.cycles = res.cycles;
            out.cell.final_error = res.rel_error.back();
            out.cell.success = res.success;
            for (int cyc = 0; cyc < res.cycles; ++cyc) {
                out.convergence.rel_error.push_back(res.rel_error[cyc]);
                out.convergence.objective.push_back(0.5 * res.rel_error[cyc] * res.rel_error[cyc] *
                                                    sw.M.squaredNorm());
            }
            out.trace = std::move(res.trace);
            break;
        }
        case ExperimentId::ntd_random:
        case ExperimentId::ntd_swimmer: {
            DenseTensor M;
            std::vector<int> core_dims;
            if (c.experiment == ExperimentId::ntd_random) {
                NtdData data = gen_random_ntd({20, 20, 20}, {3, 3, 3}, seed);
                M = std::move(data.tensor);
                core_dims = {3, 3, 3};
            } else {
                SwimmerData sw = gen_swimmer();
                Vector flat = Eigen::Map<const Vector>(sw.M.data(), sw.M.size());
                M = DenseTensor({32, 32, 256}, std::move(flat));
                core_dims = {24, 17, 16};
            }
            Rng rng(derive_seed(seed, 4));
            DenseTensor C0(core_dims);
            for (std::int64_t t = 0; t < C0.size(); ++t) C0.data()[t] = std::abs(rng.next_normal());
            std::vector<Matrix> A0(M.order());
            for (int i = 0; i < M.order(); ++i) {
                A0[i].resize(M.dims()[i], core_dims[i]);
                for (Eigen::Index t = 0; t < A0[i].size(); ++t)
                    A0[i].data()[t] = std::abs(rng.next_normal());
            }
            NtdVariant v = variant == "bpg" ? NtdVariant::bpg
                           : variant == "bpg_noextrap" ? NtdVariant::bpg_noextrap
                           : variant == "frequent_core_cyclic" ? NtdVariant::frequent_core_cyclic
                                                               : NtdVariant::frequent_core_shuffled;
            NtdOptions opts;
            opts.success_tol = c.success_tol;
            NtdResult res = solve_ntd_from(M, std::move(C0), std::move(A0), v, c.max_cycles,
                                           derive_seed(seed, 5), opts);
            out.cell.cycles = res.cycles;
            out.cell.cycles_to_success = res.cycles_to_success;
            out.cell.final_error = res.rel_error.back();
            out.cell.success = res.success;
            out.convergence.rel_error = res.rel_error;
            const double msq = 0.5 * M.vec().squaredNorm();
            for (double r : res.rel_error) out.convergence.objective.push_back(r * r * msq);
            out.trace = std::move(res.trace);
            break;
        }
    }
    return out;
}

}  // namespace

Campaign Campaign::defaults(ExperimentId id, bool full_size) {
    Campaign c;
    c.experiment = id;
    switch (id) {
        case ExperimentId::lasso_fig1:
            c.n_runs = 1;
            c.max_cycles = 5000;
            c.success_tol = 1e-6;
            break;
        case ExperimentId::nmf_swimmer:
            c.n_runs = full_size ? 50 : 20;
            c.max_cycles = 100;
            c.success_tol = 1e-3;
            break;
        case ExperimentId::ntd_swimmer:
            c.n_runs = full_size ? 50 : 10;
            c.max_cycles = full_size ? 500 : 200;
            c.success_tol = 1e-3;
            break;
        case ExperimentId::ntd_random:
            c.n_runs = full_size ? 50 : 10;
            c.max_cycles = 1500;
            c.success_tol = 1e-3;
            break;
        case ExperimentId::regression:
            c.n_runs = full_size ? 50 : 20;
            c.max_cycles = 200;
            c.success_tol = 1e-10;
            break;
    }
    return c;
}

CampaignSummary summarize_cells(std::vector<CellResult> cells, const std::string& pair_a,
                                const std::string& pair_b) {
    CampaignSummary s;
    s.pair_a = pair_a;
    s.pair_b = pair_b;
    std::vector<std::string> variants;
    for (const auto& c : cells)
        if (std::find(variants.begin(), variants.end(), c.variant) == variants.end())
            variants.push_back(c.variant);
    for (const auto& v : variants) {
        VariantSummary vs;
        vs.variant = v;
        std::vector<double> errs, times;
        for (const auto& c : cells) {
            if (c.variant != v) continue;
            vs.n_runs += 1;
            vs.successes += c.success ? 1 : 0;
            if (c.error.empty()) {  // failed cells carry no meaningful error value
                errs.push_back(c.final_error);
                times.push_back(c.time_s);
            }
        }
        vs.median_final_error = median(errs);
        vs.median_time_s = median(times);
        s.variants.push_back(vs);
    }
    // contingency over runs present for both pair variants
    std::vector<int> runs;
    for (const auto& c : cells)
        if (c.variant == pair_a) runs.push_back(c.run);
    for (int run : runs) {
        const CellResult* a = nullptr;
        const CellResult* b = nullptr;
        for (const auto& c : cells) {
            if (c.run != run) continue;
            if (c.variant == pair_a) a = &c;
            if (c.variant == pair_b) b = &c;
        }
        if (!a || !b) continue;
        if (a->success && b->success) s.both_succeed++;
        else if (a->success) s.only_a++;
        else if (b->success) s.only_b++;
        else s.both_fail++;
    }
    s.cells = std::move(cells);
    return s;
}

void emit_convergence_csv(const std::vector<ConvergenceTrace>& traces, const std::string& path) {
    if (traces.empty()) throw std::invalid_argument("emit_convergence_csv: no traces");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "variant,run,iter,objective,rel_error,time_s\n";
    for (const auto& t : traces) {
        for (std::size_t k = 0; k < t.objective.size(); ++k) {
            const double rel = k < t.rel_error.size() ? t.rel_error[k] : 0.0;
            out << t.variant << "," << t.run << "," << (k + 1) << ","
                << format_double(t.objective[k]) << "," << format_double(rel) << ","
                << format_double(t.time_s) << "\n";
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

namespace {

void write_cells_csv(const std::string& path, const std::vector<CellResult>& cells) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "variant,run,seed,cycles,cycles_to_success,final_error,success,time_s,error\n";
    for (const auto& c : cells) {
        out << c.variant << "," << c.run << "," << c.seed << "," << c.cycles << ","
            << c.cycles_to_success << "," << format_double(c.final_error) << ","
            << (c.success ? 1 : 0) << "," << format_double(c.time_s) << "," << c.error << "\n";
    }
}

void write_summary_csv(const std::string& path, const CampaignSummary& s) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "variant,successes,n_runs,median_final_error,median_time_s\n";
    for (const auto& v : s.variants)
        out << v.variant << "," << v.successes << "," << v.n_runs << ","
            << format_double(v.median_final_error) << "," << format_double(v.median_time_s) << "\n";
}

void write_contingency_csv(const std::string& path, const CampaignSummary& s) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "pair_a,pair_b,both_succeed,only_a,only_b,both_fail\n";
    out << s.pair_a << "," << s.pair_b << "," << s.both_succeed << "," << s.only_a << ","
        << s.only_b << "," << s.both_fail << "\n";
}

}  // namespace

std::vector<CellResult> read_cells_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty cells file: " + path);
    std::vector<CellResult> cells;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        CellResult c;
        std::getline(ss, c.variant, ',');
        std::getline(ss, tok, ',');
        c.run = std::stoi(tok);
        std::getline(ss, tok, ',');
        c.seed = std::stoull(tok);
        std::getline(ss, tok, ',');
        c.cycles = std::stoi(tok);
        std::getline(ss, tok, ',');
        c.cycles_to_success = std::stoi(tok);
        std::getline(ss, tok, ',');
        c.final_error = std::stod(tok);
        std::getline(ss, tok, ',');
        c.success = tok == "1";
        std::getline(ss, tok, ',');
        c.time_s = std::stod(tok);
        std::getline(ss, c.error);
        cells.push_back(std::move(c));
    }
    return cells;
}

CampaignSummary run_campaign(const Campaign& campaign) {
    if (campaign.n_runs < 1) throw std::invalid_argument("campaign: n_runs must be >= 1");
    std::filesystem::create_directories(campaign.out_dir);
    const auto variants = experiment_variants(campaign.experiment);

    struct CellSpec {
        std::string variant;
        int run;
        std::uint64_t seed;
    };
    std::vector<CellSpec> specs;
    for (int run = 0; run < campaign.n_runs; ++run)
        for (const auto& v : variants)
            specs.push_back({v, run, campaign.base_seed + static_cast<std::uint64_t>(run)});

    std::vector<CellOutput> outputs(specs.size());
    auto work = [&](std::size_t idx) {
        const auto& spec = specs[idx];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            outputs[idx] = run_one_cell(campaign, spec.variant, spec.run, spec.seed);
        } catch (const std::exception& e) {
            outputs[idx].cell.variant = spec.variant;
            outputs[idx].cell.run = spec.run;
            outputs[idx].cell.seed = spec.seed;
            outputs[idx].cell.error = e.what();
            outputs[idx].cell.final_error = std::numeric_limits<double>::quiet_NaN();
            outputs[idx].convergence.variant = spec.variant;
            outputs[idx].convergence.run = spec.run;
        }
        const auto t1 = std::chrono::steady_clock::now();
        const double secs = std::chrono::duration<double>(t1 - t0).count();
        outputs[idx].cell.time_s = campaign.serial ? 0.0 : secs;
        outputs[idx].convergence.time_s = outputs[idx].cell.time_s;
    };

    if (campaign.serial) {
        for (std::size_t i = 0; i < specs.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        const unsigned n_workers =
            std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                               static_cast<unsigned>(specs.size()));
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < n_workers; ++w)
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < specs.size(); i = next.fetch_add(1))
                    work(i);
            });
        for (auto& t : workers) t.join();
    }

    // lasso success is relative to the best final objective within the run
    if (campaign.experiment == ExperimentId::lasso_fig1) {
        for (int run = 0; run < campaign.n_runs; ++run) {
            double best = std::numeric_limits<double>::infinity();
            for (auto& o : outputs)
                if (o.cell.run == run && o.cell.error.empty()) best = std::min(best, o.cell.final_error);
            for (auto& o : outputs) {
                if (o.cell.run != run || !o.cell.error.empty()) continue;
                o.cell.final_error -= best;
                o.cell.success = o.cell.final_error <= campaign.success_tol;
            }
        }
    }

    std::vector<CellResult> cells;
    std::vector<ConvergenceTrace> traces;
    for (auto& o : outputs) {
        if (o.cell.error.empty() && o.trace.iterations() > 0) {
            const std::string path = campaign.out_dir + "/trace_" + o.cell.variant + "_run" +
                                     std::to_string(o.cell.run) + ".csv";
            o.trace.write_csv(path);
        }
        cells.push_back(o.cell);
        if (!o.convergence.objective.empty()) traces.push_back(std::move(o.convergence));
    }

    const auto [pa, pb] = contingency_pair(campaign.experiment);
    CampaignSummary summary = summarize_cells(std::move(cells), pa, pb);
    write_cells_csv(campaign.out_dir + "/cells.csv", summary.cells);
    write_summary_csv(campaign.out_dir + "/summary.csv", summary);
    write_contingency_csv(campaign.out_dir + "/contingency.csv", summary);
    if (!traces.empty()) emit_convergence_csv(traces, campaign.out_dir + "/convergence.csv");
    return summary;
}

}  // namespace bpl
