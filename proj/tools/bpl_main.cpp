// bpl: block prox-linear optimization toolkit command line.
// Verbs: gen (datasets), solve (single run), campaign (multi-run), report.
// Exit codes: 0 success, 1 solver error, 2 bad arguments, 3 I/O error.
#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "bpl/campaign.hpp"
#include "bpl/core.hpp"
#include "bpl/datagen.hpp"
#include "bpl/errors.hpp"
#include "bpl/nmf.hpp"
#include "bpl/ntd.hpp"
#include "bpl/regression.hpp"

namespace {

std::vector<int> parse_dims(const std::string& csv) {
    std::vector<int> dims;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) dims.push_back(std::stoi(tok));
    if (dims.empty()) throw std::invalid_argument("empty dimension list");
    return dims;
}

void ensure_dir(const std::string& dir) { std::filesystem::create_directories(dir); }

int run(int argc, char** argv) {
    CLI::App app{"block prox-linear optimization toolkit"};
    app.require_subcommand(1);

    // --config values act as defaults for seed / budget / tolerance flags, so
    // the file is read before the options are declared
    std::string config_path;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
    bpl::SolverConfig file_cfg;
    const bool have_cfg = !config_path.empty();
    if (have_cfg) file_cfg = bpl::load_config(config_path);
    const std::uint64_t seed_default = have_cfg ? file_cfg.seed : 0;
    auto cycles_default = [&](int verb_default) {
        return have_cfg ? file_cfg.max_cycles : verb_default;
    };
    app.add_option("--config", config_path, "key=value solver config file");

    // ---------------- gen ----------------
    auto* gen = app.add_subcommand("gen", "generate synthetic datasets");
    gen->require_subcommand(1);

    auto* gen_lasso_cmd = gen->add_subcommand("lasso", "random sparse regression instance");
    int gl_m = 100, gl_n = 2000, gl_sparsity = 20;
    double gl_sigma = 0.1, gl_lambda = 1.0;
    std::uint64_t gl_seed = seed_default;
    std::string gl_out = "out";
    gen_lasso_cmd->add_option("--m", gl_m, "rows");
    gen_lasso_cmd->add_option("--n", gl_n, "columns");
    gen_lasso_cmd->add_option("--sparsity", gl_sparsity, "nonzeros in the ground truth");
    gen_lasso_cmd->add_option("--sigma", gl_sigma, "noise standard deviation");
    gen_lasso_cmd->add_option("--lambda", gl_lambda, "l1 weight");
    gen_lasso_cmd->add_option("--seed", gl_seed, "rng seed");
    gen_lasso_cmd->add_option("--out", gl_out, "output directory");

    auto* gen_swimmer_cmd = gen->add_subcommand("swimmer", "procedural swimmer image matrix");
    std::string gs_out = "out";
    gen_swimmer_cmd->add_option("--out", gs_out, "output directory");

    auto* gen_ntd_cmd = gen->add_subcommand("ntd", "random nonnegative tucker instance");
    std::string gt_dims = "20,20,20", gt_core = "3,3,3", gt_out = "out";
    std::uint64_t gt_seed = seed_default;
    gen_ntd_cmd->add_option("--dims", gt_dims, "tensor dimensions, comma separated");
    gen_ntd_cmd->add_option("--core", gt_core, "core dimensions, comma separated");
    gen_ntd_cmd->add_option("--seed", gt_seed, "rng seed");
    gen_ntd_cmd->add_option("--out", gt_out, "output directory");

    // ---------------- solve ----------------
    auto* solve = app.add_subcommand("solve", "run one solver on stored data");
    solve->require_subcommand(1);

    auto* sv_lasso = solve->add_subcommand("lasso", "fista variants on a lasso instance");
    std::string la_A, la_b, la_variant = "fista", la_out = "out";
    double la_lambda = 1.0;
    int la_iters = cycles_default(5000);
    sv_lasso->add_option("--A", la_A, "design matrix file")->required();
    sv_lasso->add_option("--b", la_b, "observation file (column matrix)")->required();
    sv_lasso->add_option("--lambda", la_lambda, "l1 weight");
    sv_lasso->add_option("--variant", la_variant, "fista|restart|backtracked_omega");
    sv_lasso->add_option("--max-cycles", la_iters, "iteration budget");
    sv_lasso->add_option("--out", la_out, "output directory");

    auto* sv_reg = solve->add_subcommand("regression", "mcp/scad coordinate descent");
    std::string rg_X, rg_y, rg_penalty = "mcp", rg_order = "cyclic", rg_out = "out";
    double rg_lambda = 0.1, rg_gamma = 3.0;
    double rg_tol = have_cfg ? file_cfg.tol_obj : 1e-12;
    int rg_cycles = cycles_default(200);
    std::uint64_t rg_seed = seed_default;
    sv_reg->add_option("--X", rg_X, "raw design matrix file")->required();
    sv_reg->add_option("--y", rg_y, "raw response file (column matrix)")->required();
    sv_reg->add_option("--penalty", rg_penalty, "mcp|scad|l1");
    sv_reg->add_option("--lambda", rg_lambda, "penalty lambda");
    sv_reg->add_option("--pen-gamma", rg_gamma, "penalty gamma");
    sv_reg->add_option("--variant", rg_order, "cyclic|shuffled");
    sv_reg->add_option("--max-cycles", rg_cycles, "cycle budget");
    sv_reg->add_option("--tol", rg_tol, "relative objective change tolerance");
    sv_reg->add_option("--seed", rg_seed, "shuffle seed");
    sv_reg->add_option("--out", rg_out, "output directory");

    auto* sv_nmf = solve->add_subcommand("nmf", "rank-one residue iterations");
    std::string nm_M, nm_variant = "modified_shuffled", nm_out = "out";
    int nm_rank = 17, nm_cycles = cycles_default(100);
    double nm_lmin = 1e-3, nm_tol = 1e-3;
    std::uint64_t nm_seed = seed_default;
    sv_nmf->add_option("--M", nm_M, "nonnegative matrix file")->required();
    sv_nmf->add_option("--rank", nm_rank, "factorization rank");
    sv_nmf->add_option("--variant", nm_variant, "rri|modified_cyclic|modified_shuffled");
    sv_nmf->add_option("--L-min", nm_lmin, "lipschitz floor");
    sv_nmf->add_option("--max-cycles", nm_cycles, "cycle budget");
    sv_nmf->add_option("--tol", nm_tol, "success threshold on the relative error");
    sv_nmf->add_option("--seed", nm_seed, "start + shuffle seed");
    sv_nmf->add_option("--out", nm_out, "output directory");

    auto* sv_ntd = solve->add_subcommand("ntd", "nonnegative tucker decomposition");
    std::string nt_T, nt_core = "3,3,3", nt_variant = "bpg", nt_out = "out";
    int nt_cycles = cycles_default(500);
    double nt_lmin = 1e-3, nt_tol = 1e-3;
    bool nt_monotone = have_cfg ? file_cfg.extrap.monotone : false;
    std::uint64_t nt_seed = seed_default;
    sv_ntd->add_option("--T", nt_T, "nonnegative tensor file")->required();
    sv_ntd->add_option("--core", nt_core, "core dimensions, comma separated");
    sv_ntd->add_option("--variant", nt_variant,
                       "bpg|bpg_noextrap|frequent_core_cyclic|frequent_core_shuffled");
    sv_ntd->add_option("--L-min", nt_lmin, "lipschitz floor");
    sv_ntd->add_option("--max-cycles", nt_cycles, "cycle budget");
    sv_ntd->add_option("--tol", nt_tol, "success threshold on the relative error");
    sv_ntd->add_flag("--monotone", nt_monotone, "enforce a nonincreasing objective");
    sv_ntd->add_option("--seed", nt_seed, "start + shuffle seed");
    sv_ntd->add_option("--out", nt_out, "output directory");

    // ---------------- campaign ----------------
    auto* camp = app.add_subcommand("campaign", "multi-seed experiment harness");
    std::string cp_experiment = "nmf_swimmer", cp_out = "out";
    int cp_runs = -1, cp_cycles = -1;
    double cp_tol = -1.0;
    std::uint64_t cp_base_seed = 1;
    bool cp_serial = false, cp_full = false;
    camp->add_option("--experiment", cp_experiment,
                     "lasso_fig1|nmf_swimmer|ntd_swimmer|ntd_random|regression")
        ->required();
    camp->add_option("--runs", cp_runs, "number of seeded runs");
    camp->add_option("--base-seed", cp_base_seed, "run r uses base-seed + r");
    camp->add_option("--max-cycles", cp_cycles, "per-cell budget");
    camp->add_option("--tol", cp_tol, "success threshold");
    camp->add_option("--out", cp_out, "output directory");
    camp->add_flag("--serial", cp_serial, "sequential cells, byte-reproducible outputs");
    camp->add_flag("--full-size", cp_full, "full-scale campaign sizes");

    // ---------------- report ----------------
    auto* rep = app.add_subcommand("report", "summarize a stored campaign");
    std::string rp_in = "out";
    rep->add_option("--in", rp_in, "campaign output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);  // prints help text or the parse error
        return rc == 0 ? 0 : 2;
    }

    if (gen_lasso_cmd->parsed()) {
        ensure_dir(gl_out);
        auto data = bpl::gen_lasso(gl_m, gl_n, gl_sparsity, gl_sigma, gl_seed, gl_lambda);
        std::ostringstream echo;
        echo << "gen lasso --seed " << gl_seed << " --m " << gl_m << " --n " << gl_n
             << " --sparsity " << gl_sparsity << " --sigma " << gl_sigma << " --lambda "
             << gl_lambda;
        bpl::write_matrix(gl_out + "/A.txt", data.instance.A, echo.str());
        bpl::write_matrix(gl_out + "/b.txt", data.instance.b, echo.str());
        bpl::write_matrix(gl_out + "/x_true.txt", data.x_true, echo.str());
        std::cout << "wrote " << gl_out << "/{A,b,x_true}.txt  L_f=" << data.instance.L_f << "\n";
        return 0;
    }
    if (gen_swimmer_cmd->parsed()) {
        ensure_dir(gs_out);
        bpl::SwimmerSpec spec;
        auto sw = bpl::gen_swimmer(spec);
        std::ostringstream echo;
        echo << "gen swimmer --side " << spec.image_side << " torso " << spec.torso_width << "x"
             << spec.torso_len << " at (" << spec.torso_col << "," << spec.torso_row << ") limbs "
             << spec.n_limbs << "x" << spec.n_limb_positions << " len " << spec.limb_len
             << " intensity " << spec.intensity;
        bpl::write_matrix(gs_out + "/M.txt", sw.M, echo.str());
        bpl::write_matrix(gs_out + "/X_witness.txt", sw.X_witness, echo.str());
        bpl::write_matrix(gs_out + "/Y_witness.txt", sw.Y_witness, echo.str());
        std::cout << "wrote " << gs_out << "/M.txt (" << sw.M.rows() << "x" << sw.M.cols() << ")\n";
        return 0;
    }
    if (gen_ntd_cmd->parsed()) {
        ensure_dir(gt_out);
        auto dims = parse_dims(gt_dims);
        auto core = parse_dims(gt_core);
        auto data = bpl::gen_random_ntd(dims, core, gt_seed);
        std::ostringstream echo;
        echo << "gen ntd --seed " << gt_seed << " --dims " << gt_dims << " --core " << gt_core;
        bpl::write_tensor(gt_out + "/T.txt", data.tensor, echo.str());
        bpl::write_tensor(gt_out + "/core_true.txt", data.core, echo.str());
        for (std::size_t i = 0; i < data.factors.size(); ++i)
            bpl::write_matrix(gt_out + "/factor_true_" + std::to_string(i) + ".txt",
                              data.factors[i], echo.str());
        std::cout << "wrote " << gt_out << "/T.txt\n";
        return 0;
    }

    if (sv_lasso->parsed()) {
        ensure_dir(la_out);
        auto A = bpl::read_matrix(la_A);
        auto b = bpl::read_matrix(la_b);
        if (b.cols() != 1) throw std::invalid_argument("b must be a column matrix");
        auto instance = bpl::LassoInstance::make(std::move(A), b.col(0), la_lambda);
        bpl::LassoVariant v;
        if (la_variant == "fista") v = bpl::LassoVariant::fista;
        else if (la_variant == "restart") v = bpl::LassoVariant::restart;
        else if (la_variant == "backtracked_omega") v = bpl::LassoVariant::backtracked_omega;
        else throw std::invalid_argument("unknown lasso variant: " + la_variant);
        auto res = bpl::solve_lasso(instance, v, la_iters);
        bpl::write_matrix(la_out + "/x.txt", res.x, "solve lasso " + la_variant);
        res.trace.write_csv(la_out + "/trace.csv");
        std::cout << "final objective " << bpl::format_double(res.trace.objective.back()) << "\n";
        return 0;
    }
    if (sv_reg->parsed()) {
        ensure_dir(rg_out);
        auto X = bpl::read_matrix(rg_X);
        auto y = bpl::read_matrix(rg_y);
        if (y.cols() != 1) throw std::invalid_argument("y must be a column matrix");
        bpl::PenaltySpec spec;
        if (rg_penalty == "mcp") spec = bpl::PenaltySpec::mcp(rg_lambda, rg_gamma);
        else if (rg_penalty == "scad") spec = bpl::PenaltySpec::scad(rg_lambda, rg_gamma);
        else if (rg_penalty == "l1") spec = bpl::PenaltySpec::l1(rg_lambda);
        else throw std::invalid_argument("unknown penalty: " + rg_penalty);
        auto inst = bpl::standardize(X, y.col(0), spec);
        auto order = rg_order == "shuffled" ? bpl::CoordOrder::shuffled : bpl::CoordOrder::cyclic;
        auto res = bpl::solve_penalized_regression(inst, order, rg_cycles, rg_seed, rg_tol);
        double intercept = 0.0;
        bpl::Vector raw = inst.destandardize(res.beta, intercept);
        bpl::write_matrix(rg_out + "/beta.txt", res.beta, "standardized coefficients");
        bpl::write_matrix(rg_out + "/beta_raw.txt", raw, "raw-scale coefficients");
        res.trace.write_csv(rg_out + "/trace.csv");
        std::cout << "final objective " << bpl::format_double(res.trace.objective.back())
                  << " intercept " << bpl::format_double(intercept) << " certificate "
                  << bpl::format_double(bpl::coordinate_certificate(inst, res.beta)) << "\n";
        return 0;
    }
    if (sv_nmf->parsed()) {
        ensure_dir(nm_out);
        auto M = bpl::read_matrix(nm_M);
        bpl::NmfVariant v;
        if (nm_variant == "rri") v = bpl::NmfVariant::rri;
        else if (nm_variant == "modified_cyclic") v = bpl::NmfVariant::modified_cyclic;
        else if (nm_variant == "modified_shuffled") v = bpl::NmfVariant::modified_shuffled;
        else throw std::invalid_argument("unknown nmf variant: " + nm_variant);
        auto res = bpl::solve_nmf(M, nm_rank, v, nm_lmin, nm_cycles, nm_seed, nm_tol);
        bpl::write_matrix(nm_out + "/X.txt", res.X, "solve nmf " + nm_variant);
        bpl::write_matrix(nm_out + "/Y.txt", res.Y, "solve nmf " + nm_variant);
        res.trace.write_csv(nm_out + "/trace.csv");
        std::cout << "final relative error " << bpl::format_double(res.rel_error.back())
                  << (res.success ? " success" : " fail") << "\n";
        return 0;
    }
    if (sv_ntd->parsed()) {
        ensure_dir(nt_out);
        auto T = bpl::read_tensor(nt_T);
        auto core = parse_dims(nt_core);
        bpl::NtdVariant v;
        if (nt_variant == "bpg") v = bpl::NtdVariant::bpg;
        else if (nt_variant == "bpg_noextrap") v = bpl::NtdVariant::bpg_noextrap;
        else if (nt_variant == "frequent_core_cyclic") v = bpl::NtdVariant::frequent_core_cyclic;
        else if (nt_variant == "frequent_core_shuffled") v = bpl::NtdVariant::frequent_core_shuffled;
        else throw std::invalid_argument("unknown ntd variant: " + nt_variant);
        bpl::NtdOptions opts;
        opts.L_min = nt_lmin;
        opts.monotone = nt_monotone;
        opts.success_tol = nt_tol;
        auto res = bpl::solve_ntd(T, core, v, nt_cycles, nt_seed, opts);
        bpl::write_tensor(nt_out + "/core.txt", res.core, "solve ntd " + nt_variant);
        for (std::size_t i = 0; i < res.factors.size(); ++i)
            bpl::write_matrix(nt_out + "/factor_" + std::to_string(i) + ".txt", res.factors[i],
                              "solve ntd " + nt_variant);
        res.trace.write_csv(nt_out + "/trace.csv");
        std::cout << "final relative error " << bpl::format_double(res.rel_error.back())
                  << (res.success ? " success" : " fail") << "\n";
        return 0;
    }

    if (camp->parsed()) {
        bpl::Campaign c = bpl::Campaign::defaults(bpl::experiment_from_name(cp_experiment), cp_full);
        if (cp_runs > 0) c.n_runs = cp_runs;
        if (cp_cycles > 0) c.max_cycles = cp_cycles;
        if (cp_tol > 0.0) c.success_tol = cp_tol;
        c.base_seed = cp_base_seed;
        c.serial = cp_serial;
        c.out_dir = cp_out;
        auto summary = bpl::run_campaign(c);
        std::cout << "variant successes/n median_final_error median_time_s\n";
        for (const auto& v : summary.variants)
            std::cout << v.variant << " " << v.successes << "/" << v.n_runs << " "
                      << bpl::format_double(v.median_final_error) << " "
                      << bpl::format_double(v.median_time_s) << "\n";
        std::cout << "contingency " << summary.pair_a << " vs " << summary.pair_b << ": both "
                  << summary.both_succeed << ", only_a " << summary.only_a << ", only_b "
                  << summary.only_b << ", neither " << summary.both_fail << "\n";
        return 0;
    }
    if (rep->parsed()) {
        auto cells = bpl::read_cells_csv(rp_in + "/cells.csv");
        // the stored contingency header carries the pair
        std::ifstream cont(rp_in + "/contingency.csv");
        if (!cont) throw bpl::IoError("cannot open " + rp_in + "/contingency.csv");
        std::string header, row;
        std::getline(cont, header);
        std::getline(cont, row);
        std::stringstream ss(row);
        std::string pa, pb;
        std::getline(ss, pa, ',');
        std::getline(ss, pb, ',');
        auto summary = bpl::summarize_cells(std::move(cells), pa, pb);
        std::cout << "variant successes/n median_final_error median_time_s\n";
        for (const auto& v : summary.variants)
            std::cout << v.variant << " " << v.successes << "/" << v.n_runs << " "
                      << bpl::format_double(v.median_final_error) << " "
                      << bpl::format_double(v.median_time_s) << "\n";
        std::cout << "contingency " << summary.pair_a << " vs " << summary.pair_b << ": both "
                  << summary.both_succeed << ", only_a " << summary.only_a << ", only_b "
                  << summary.only_b << ", neither " << summary.both_fail << "\n";
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const bpl::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    } catch (const bpl::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
