#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace bpl {

enum class ExperimentId { lasso_fig1, nmf_swimmer, ntd_swimmer, ntd_random, regression };

ExperimentId experiment_from_name(const std::string& name);
std::string experiment_name(ExperimentId id);
std::vector<std::string> experiment_variants(ExperimentId id);

// Multi-seed experiment: run r uses seed base_seed + r, and every variant in a
// run is fed the same starting point. `serial` runs cells sequentially and
// zeroes the wall-time columns so outputs are byte-reproducible.
struct Campaign {
    ExperimentId experiment = ExperimentId::nmf_swimmer;
    int n_runs = 20;
    std::uint64_t base_seed = 1;
    int max_cycles = 100;  // iteration budget for lasso, cycles elsewhere
    double success_tol = 1e-3;
    bool serial = false;
    std::string out_dir = "out";

    static Campaign defaults(ExperimentId id, bool full_size = false);
};

struct CellResult {
    std::string variant;
    int run = 0;
    std::uint64_t seed = 0;
    int cycles = 0;
    int cycles_to_success = -1;
    double final_error = 0.0;
    bool success = false;
    double time_s = 0.0;
    std::string error;  // solver failure message; cell counted as unsuccessful
};

struct VariantSummary {
    std::string variant;
    int successes = 0;
    int n_runs = 0;
    double median_final_error = 0.0;
    double median_time_s = 0.0;
};

struct CampaignSummary {
    std::vector<CellResult> cells;
    std::vector<VariantSummary> variants;
    std::string pair_a, pair_b;  // the two variants the contingency table compares
    int both_succeed = 0, only_a = 0, only_b = 0, both_fail = 0;
};

// Executes all (run, variant) cells, writes per-cell trace CSVs plus
// cells.csv, summary.csv, contingency.csv and convergence.csv into out_dir.
CampaignSummary run_campaign(const Campaign& campaign);

// Rebuilds summary rows and the contingency table from stored cells.
CampaignSummary summarize_cells(std::vector<CellResult> cells, const std::string& pair_a,
                                const std::string& pair_b);

std::vector<CellResult> read_cells_csv(const std::string& path);

struct ConvergenceTrace {
    std::string variant;
    int run = 0;
    std::vector<double> objective;
    std::vector<double> rel_error;
    double time_s = 0.0;
};

// Long-format CSV variant,run,iter,objective,rel_error,time_s with
// deterministic row order and full-precision floats.
void emit_convergence_csv(const std::vector<ConvergenceTrace>& traces, const std::string& path);

}  // namespace bpl
