#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "faircert/certify.hpp"
#include "faircert/dataset.hpp"
#include "faircert/downstream.hpp"
#include "faircert/kmeans.hpp"
#include "faircert/tree.hpp"

namespace faircert {

std::string zoo_entry_name(DownstreamKind kind, int hidden_units);
std::pair<DownstreamKind, int> zoo_entry_from_name(const std::string& name);
std::vector<std::pair<DownstreamKind, int>> default_zoo();

// One end-to-end run: split, fit on train, certify, evaluate downstream.
struct RunConfig {
    SplitSpec split;                    // fractions only; the seed is derived
    EncoderConfig tree;
    bool use_kmeans = false;
    int kmeans_k = 16;
    int kmeans_max_iters = 100;
    ConfidenceBudget budget;
    FairnessTarget metric = FairnessTarget::DP;
    size_t duplicate_m = 1;
    uint64_t seed = 0;
    int repetitions = 5;
    bool adversary = true;              // also train group-predicting classifiers
    std::vector<std::pair<DownstreamKind, int>> zoo = default_zoo();

    void validate() const;
    std::string to_json_string() const;
    uint64_t hash() const;
};

struct PipelineResult {
    std::string document;               // self-contained JSON result
    CertificateReport certificate;
    std::vector<EvalReport> evals;
    double worst_case_dp = 0.0;
    double accuracy = 0.0;              // best label-classifier mean accuracy
    double empirical_dp = 0.0;          // max DP over the whole suite
    int n_cells = 0;
    std::string encoder_kind;
    std::string encoder_json;
};

// eval_ds, when given, replaces the test split for the downstream evaluation
// and the worst-case oracle; the certificate still uses the internal split.
PipelineResult run_pipeline(const TabularDataset& ds, const RunConfig& cfg,
                            const TabularDataset* eval_ds = nullptr);

struct SweepGrids {
    std::vector<double> gammas = {0.0, 0.5, 0.9, 0.99, 0.999};
    std::vector<int> max_leaves = {16};
    std::vector<int> min_leaf_sizes = {50};
    std::vector<double> vs = {0.25};    // validation share of the non-test rows

    void validate() const;
    size_t size() const;
};

struct SweepRow {
    size_t index = 0;
    double gamma = 0.0;
    int max_leaves = 0;
    int min_leaf_size = 0;
    double v = 0.0;
    bool ok = false;
    std::string error;
    int n_cells = 0;
    double accuracy = 0.0;
    double empirical_dp = 0.0;
    double t_star = 0.0;
    bool pareto_empirical = false;      // on (accuracy up, empirical_dp down)
    bool pareto_certified = false;      // on (accuracy up, t_star down)
};

struct SweepResult {
    std::vector<SweepRow> rows;

    std::string csv() const;
};

SweepResult run_sweep(const TabularDataset& ds, const RunConfig& base, const SweepGrids& grids,
                      int workers = 1);

// Exact discrete ground truth for coverage experiments: group-conditional
// cell distributions q0/q1 and the group-0 rate.
struct CoverageSpec {
    std::vector<double> q0, q1;
    double p_s0 = 0.5;
    size_t n_per_trial = 2000;
    double train_fraction = 0.6, val_fraction = 0.2, test_fraction = 0.2;

    void validate() const;
    double true_sup() const;            // TV distance between q0 and q1
    std::string to_json_string() const;
    static CoverageSpec from_json_string(const std::string& text);
    static CoverageSpec load(const std::string& path);
};

struct CoverageTrial {
    bool ok = false;                    // false: certification failed (counted as violation)
    double t_star = 0.0;
    bool violated = false;
};

struct CoverageResult {
    size_t trials = 0;
    size_t violations = 0;
    size_t failures = 0;
    double violation_fraction = 0.0;
    double mean_t_star = 0.0;           // over successful trials
    double true_sup = 0.0;
    std::vector<CoverageTrial> per_trial;

    std::string to_json_string() const;
};

CoverageResult run_coverage(const CoverageSpec& spec, size_t trials,
                            const ConfidenceBudget& budget, uint64_t seed, int workers = 1);

// Worker count: explicit flag when positive, else FAIRCERT_WORKERS, else 1.
int resolve_workers(int flag_value);

}  // namespace faircert
