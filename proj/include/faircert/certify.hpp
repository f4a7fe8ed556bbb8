#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "faircert/dataset.hpp"
#include "faircert/encoded.hpp"
#include "faircert/fairness.hpp"

namespace faircert {

// Split of the total error probability across the three certification stages:
// base rates (eps_b), per-cell intervals (eps_c), test-set sum (eps_s).
struct ConfidenceBudget {
    double epsilon = 0.05;
    double eps_b = 0.005;
    double eps_c = 0.04;
    double eps_s = 0.005;

    void validate() const;
    ConfidenceBudget scaled(double factor) const;
};

// High-confidence upper bounds on 1/(2q(0)) and 1/(2q(1)) where q(s) is the
// marginal rate of group s. Infinite when the training slice lacks a group.
struct BaseRateBounds {
    double alpha0_bar = 0.0;
    double alpha1_bar = 0.0;
    int64_t m = 0;  // rows with s=0
    int64_t n = 0;
    double confidence = 0.0;

    bool finite() const;
};

struct CellCount {
    int id = 0;  // 1-based
    int64_t n = 0;
    int64_t m = 0;  // rows with s=0
};

struct CellStatistics {
    int k = 0;
    std::vector<CellCount> cells;   // exactly k entries, id order
    std::vector<int> idx;           // row -> cell (0-based), from the supplying split
};

// Per-cell upper bound t_i on max(alpha0 q_i(0), alpha1 q_i(1)). Cells with
// no validation rows carry the vacuous bound max(a0_bar, a1_bar), flagged.
struct CellBound {
    int id = 0;  // 1-based
    int64_t n = 0;
    int64_t m = 0;
    double t = 0.0;
    bool degenerate = false;
};

// Decomposed test-set sum bound: s_star = mean_t + width.
struct SumBound {
    double s_star = 0.0;
    double mean_t = 0.0;
    double width = 0.0;
    double a = 0.0;  // min over all cell bounds
    double b = 0.0;  // max over all cell bounds
    int64_t n = 0;
};

struct CertificateReport {
    FairnessTarget metric = FairnessTarget::DP;
    ConfidenceBudget budget;
    std::string restriction;  // "", "y=0", "y=1", "pair(a,b)"
    int64_t n_train = 0, n_val = 0, n_test = 0;
    std::string encoder_hash;

    BaseRateBounds base;           // leaf reports only
    std::vector<CellBound> cells;  // leaf reports only
    SumBound sum;                  // leaf reports only

    double s_star = 0.0;
    double t_star_raw = 0.0;  // 2 s_star - 1 before clamping
    double t_star = 0.0;      // clamped to [0,1]

    std::vector<CertificateReport> children;  // EO per-y runs, multigroup pairs

    std::string to_json_string() const;
    void save(const std::string& path) const;
};

// Clopper-Pearson bounds on the group-0 rate from the training s-values;
// alpha0_bar/alpha1_bar are infinite when m=0 or m=n (single-group data).
BaseRateBounds bound_base_rates(const std::vector<int>& s_values, double eps_b);

CellStatistics collect_cell_stats(const EncodedDataset& encoded, int k);

// t_i = max(a0_bar * upper_i, a1_bar * (1 - lower_i)) with the per-cell
// interval run at alpha = eps_c / k, so all k bounds hold jointly.
std::vector<CellBound> bound_cells(const CellStatistics& stats, const BaseRateBounds& base,
                                   double eps_c);

// Mean of t over the test rows plus the Hoeffding width at eps_s; the value
// range [a, b] spans all k cell bounds, observed in the test rows or not.
SumBound bound_sum(const EncodedDataset& encoded, const std::vector<CellBound>& bounds,
                   double eps_s);

// Full certificate for two groups. DP runs the three stages on the three
// splits; EOpp runs them on the y=1 restrictions; EO runs the procedure on
// each y-restriction at half budget and reports the mean with both children.
CertificateReport certify(const Encoder& encoder, const TabularDataset& train,
                          const TabularDataset& val, const TabularDataset& test,
                          const ConfidenceBudget& budget, FairnessTarget metric,
                          int label_col = 0);

// One certificate per unordered group pair, each at budget / (#pairs); the
// combined report carries the worst pair's numbers and all pair children.
CertificateReport certify_multigroup(const Encoder& encoder, const TabularDataset& train,
                                     const TabularDataset& val, const TabularDataset& test,
                                     const ConfidenceBudget& budget, FairnessTarget metric,
                                     int label_col = 0);

}  // namespace faircert
