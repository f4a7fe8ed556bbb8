#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "faircert/dataset.hpp"
#include "faircert/encoded.hpp"
#include "faircert/fairness.hpp"

namespace faircert {

struct EncoderConfig {
    double gamma = 0.5;                       // criterion weight, 0 = plain label Gini
    int max_leaves = 16;                      // leaf budget
    int min_leaf_size = 50;                   // smallest legal leaf
    std::vector<int> quantile_orders = {1, 2, 4};
    FairnessTarget fairness_target = FairnessTarget::DP;
    uint64_t seed = 0;
    int label_index = 0;

    void validate() const;
};

struct SplitRule {
    int feature = -1;
    bool is_threshold = true;
    double threshold = 0.0;              // continuous: x <= threshold goes left
    std::vector<int> category_set;       // categorical: sorted ids routed left
};

struct PathStep {
    SplitRule rule;
    bool went_left = false;
};

struct Cell {
    int id = 0;                          // 1-based
    std::vector<double> representation;  // medians / modes of the leaf's training rows
    std::vector<PathStep> path;
    int64_t train_count = 0;
};

struct TreeNode {
    bool leaf = true;
    SplitRule rule;
    int left = -1;
    int right = -1;
    int cell = -1;                       // leaf only, 0-based
};

// Gini impurity 1 - sum(p_c^2); equals 2p(1-p) for two classes.
double gini_from_counts(const std::vector<int64_t>& counts);

// (1-gamma) * Gini_y + gamma * (max_s - Gini_s) where max_s = 1 - 1/|groups|.
// Lower is better: the second term drives the group mix toward uniform.
double fair_gini(const std::vector<int64_t>& y_counts, const std::vector<int64_t>& s_counts,
                 double gamma);

// Category ordering searched by prefix cuts. q=1 sorts by positive-label rate
// (optimal for gamma=0); q>1 first buckets categories into q quantile blocks
// of the s=1 rate, sorts each block by the label rate, and interleaves the
// blocks round-robin. Categories unseen in `rows` come last in id order.
std::vector<int> order_categories(const TabularDataset& ds, const std::vector<size_t>& rows,
                                  int feature, int q, int label_col = 0);

struct SplitCandidate {
    SplitRule rule;
    double criterion = 0.0;  // weighted child criterion, per row of the node
};

std::optional<SplitCandidate> best_split(const TabularDataset& ds,
                                         const std::vector<size_t>& rows,
                                         const EncoderConfig& cfg, int n_classes, int n_groups);
std::optional<SplitCandidate> best_split(const TabularDataset& ds,
                                         const std::vector<size_t>& rows,
                                         const EncoderConfig& cfg);

class FairTree : public Encoder {
  public:
    FeatureSchema schema;
    EncoderConfig config;
    std::vector<TreeNode> nodes;
    std::vector<Cell> cells;

    EncodedDataset encode(const TabularDataset& ds) const override;
    int n_cells() const override { return static_cast<int>(cells.size()); }
    std::string kind() const override { return "fair_tree"; }
    std::string to_json_string() const override;

    int route_row(const TabularDataset& ds, size_t row) const;  // 0-based cell
    // Simplified conjunction of the path predicates of a cell (1-based id).
    std::vector<std::string> describe_cell(int cell_id) const;

    void save(const std::string& path) const;
    static FairTree from_json_string(const std::string& text, const FeatureSchema& schema);
    static FairTree load(const std::string& path, const FeatureSchema& schema);
};

FairTree fit_tree(const TabularDataset& train, const EncoderConfig& cfg);

}  // namespace faircert
