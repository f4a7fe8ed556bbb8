#pragma once

#include <cstdint>
#include <vector>

#include "faircert/encoded.hpp"

namespace faircert {

struct PredictionSet {
    std::vector<int> pred;   // predicted class per row
    std::vector<int> group;  // sensitive value per row
    std::vector<int> label;  // true label per row

    size_t n() const { return pred.size(); }
    void validate() const;
};

// Demographic-parity distance: for two groups, |P(pred=1|s=0) - P(pred=1|s=1)|;
// in general the max over classes and group pairs of the prediction-rate gap.
double dp_distance(const PredictionSet& preds);

// DP distance restricted to rows with y=1.
double eopp_distance(const PredictionSet& preds);

// Mean of the DP distances of the y=0 and y=1 restrictions.
double eo_distance(const PredictionSet& preds);

// Exact worst case over every classifier on the finite support: the total
// variation distance between per-group empirical cell histograms (max over
// group pairs when more than two groups are present).
double worst_case_empirical_dp(const EncodedDataset& encoded);

}  // namespace faircert
