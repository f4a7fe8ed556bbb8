#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "faircert/encoded.hpp"

namespace faircert {

enum class DownstreamKind { Logistic, OneHiddenNN, DecisionTree };
enum class DownstreamTarget { Label, Group };

std::string downstream_kind_name(DownstreamKind k);
DownstreamKind downstream_kind_from_name(const std::string& name);

struct EvalReport {
    std::string classifier;
    std::string target;
    int repetitions = 0;
    uint64_t seed = 0;
    double accuracy = 0.0;             // mean over repetitions
    double dp = 0.0;                   // max over repetitions
    std::optional<double> eopp;        // absent when the y-restriction is degenerate
    std::optional<double> eo;
};

// Trains `repetitions` seeded classifiers on the encoded train rows
// (representations standardized with train statistics) and evaluates on the
// encoded test rows. target=Group trains an adversary predicting s.
// Reports mean accuracy and max fairness distances over repetitions.
EvalReport train_downstream(const EncodedDataset& train, const EncodedDataset& test,
                            DownstreamKind kind, DownstreamTarget target, int repetitions,
                            uint64_t seed, int hidden_units = 50, int label_col = 0);

}  // namespace faircert
