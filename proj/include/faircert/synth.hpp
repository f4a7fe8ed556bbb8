#pragma once

#include <cstdint>

#include "faircert/dataset.hpp"

namespace faircert {

// Synthetic tabular generator used by tests and the acceptance experiments:
// binary label correlated with the sensitive value at strength rho, plus
// continuous and categorical features that carry varying amounts of label
// and group signal.
struct SynthSpec {
    size_t n = 1000;
    uint64_t seed = 0;
    double rho = 0.6;      // corr(s, y) target via P(y=1|s)
    int continuous = 4;
    int categorical = 2;
    int categories = 5;    // per categorical feature
    int groups = 2;
    double p_s0 = 0.5;     // P(s=0), two-group case; multigroup draws uniformly

    void validate() const;
};

TabularDataset make_synthetic(const SynthSpec& spec);

}  // namespace faircert
