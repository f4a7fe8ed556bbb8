#pragma once

#include <cstdint>

namespace faircert::stats {

// Regularized incomplete beta function I_x(a, b), evaluated by continued
// fraction with the normalization terms kept in log domain.
double incomplete_beta(double x, double a, double b);

// p-th quantile of Beta(v, w), found by bisection on incomplete_beta
// (200-iteration cap, interval width 1e-12). Degenerate shapes follow the
// point-mass convention: v=0 -> 0, w=0 -> 1; both zero is invalid.
double beta_quantile(double p, double v, double w);

struct BinomialCI {
    double lower = 0.0;
    double upper = 1.0;
    double confidence = 0.0;  // 1 - alpha
};

// Exact Clopper-Pearson interval for a binomial proportion given m successes
// out of n trials. m=0 pins lower to 0, m=n pins upper to 1; n=0 yields the
// vacuous [0, 1].
BinomialCI clopper_pearson(int64_t m, int64_t n, double alpha);

// One-sided Hoeffding deviation width (b-a) * sqrt(-ln(eps) / (2n)).
double hoeffding_width(int64_t n, double epsilon, double a, double b);

}  // namespace faircert::stats
