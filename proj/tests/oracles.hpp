#pragma once

#include <cstdint>
#include <vector>

// Slow reference implementations used to cross-check the library. Each one
// takes a route that shares no code with the implementation under test.
namespace oracle {

// P(Bin(n, p) >= m) summed in log space.
double binomial_upper_tail(int64_t m, int64_t n, double p);
double binomial_lower_tail(int64_t m, int64_t n, double p);

// Two-sided binomial interval endpoints found by bisecting the exact tails.
double cp_lower_bisect(int64_t m, int64_t n, double alpha);
double cp_upper_bisect(int64_t m, int64_t n, double alpha);

// Regularized incomplete beta by composite Simpson; needs a, b >= 1.
double beta_cdf_simpson(double x, double a, double b);

// Best weighted binary-label Gini over every binary partition of the
// categories (both sides non-empty in row count).
double best_partition_gini(const std::vector<int>& cat, const std::vector<int>& y, int n_cats);

}  // namespace oracle
