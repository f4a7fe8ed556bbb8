#include "faircert/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace faircert::stats {

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 3e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double x, double a, double b) {
    if (!(a >= 0.0) || !(b >= 0.0)) {
        throw std::invalid_argument("incomplete_beta: shapes must be non-negative");
    }
    if (a == 0.0 && b == 0.0) {
        throw std::invalid_argument("incomplete_beta: both shapes zero");
    }
    // Point-mass limits of the beta family.
    if (a == 0.0) return x >= 0.0 ? 1.0 : 0.0;
    if (b == 0.0) return x >= 1.0 ? 1.0 : 0.0;
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(log_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * beta_cf(a, b, x) / a;
    }
    return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double beta_quantile(double p, double v, double w) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("beta_quantile: p out of [0,1]: " + std::to_string(p));
    }
    if (v == 0.0 && w == 0.0) {
        throw std::invalid_argument("beta_quantile: degenerate shapes v=0, w=0");
    }
    if (v < 0.0 || w < 0.0) {
        throw std::invalid_argument("beta_quantile: negative shape");
    }
    if (v == 0.0) return 0.0;
    if (w == 0.0) return 1.0;
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (incomplete_beta(mid, v, w) >= p) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

BinomialCI clopper_pearson(int64_t m, int64_t n, double alpha) {
    if (n < 0 || m < 0 || m > n) {
        throw std::invalid_argument("clopper_pearson: need 0 <= m <= n");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("clopper_pearson: alpha out of (0,1)");
    }
    BinomialCI ci;
    ci.confidence = 1.0 - alpha;
    if (n == 0) return ci;  // vacuous [0, 1]
    const double md = static_cast<double>(m);
    const double nd = static_cast<double>(n);
    ci.lower = (m == 0) ? 0.0 : beta_quantile(alpha / 2.0, md, nd - md + 1.0);
    ci.upper = (m == n) ? 1.0 : beta_quantile(1.0 - alpha / 2.0, md + 1.0, nd - md);
    return ci;
}

double hoeffding_width(int64_t n, double epsilon, double a, double b) {
    if (n < 1) throw std::invalid_argument("hoeffding_width: n must be >= 1");
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("hoeffding_width: epsilon out of (0,1)");
    }
    if (a > b) throw std::invalid_argument("hoeffding_width: a > b");
    return (b - a) * std::sqrt(-std::log(epsilon) / (2.0 * static_cast<double>(n)));
}

}  // namespace faircert::stats
