#include "faircert/synth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "faircert/rng.hpp"

namespace faircert {

void SynthSpec::validate() const {
    if (n == 0) throw std::invalid_argument("synth: n must be positive");
    if (!(rho >= -1.0 && rho <= 1.0)) throw std::invalid_argument("synth: rho must be in [-1, 1]");
    if (continuous < 0 || categorical < 0 || continuous + categorical == 0) {
        throw std::invalid_argument("synth: need at least one feature");
    }
    if (categorical > 0 && categories < 2) {
        throw std::invalid_argument("synth: categorical features need >= 2 categories");
    }
    if (groups < 2) throw std::invalid_argument("synth: need >= 2 groups");
    if (!(p_s0 > 0.0 && p_s0 < 1.0)) throw std::invalid_argument("synth: p_s0 must be in (0, 1)");
}

namespace {

double gauss(std::mt19937_64& rng) {
    double u1 = unit_real(rng), u2 = unit_real(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace

TabularDataset make_synthetic(const SynthSpec& spec) {
    spec.validate();
    TabularDataset ds;
    for (int j = 0; j < spec.continuous; ++j) {
        ds.schema.features.push_back({"x" + std::to_string(j), FeatureKind::Continuous, {}});
    }
    for (int j = 0; j < spec.categorical; ++j) {
        Feature f;
        f.name = "c" + std::to_string(j);
        f.kind = FeatureKind::Categorical;
        for (int c = 0; c < spec.categories; ++c) f.categories.push_back("v" + std::to_string(c));
        ds.schema.features.push_back(std::move(f));
    }
    ds.schema.sensitive_column = "s";
    ds.schema.label_columns = {"y"};
    ds.schema.validate();

    auto rng = make_rng(spec.seed, "synth");
    size_t d = ds.d();
    ds.feat.resize(spec.n * d);
    ds.sens.resize(spec.n);
    ds.labels.assign(1, std::vector<int>(spec.n));

    for (size_t r = 0; r < spec.n; ++r) {
        int g;
        if (spec.groups == 2) {
            g = unit_real(rng) < spec.p_s0 ? 0 : 1;
        } else {
            g = static_cast<int>(bounded(rng, spec.groups));
        }
        double gn = static_cast<double>(g) / static_cast<double>(spec.groups - 1);
        double py1 = 0.5 + spec.rho * (gn - 0.5);
        int y = unit_real(rng) < py1 ? 1 : 0;
        ds.sens[r] = g;
        ds.labels[0][r] = y;

        for (int j = 0; j < spec.continuous; ++j) {
            static const double wy[3] = {1.5, 0.0, 0.8};
            static const double ws[3] = {0.0, 1.5, 0.8};
            double x = wy[j % 3] * (y - 0.5) + ws[j % 3] * (gn - 0.5) + gauss(rng);
            ds.feat[r * d + j] = x;
        }
        for (int j = 0; j < spec.categorical; ++j) {
            int m = spec.categories;
            double total = 0.0;
            std::vector<double> w(m);
            for (int c = 0; c < m; ++c) {
                double t = static_cast<double>(c) / static_cast<double>(m - 1);
                w[c] = 1.0 + 1.2 * y * t + 1.2 * gn * (1.0 - t);
                total += w[c];
            }
            double u = unit_real(rng) * total;
            int pick = m - 1;
            double acc = 0.0;
            for (int c = 0; c < m; ++c) {
                acc += w[c];
                if (u < acc) {
                    pick = c;
                    break;
                }
            }
            ds.feat[r * d + spec.continuous + j] = static_cast<double>(pick);
        }
    }
    ds.validate();
    return ds;
}

}  // namespace faircert
