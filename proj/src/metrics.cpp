#include "faircert/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace faircert {

void PredictionSet::validate() const {
    if (pred.size() != group.size() || pred.size() != label.size()) {
        throw std::invalid_argument("PredictionSet: column lengths differ");
    }
}

namespace {

double dp_on_rows(const PredictionSet& p, const std::vector<char>& keep, const char* who) {
    int max_g = -1, max_c = -1;
    for (size_t r = 0; r < p.n(); ++r) {
        if (!keep[r]) continue;
        if (p.group[r] < 0) throw std::invalid_argument(std::string(who) + ": negative group id");
        if (p.pred[r] < 0) throw std::invalid_argument(std::string(who) + ": negative class id");
        max_g = std::max(max_g, p.group[r]);
        max_c = std::max(max_c, p.pred[r]);
    }
    if (max_g < 1) {
        throw std::invalid_argument(std::string(who) + ": needs at least two groups");
    }
    int G = max_g + 1, C = max_c + 1;
    std::vector<int64_t> n_g(G, 0);
    std::vector<std::vector<int64_t>> cnt(G, std::vector<int64_t>(C, 0));
    for (size_t r = 0; r < p.n(); ++r) {
        if (!keep[r]) continue;
        ++n_g[p.group[r]];
        ++cnt[p.group[r]][p.pred[r]];
    }
    for (int g = 0; g < G; ++g) {
        if (n_g[g] == 0) {
            throw std::invalid_argument(std::string(who) + ": group " + std::to_string(g) +
                                        " absent");
        }
    }
    // Exact integer numerator over the common denominator n_g * n_h, divided
    // once: keeps every rate difference correctly rounded and comparable
    // bitwise against worst_case_empirical_dp on the same split.
    double worst = 0.0;
    for (int c = 0; c < C; ++c) {
        for (int g = 0; g < G; ++g) {
            for (int h = g + 1; h < G; ++h) {
                int64_t num = std::llabs(cnt[g][c] * n_g[h] - cnt[h][c] * n_g[g]);
                double d = static_cast<double>(num) /
                           static_cast<double>(n_g[g] * n_g[h]);
                worst = std::max(worst, d);
            }
        }
    }
    return worst;
}

std::vector<char> label_mask(const PredictionSet& p, int y, const char* who) {
    std::vector<char> keep(p.n(), 0);
    bool any = false;
    for (size_t r = 0; r < p.n(); ++r) {
        if (p.label[r] < 0 || p.label[r] > 1) {
            throw std::invalid_argument(std::string(who) + ": needs a binary label");
        }
        if (p.label[r] == y) {
            keep[r] = 1;
            any = true;
        }
    }
    if (!any) {
        throw std::invalid_argument(std::string(who) + ": no rows with y=" + std::to_string(y));
    }
    return keep;
}

}  // namespace

double dp_distance(const PredictionSet& preds) {
    preds.validate();
    return dp_on_rows(preds, std::vector<char>(preds.n(), 1), "dp_distance");
}

double eopp_distance(const PredictionSet& preds) {
    preds.validate();
    return dp_on_rows(preds, label_mask(preds, 1, "eopp_distance"), "eopp_distance");
}

double eo_distance(const PredictionSet& preds) {
    preds.validate();
    double d0 = dp_on_rows(preds, label_mask(preds, 0, "eo_distance"), "eo_distance");
    double d1 = dp_on_rows(preds, label_mask(preds, 1, "eo_distance"), "eo_distance");
    return (d0 + d1) / 2.0;
}

double worst_case_empirical_dp(const EncodedDataset& encoded) {
    int G = 0;
    for (int s : encoded.sensitive) {
        if (s < 0) throw std::invalid_argument("worst_case_empirical_dp: negative group id");
        G = std::max(G, s + 1);
    }
    if (G < 2) {
        throw std::invalid_argument("worst_case_empirical_dp: needs at least two groups");
    }
    if (encoded.k < 1) throw std::invalid_argument("worst_case_empirical_dp: no cells");
    std::vector<int64_t> n_g(G, 0);
    std::vector<std::vector<int64_t>> cnt(G, std::vector<int64_t>(encoded.k, 0));
    for (size_t r = 0; r < encoded.n_rows(); ++r) {
        int c = encoded.cell[r];
        if (c < 0 || c >= encoded.k) {
            throw std::out_of_range("worst_case_empirical_dp: cell id out of range");
        }
        ++n_g[encoded.sensitive[r]];
        ++cnt[encoded.sensitive[r]][c];
    }
    for (int g = 0; g < G; ++g) {
        if (n_g[g] == 0) {
            throw std::invalid_argument("worst_case_empirical_dp: group " + std::to_string(g) +
                                        " absent");
        }
    }
    // Total variation as an exact integer numerator: sum of the positive
    // parts of cnt_h * n_g - cnt_g * n_h (the two signs sum to the same
    // value). Any subset sum of these terms is <= this numerator in exact
    // integers, so the single correctly-rounded division guarantees every
    // classifier's dp_distance on this split stays <= the value returned
    // here, bit for bit.
    double worst = 0.0;
    for (int g = 0; g < G; ++g) {
        for (int h = g + 1; h < G; ++h) {
            int64_t num = 0;
            for (int c = 0; c < encoded.k; ++c) {
                int64_t x = cnt[h][c] * n_g[g] - cnt[g][c] * n_g[h];
                if (x > 0) num += x;
            }
            double tv = static_cast<double>(num) /
                        static_cast<double>(n_g[g] * n_g[h]);
            worst = std::max(worst, tv);
        }
    }
    return worst;
}

}  // namespace faircert
