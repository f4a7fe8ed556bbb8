#include "faircert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#include "faircert/rng.hpp"
#include "faircert/stats.hpp"

namespace faircert {

using nlohmann::json;

void ConfidenceBudget::validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("epsilon must be in (0, 1)");
    }
    if (!(eps_b > 0.0 && eps_c > 0.0 && eps_s > 0.0)) {
        throw std::invalid_argument("all budget components must be positive");
    }
    if (std::fabs(eps_b + eps_c + eps_s - epsilon) > 1e-12) {
        throw std::invalid_argument("budget components must sum to epsilon");
    }
}

ConfidenceBudget ConfidenceBudget::scaled(double factor) const {
    ConfidenceBudget out;
    out.epsilon = epsilon * factor;
    out.eps_b = eps_b * factor;
    out.eps_c = eps_c * factor;
    out.eps_s = eps_s * factor;
    return out;
}

bool BaseRateBounds::finite() const {
    return std::isfinite(alpha0_bar) && std::isfinite(alpha1_bar);
}

namespace {

void check_two_groups(const std::vector<int>& s, const char* who) {
    for (int v : s) {
        if (v < 0 || v > 1) {
            throw std::invalid_argument(std::string(who) +
                                        ": sensitive values must be 0/1 (use the multigroup path)");
        }
    }
}

}  // namespace

BaseRateBounds bound_base_rates(const std::vector<int>& s_values, double eps_b) {
    if (s_values.empty()) throw std::invalid_argument("bound_base_rates: empty sample");
    if (!(eps_b > 0.0 && eps_b < 1.0)) {
        throw std::invalid_argument("bound_base_rates: eps_b must be in (0, 1)");
    }
    check_two_groups(s_values, "bound_base_rates");
    BaseRateBounds out;
    out.n = static_cast<int64_t>(s_values.size());
    out.m = std::count(s_values.begin(), s_values.end(), 0);
    out.confidence = 1.0 - eps_b;
    auto ci = stats::clopper_pearson(out.m, out.n, eps_b);
    double inf = std::numeric_limits<double>::infinity();
    out.alpha0_bar = out.m == 0 ? inf : 1.0 / (2.0 * ci.lower);
    out.alpha1_bar = out.m == out.n ? inf : 1.0 / (2.0 * (1.0 - ci.upper));
    return out;
}

CellStatistics collect_cell_stats(const EncodedDataset& encoded, int k) {
    if (k < 1) throw std::invalid_argument("collect_cell_stats: k must be at least 1");
    check_two_groups(encoded.sensitive, "collect_cell_stats");
    CellStatistics out;
    out.k = k;
    out.cells.resize(k);
    for (int i = 0; i < k; ++i) out.cells[i].id = i + 1;
    out.idx = encoded.cell;
    for (size_t r = 0; r < encoded.n_rows(); ++r) {
        int c = encoded.cell[r];
        if (c < 0 || c >= k) throw std::out_of_range("collect_cell_stats: cell id out of range");
        ++out.cells[c].n;
        if (encoded.sensitive[r] == 0) ++out.cells[c].m;
    }
    return out;
}

std::vector<CellBound> bound_cells(const CellStatistics& stats, const BaseRateBounds& base,
                                   double eps_c) {
    if (!base.finite()) {
        throw std::invalid_argument("bound_cells: base-rate bounds must be finite");
    }
    if (!(eps_c > 0.0 && eps_c < 1.0)) {
        throw std::invalid_argument("bound_cells: eps_c must be in (0, 1)");
    }
    double alpha = eps_c / static_cast<double>(stats.k);
    std::vector<CellBound> out;
    out.reserve(stats.cells.size());
    for (const CellCount& c : stats.cells) {
        auto ci = stats::clopper_pearson(c.m, c.n, alpha);
        CellBound b;
        b.id = c.id;
        b.n = c.n;
        b.m = c.m;
        b.t = std::max(base.alpha0_bar * ci.upper, base.alpha1_bar * (1.0 - ci.lower));
        b.degenerate = c.n == 0;
        out.push_back(b);
    }
    return out;
}

SumBound bound_sum(const EncodedDataset& encoded, const std::vector<CellBound>& bounds,
                   double eps_s) {
    if (encoded.n_rows() == 0) throw std::invalid_argument("bound_sum: empty test split");
    if (bounds.empty()) throw std::invalid_argument("bound_sum: no cell bounds");
    if (!(eps_s > 0.0 && eps_s < 1.0)) {
        throw std::invalid_argument("bound_sum: eps_s must be in (0, 1)");
    }
    SumBound out;
    out.n = static_cast<int64_t>(encoded.n_rows());
    double acc = 0.0;
    for (size_t r = 0; r < encoded.n_rows(); ++r) {
        int c = encoded.cell[r];
        if (c < 0 || c >= static_cast<int>(bounds.size())) {
            throw std::out_of_range("bound_sum: row cell has no bound");
        }
        acc += bounds[c].t;
    }
    out.mean_t = acc / static_cast<double>(out.n);
    out.a = bounds[0].t;
    out.b = bounds[0].t;
    for (const CellBound& b : bounds) {
        out.a = std::min(out.a, b.t);
        out.b = std::max(out.b, b.t);
    }
    out.width = stats::hoeffding_width(out.n, eps_s, out.a, out.b);
    out.s_star = out.mean_t + out.width;
    return out;
}

namespace {

void clamp_stars(CertificateReport& rep) {
    rep.t_star_raw = 2.0 * rep.s_star - 1.0;
    rep.t_star = std::min(1.0, std::max(0.0, rep.t_star_raw));
}

CertificateReport dp_core(const EncodedDataset& tr, const EncodedDataset& va,
                          const EncodedDataset& te, int k, const ConfidenceBudget& budget,
                          FairnessTarget metric, const std::string& restriction,
                          const std::string& enc_hash) {
    if (tr.n_rows() == 0) throw std::invalid_argument("certify: empty training split");
    check_two_groups(tr.sensitive, "certify");
    check_two_groups(va.sensitive, "certify");
    check_two_groups(te.sensitive, "certify");

    CertificateReport rep;
    rep.metric = metric;
    rep.budget = budget;
    rep.restriction = restriction;
    rep.n_train = static_cast<int64_t>(tr.n_rows());
    rep.n_val = static_cast<int64_t>(va.n_rows());
    rep.n_test = static_cast<int64_t>(te.n_rows());
    rep.encoder_hash = enc_hash;

    rep.base = bound_base_rates(tr.sensitive, budget.eps_b);
    if (!rep.base.finite()) {
        throw std::runtime_error("single-group data: base rates cannot be bounded" +
                                 (restriction.empty() ? "" : " (" + restriction + ")"));
    }
    rep.cells = bound_cells(collect_cell_stats(va, k), rep.base, budget.eps_c);
    rep.sum = bound_sum(te, rep.cells, budget.eps_s);
    rep.s_star = rep.sum.s_star;
    clamp_stars(rep);
    return rep;
}

void check_binary_label(const EncodedDataset& e, size_t label_col, const char* who) {
    if (label_col >= e.labels.size()) {
        throw std::invalid_argument(std::string(who) + ": label column out of range");
    }
    for (int v : e.labels[label_col]) {
        if (v < 0 || v > 1) {
            throw std::invalid_argument(std::string(who) + ": needs a binary label");
        }
    }
}

CertificateReport certify_encoded(const EncodedDataset& tr, const EncodedDataset& va,
                                  const EncodedDataset& te, int k,
                                  const ConfidenceBudget& budget, FairnessTarget metric,
                                  size_t label_col, const std::string& restriction,
                                  const std::string& enc_hash) {
    switch (metric) {
        case FairnessTarget::DP:
            return dp_core(tr, va, te, k, budget, metric, restriction, enc_hash);
        case FairnessTarget::EOpp: {
            check_binary_label(tr, label_col, "EOpp certification");
            check_binary_label(va, label_col, "EOpp certification");
            check_binary_label(te, label_col, "EOpp certification");
            EncodedDataset rtr = tr.filter_by_label(label_col, 1);
            EncodedDataset rva = va.filter_by_label(label_col, 1);
            EncodedDataset rte = te.filter_by_label(label_col, 1);
            if (rtr.n_rows() == 0 || rva.n_rows() == 0 || rte.n_rows() == 0) {
                throw std::runtime_error("EOpp certification: empty y=1 restriction");
            }
            std::string r = restriction.empty() ? "y=1" : restriction + " y=1";
            return dp_core(rtr, rva, rte, k, budget, metric, r, enc_hash);
        }
        case FairnessTarget::EO: {
            check_binary_label(tr, label_col, "EO certification");
            check_binary_label(va, label_col, "EO certification");
            check_binary_label(te, label_col, "EO certification");
            CertificateReport rep;
            rep.metric = metric;
            rep.budget = budget;
            rep.restriction = restriction;
            rep.n_train = static_cast<int64_t>(tr.n_rows());
            rep.n_val = static_cast<int64_t>(va.n_rows());
            rep.n_test = static_cast<int64_t>(te.n_rows());
            rep.encoder_hash = enc_hash;
            ConfidenceBudget half = budget.scaled(0.5);
            for (int y = 0; y <= 1; ++y) {
                EncodedDataset rtr = tr.filter_by_label(label_col, y);
                EncodedDataset rva = va.filter_by_label(label_col, y);
                EncodedDataset rte = te.filter_by_label(label_col, y);
                if (rtr.n_rows() == 0 || rva.n_rows() == 0 || rte.n_rows() == 0) {
                    throw std::runtime_error("EO certification: empty y=" + std::to_string(y) +
                                             " restriction");
                }
                std::string r = (restriction.empty() ? "" : restriction + " ") +
                                ("y=" + std::to_string(y));
                rep.children.push_back(
                    dp_core(rtr, rva, rte, k, half, FairnessTarget::DP, r, enc_hash));
            }
            rep.s_star = (rep.children[0].s_star + rep.children[1].s_star) / 2.0;
            clamp_stars(rep);
            return rep;
        }
    }
    throw std::logic_error("unknown fairness target");
}

json report_to_json(const CertificateReport& rep) {
    json j;
    j["metric"] = fairness_target_name(rep.metric);
    j["budget"] = {{"epsilon", rep.budget.epsilon},
                   {"eps_b", rep.budget.eps_b},
                   {"eps_c", rep.budget.eps_c},
                   {"eps_s", rep.budget.eps_s}};
    if (!rep.restriction.empty()) j["restriction"] = rep.restriction;
    j["n_train"] = rep.n_train;
    j["n_val"] = rep.n_val;
    j["n_test"] = rep.n_test;
    if (!rep.encoder_hash.empty()) j["encoder_hash"] = rep.encoder_hash;
    if (rep.children.empty()) {
        j["base"] = {{"alpha0_bar", rep.base.alpha0_bar},
                     {"alpha1_bar", rep.base.alpha1_bar},
                     {"m", rep.base.m},
                     {"n", rep.base.n},
                     {"confidence", rep.base.confidence}};
        j["cells"] = json::array();
        for (const CellBound& c : rep.cells) {
            j["cells"].push_back({{"id", c.id},
                                  {"n", c.n},
                                  {"m", c.m},
                                  {"t", c.t},
                                  {"degenerate", c.degenerate}});
        }
        j["sum"] = {{"mean_t", rep.sum.mean_t},
                    {"width", rep.sum.width},
                    {"a", rep.sum.a},
                    {"b", rep.sum.b},
                    {"n", rep.sum.n}};
    } else {
        j["children"] = json::array();
        for (const CertificateReport& c : rep.children) j["children"].push_back(report_to_json(c));
    }
    j["s_star"] = rep.s_star;
    j["t_star_raw"] = rep.t_star_raw;
    j["t_star"] = rep.t_star;
    return j;
}

}  // namespace

std::string CertificateReport::to_json_string() const { return report_to_json(*this).dump(2); }

void CertificateReport::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << to_json_string() << "\n";
}

CertificateReport certify(const Encoder& encoder, const TabularDataset& train,
                          const TabularDataset& val, const TabularDataset& test,
                          const ConfidenceBudget& budget, FairnessTarget metric, int label_col) {
    budget.validate();
    if (label_col < 0) throw std::invalid_argument("certify: bad label column");
    EncodedDataset tr = encoder.encode(train);
    EncodedDataset va = encoder.encode(val);
    EncodedDataset te = encoder.encode(test);
    return certify_encoded(tr, va, te, encoder.n_cells(), budget, metric,
                           static_cast<size_t>(label_col), "", hex64(encoder.hash()));
}

CertificateReport certify_multigroup(const Encoder& encoder, const TabularDataset& train,
                                     const TabularDataset& val, const TabularDataset& test,
                                     const ConfidenceBudget& budget, FairnessTarget metric,
                                     int label_col) {
    budget.validate();
    if (label_col < 0) throw std::invalid_argument("certify_multigroup: bad label column");
    EncodedDataset tr = encoder.encode(train);
    EncodedDataset va = encoder.encode(val);
    EncodedDataset te = encoder.encode(test);
    int groups = std::max({train.n_groups(), val.n_groups(), test.n_groups()});
    if (groups < 2) {
        throw std::invalid_argument("certify_multigroup: needs at least 2 groups");
    }
    int n_pairs = groups * (groups - 1) / 2;
    ConfidenceBudget pair_budget = budget.scaled(1.0 / n_pairs);
    std::string enc_hash = hex64(encoder.hash());

    CertificateReport rep;
    rep.metric = metric;
    rep.budget = budget;
    rep.n_train = static_cast<int64_t>(tr.n_rows());
    rep.n_val = static_cast<int64_t>(va.n_rows());
    rep.n_test = static_cast<int64_t>(te.n_rows());
    rep.encoder_hash = enc_hash;

    const EncodedDataset* splits[3] = {&tr, &va, &te};
    const char* split_names[3] = {"train", "val", "test"};
    int best = -1;
    for (int a = 0; a < groups; ++a) {
        for (int b = a + 1; b < groups; ++b) {
            for (int s = 0; s < 3; ++s) {
                int64_t ca = std::count(splits[s]->sensitive.begin(),
                                        splits[s]->sensitive.end(), a);
                int64_t cb = std::count(splits[s]->sensitive.begin(),
                                        splits[s]->sensitive.end(), b);
                if (ca == 0 || cb == 0) {
                    throw std::runtime_error(
                        "certify_multigroup: group " + std::to_string(ca == 0 ? a : b) +
                        " absent from the " + split_names[s] + " split");
                }
            }
            std::string label = "pair(" + std::to_string(a) + "," + std::to_string(b) + ")";
            CertificateReport child = certify_encoded(
                tr.restrict_groups(a, b), va.restrict_groups(a, b), te.restrict_groups(a, b),
                encoder.n_cells(), pair_budget, metric, static_cast<size_t>(label_col), label,
                enc_hash);
            rep.children.push_back(std::move(child));
            if (best < 0 || rep.children.back().t_star_raw > rep.children[best].t_star_raw) {
                best = static_cast<int>(rep.children.size()) - 1;
            }
        }
    }
    rep.s_star = rep.children[best].s_star;
    clamp_stars(rep);
    return rep;
}

}  // namespace faircert
