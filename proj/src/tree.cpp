#include "faircert/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include "json.hpp"

#include "faircert/rng.hpp"

namespace faircert {

using nlohmann::json;

void EncoderConfig::validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0, 1]");
    if (max_leaves < 2) throw std::invalid_argument("max_leaves must be at least 2");
    if (min_leaf_size < 1) throw std::invalid_argument("min_leaf_size must be at least 1");
    if (quantile_orders.empty()) throw std::invalid_argument("quantile_orders must be non-empty");
    for (int q : quantile_orders) {
        if (q < 1) throw std::invalid_argument("quantile orders must be positive");
    }
    if (label_index < 0) throw std::invalid_argument("label_index must be non-negative");
}

double gini_from_counts(const std::vector<int64_t>& counts) {
    int64_t total = 0;
    for (int64_t c : counts) {
        if (c < 0) throw std::invalid_argument("gini_from_counts: negative count");
        total += c;
    }
    if (total == 0) throw std::invalid_argument("gini_from_counts: empty counts");
    double acc = 0.0;
    for (int64_t c : counts) {
        double p = static_cast<double>(c) / static_cast<double>(total);
        acc += p * p;
    }
    return 1.0 - acc;
}

double fair_gini(const std::vector<int64_t>& y_counts, const std::vector<int64_t>& s_counts,
                 double gamma) {
    double gy = gini_from_counts(y_counts);
    double gs = gini_from_counts(s_counts);
    double smax = s_counts.size() > 1 ? 1.0 - 1.0 / static_cast<double>(s_counts.size()) : 0.0;
    return (1.0 - gamma) * gy + gamma * (smax - gs);
}

namespace {

// Joint (label, group) counts of a row set; every criterion value reduces to
// sums over this table.
struct Joint {
    int C = 0, G = 0;
    std::vector<int64_t> cnt;
    int64_t n = 0;

    Joint() = default;
    Joint(int c, int g) : C(c), G(g), cnt(static_cast<size_t>(c) * g, 0) {}

    void add(int y, int s) {
        ++cnt[static_cast<size_t>(y) * G + s];
        ++n;
    }
    void add_joint(const Joint& o) {
        for (size_t i = 0; i < cnt.size(); ++i) cnt[i] += o.cnt[i];
        n += o.n;
    }
    void sub_joint(const Joint& o) {
        for (size_t i = 0; i < cnt.size(); ++i) cnt[i] -= o.cnt[i];
        n -= o.n;
    }
};

double gini_span(const int64_t* c, int len, int64_t total) {
    if (total <= 0) return 0.0;
    double acc = 0.0;
    for (int i = 0; i < len; ++i) {
        double p = static_cast<double>(c[i]) / static_cast<double>(total);
        acc += p * p;
    }
    return 1.0 - acc;
}

// FairGini of one side. For EOpp the group-balance term is evaluated on the
// y=1 rows only (zero such rows -> term drops out); for EO it is the
// row-weighted average of the y=0 and y=1 restrictions.
double criterion_of(const Joint& j, const EncoderConfig& cfg) {
    std::vector<int64_t> yc(j.C, 0), sc(j.G, 0);
    for (int y = 0; y < j.C; ++y) {
        for (int g = 0; g < j.G; ++g) {
            int64_t v = j.cnt[static_cast<size_t>(y) * j.G + g];
            yc[y] += v;
            sc[g] += v;
        }
    }
    double gy = gini_span(yc.data(), j.C, j.n);
    double smax = j.G > 1 ? 1.0 - 1.0 / static_cast<double>(j.G) : 0.0;
    double fair = 0.0;
    switch (cfg.fairness_target) {
        case FairnessTarget::DP:
            fair = smax - gini_span(sc.data(), j.G, j.n);
            break;
        case FairnessTarget::EOpp: {
            const int64_t* row1 = j.cnt.data() + j.G;
            int64_t n1 = 0;
            for (int g = 0; g < j.G; ++g) n1 += row1[g];
            fair = n1 > 0 ? smax - gini_span(row1, j.G, n1) : 0.0;
            break;
        }
        case FairnessTarget::EO: {
            const int64_t* row0 = j.cnt.data();
            const int64_t* row1 = j.cnt.data() + j.G;
            int64_t n0 = 0, n1 = 0;
            for (int g = 0; g < j.G; ++g) {
                n0 += row0[g];
                n1 += row1[g];
            }
            double w = 0.0;
            if (n0 + n1 > 0) {
                w = (static_cast<double>(n0) * gini_span(row0, j.G, n0) +
                     static_cast<double>(n1) * gini_span(row1, j.G, n1)) /
                    static_cast<double>(n0 + n1);
            }
            fair = smax - w;
            break;
        }
    }
    return (1.0 - cfg.gamma) * gy + cfg.gamma * fair;
}

struct CatStat {
    int64_t n = 0, y1 = 0, s1 = 0;
};

std::vector<int> order_from_stats(const std::vector<CatStat>& stat, int q) {
    int n_cat = static_cast<int>(stat.size());
    std::vector<int> present, absent;
    for (int c = 0; c < n_cat; ++c) (stat[c].n > 0 ? present : absent).push_back(c);

    auto p_y = [&](int c) {
        return static_cast<double>(stat[c].y1) / static_cast<double>(stat[c].n);
    };
    auto p_s = [&](int c) {
        return static_cast<double>(stat[c].s1) / static_cast<double>(stat[c].n);
    };
    auto by_py = [&](int a, int b) {
        double pa = p_y(a), pb = p_y(b);
        return pa != pb ? pa < pb : a < b;
    };

    std::vector<int> out;
    out.reserve(n_cat);
    if (q <= 1 || present.size() <= 1) {
        out = present;
        std::sort(out.begin(), out.end(), by_py);
    } else {
        std::vector<int> by_ps = present;
        std::sort(by_ps.begin(), by_ps.end(), [&](int a, int b) {
            double pa = p_s(a), pb = p_s(b);
            return pa != pb ? pa < pb : a < b;
        });
        size_t m = by_ps.size();
        std::vector<std::vector<int>> blocks(q);
        for (int b = 0; b < q; ++b) {
            size_t lo = b * m / q, hi = (b + 1) * m / q;
            blocks[b].assign(by_ps.begin() + lo, by_ps.begin() + hi);
            std::sort(blocks[b].begin(), blocks[b].end(), by_py);
        }
        for (size_t t = 0; out.size() < m; ++t) {
            for (int b = 0; b < q; ++b) {
                if (t < blocks[b].size()) out.push_back(blocks[b][t]);
            }
        }
    }
    out.insert(out.end(), absent.begin(), absent.end());
    return out;
}

std::vector<CatStat> collect_cat_stats(const TabularDataset& ds, const std::vector<size_t>& rows,
                                       int feature, int label_col) {
    int n_cat = static_cast<int>(ds.schema.features[feature].categories.size());
    std::vector<CatStat> stat(n_cat);
    for (size_t r : rows) {
        int c = static_cast<int>(ds.at(r, feature));
        if (c < 0 || c >= n_cat) throw std::out_of_range("category id out of range");
        ++stat[c].n;
        if (ds.label(r, label_col) == 1) ++stat[c].y1;
        if (ds.sens[r] == 1) ++stat[c].s1;
    }
    return stat;
}

struct Cand {
    bool valid = false;
    double value = 0.0;
    SplitRule rule;
};

bool cand_better(const Cand& a, const Cand& b) {
    if (!b.valid) return a.valid;
    if (!a.valid) return false;
    if (a.value != b.value) return a.value < b.value;
    if (a.rule.feature != b.rule.feature) return a.rule.feature < b.rule.feature;
    if (a.rule.is_threshold != b.rule.is_threshold) return a.rule.is_threshold;
    if (a.rule.is_threshold) return a.rule.threshold < b.rule.threshold;
    return std::lexicographical_compare(a.rule.category_set.begin(), a.rule.category_set.end(),
                                        b.rule.category_set.begin(), b.rule.category_set.end());
}

struct SearchResult {
    std::optional<SplitCandidate> best;
    double node_value = 0.0;
};

SearchResult search_split(const TabularDataset& ds, const std::vector<size_t>& rows,
                          const EncoderConfig& cfg, int C, int G) {
    SearchResult res;
    if (rows.empty()) return res;

    Joint node(C, G);
    for (size_t r : rows) node.add(ds.label(r, cfg.label_index), ds.sens[r]);
    res.node_value = criterion_of(node, cfg);
    if (static_cast<int64_t>(rows.size()) < 2 * static_cast<int64_t>(cfg.min_leaf_size)) return res;

    int64_t total = node.n;
    Cand best;
    for (int f = 0; f < static_cast<int>(ds.d()); ++f) {
        const Feature& feat = ds.schema.features[f];
        if (feat.kind == FeatureKind::Continuous) {
            std::vector<std::tuple<double, int, int>> v;
            v.reserve(rows.size());
            for (size_t r : rows) {
                v.emplace_back(ds.at(r, f), ds.label(r, cfg.label_index), ds.sens[r]);
            }
            std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
                return std::get<0>(a) < std::get<0>(b);
            });
            Joint left(C, G), right = node;
            for (size_t i = 0; i + 1 < v.size(); ++i) {
                Joint one(C, G);
                one.add(std::get<1>(v[i]), std::get<2>(v[i]));
                left.add_joint(one);
                right.sub_joint(one);
                double x = std::get<0>(v[i]), nx = std::get<0>(v[i + 1]);
                if (x == nx) continue;
                if (left.n < cfg.min_leaf_size || right.n < cfg.min_leaf_size) continue;
                double mid = x + (nx - x) / 2.0;
                if (!(mid < nx)) mid = x;  // degenerate gap: route the prefix by its own max
                Cand c;
                c.valid = true;
                c.value = (static_cast<double>(left.n) * criterion_of(left, cfg) +
                           static_cast<double>(right.n) * criterion_of(right, cfg)) /
                          static_cast<double>(total);
                c.rule.feature = f;
                c.rule.is_threshold = true;
                c.rule.threshold = mid;
                if (cand_better(c, best)) best = c;
            }
        } else {
            auto stat = collect_cat_stats(ds, rows, f, cfg.label_index);
            std::vector<Joint> cat(stat.size(), Joint(C, G));
            for (size_t r : rows) {
                cat[static_cast<size_t>(ds.at(r, f))].add(ds.label(r, cfg.label_index), ds.sens[r]);
            }
            for (int q : cfg.quantile_orders) {
                auto order = order_from_stats(stat, q);
                Joint left(C, G), right = node;
                std::vector<int> prefix;
                prefix.reserve(order.size());
                for (size_t p = 0; p + 1 < order.size(); ++p) {
                    int cid = order[p];
                    prefix.push_back(cid);
                    left.add_joint(cat[cid]);
                    right.sub_joint(cat[cid]);
                    if (left.n < cfg.min_leaf_size || right.n < cfg.min_leaf_size) continue;
                    Cand c;
                    c.valid = true;
                    c.value = (static_cast<double>(left.n) * criterion_of(left, cfg) +
                               static_cast<double>(right.n) * criterion_of(right, cfg)) /
                              static_cast<double>(total);
                    c.rule.feature = f;
                    c.rule.is_threshold = false;
                    c.rule.category_set = prefix;
                    std::sort(c.rule.category_set.begin(), c.rule.category_set.end());
                    if (cand_better(c, best)) best = c;
                }
            }
        }
    }
    if (best.valid && best.value < res.node_value - 1e-12) {
        res.best = SplitCandidate{best.rule, best.value};
    }
    return res;
}

bool goes_left(const SplitRule& rule, const TabularDataset& ds, size_t row) {
    double x = ds.at(row, rule.feature);
    if (rule.is_threshold) return x <= rule.threshold;
    return std::binary_search(rule.category_set.begin(), rule.category_set.end(),
                              static_cast<int>(x));
}

void check_target_labels(const TabularDataset& ds, const EncoderConfig& cfg) {
    if (cfg.fairness_target != FairnessTarget::DP && ds.n_classes(cfg.label_index) > 2) {
        throw std::invalid_argument("EOpp/EO fairness targets require a binary label");
    }
}

std::string fmt_num(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

json rule_to_json(const SplitRule& r) {
    json j;
    j["feature"] = r.feature;
    if (r.is_threshold) {
        j["threshold"] = r.threshold;
    } else {
        j["categories"] = r.category_set;
    }
    return j;
}

SplitRule rule_from_json(const json& j) {
    SplitRule r;
    r.feature = j.at("feature").get<int>();
    if (j.contains("threshold")) {
        r.is_threshold = true;
        r.threshold = j.at("threshold").get<double>();
    } else {
        r.is_threshold = false;
        r.category_set = j.at("categories").get<std::vector<int>>();
    }
    return r;
}

}  // namespace

std::vector<int> order_categories(const TabularDataset& ds, const std::vector<size_t>& rows,
                                  int feature, int q, int label_col) {
    if (feature < 0 || feature >= static_cast<int>(ds.d())) {
        throw std::invalid_argument("order_categories: bad feature index");
    }
    if (ds.schema.features[feature].kind != FeatureKind::Categorical) {
        throw std::invalid_argument("order_categories: feature is not categorical");
    }
    if (q < 1) throw std::invalid_argument("order_categories: q must be positive");
    return order_from_stats(collect_cat_stats(ds, rows, feature, label_col), q);
}

std::optional<SplitCandidate> best_split(const TabularDataset& ds,
                                         const std::vector<size_t>& rows,
                                         const EncoderConfig& cfg, int n_classes, int n_groups) {
    cfg.validate();
    check_target_labels(ds, cfg);
    return search_split(ds, rows, cfg, std::max(2, n_classes), std::max(1, n_groups)).best;
}

std::optional<SplitCandidate> best_split(const TabularDataset& ds,
                                         const std::vector<size_t>& rows,
                                         const EncoderConfig& cfg) {
    return best_split(ds, rows, cfg, ds.n_classes(cfg.label_index), ds.n_groups());
}

FairTree fit_tree(const TabularDataset& train, const EncoderConfig& cfg) {
    EncoderConfig norm = cfg;
    std::sort(norm.quantile_orders.begin(), norm.quantile_orders.end());
    norm.quantile_orders.erase(
        std::unique(norm.quantile_orders.begin(), norm.quantile_orders.end()),
        norm.quantile_orders.end());
    norm.validate();
    if (train.n() == 0) throw std::invalid_argument("fit_tree: empty training set");
    if (norm.label_index >= static_cast<int>(train.labels.size())) {
        throw std::invalid_argument("fit_tree: label_index out of range");
    }
    if (static_cast<int64_t>(train.n()) < norm.min_leaf_size) {
        throw std::invalid_argument("fit_tree: training set smaller than min_leaf_size");
    }
    if (train.has_missing()) {
        throw std::invalid_argument("fit_tree: training set has missing values; impute first");
    }
    check_target_labels(train, norm);

    int C = std::max(2, train.n_classes(norm.label_index));
    int G = std::max(1, train.n_groups());

    FairTree tree;
    tree.schema = train.schema;
    tree.config = norm;

    std::vector<std::vector<size_t>> node_rows;
    std::vector<std::optional<SplitCandidate>> node_cand;
    std::vector<double> node_gain;
    std::vector<int> parent;
    std::vector<char> from_left;

    auto add_node = [&](std::vector<size_t>&& rows, int par, bool left) {
        tree.nodes.emplace_back();
        node_rows.push_back(std::move(rows));
        node_cand.emplace_back();
        node_gain.push_back(0.0);
        parent.push_back(par);
        from_left.push_back(left);
        return static_cast<int>(tree.nodes.size()) - 1;
    };
    auto consider = [&](int idx) {
        SearchResult sr = search_split(train, node_rows[idx], norm, C, G);
        node_cand[idx] = sr.best;
        if (sr.best) {
            node_gain[idx] = static_cast<double>(node_rows[idx].size()) *
                             (sr.node_value - sr.best->criterion);
        }
    };

    std::vector<size_t> all(train.n());
    for (size_t r = 0; r < all.size(); ++r) all[r] = r;
    consider(add_node(std::move(all), -1, false));

    int leaves = 1;
    while (leaves < norm.max_leaves) {
        int pick = -1;
        for (int i = 0; i < static_cast<int>(tree.nodes.size()); ++i) {
            if (!tree.nodes[i].leaf || !node_cand[i]) continue;
            if (pick < 0 || node_gain[i] > node_gain[pick]) pick = i;
        }
        if (pick < 0) break;
        const SplitRule rule = node_cand[pick]->rule;
        std::vector<size_t> lrows, rrows;
        for (size_t r : node_rows[pick]) (goes_left(rule, train, r) ? lrows : rrows).push_back(r);
        int li = add_node(std::move(lrows), pick, true);
        int ri = add_node(std::move(rrows), pick, false);
        tree.nodes[pick].leaf = false;
        tree.nodes[pick].rule = rule;
        tree.nodes[pick].left = li;
        tree.nodes[pick].right = ri;
        node_rows[pick].clear();
        node_cand[pick].reset();
        consider(li);
        consider(ri);
        ++leaves;
    }

    for (int i = 0; i < static_cast<int>(tree.nodes.size()); ++i) {
        if (!tree.nodes[i].leaf) continue;
        const auto& rows = node_rows[i];
        Cell cell;
        cell.id = static_cast<int>(tree.cells.size()) + 1;
        cell.train_count = static_cast<int64_t>(rows.size());
        cell.representation.resize(train.d());
        for (size_t j = 0; j < train.d(); ++j) {
            if (train.schema.features[j].kind == FeatureKind::Continuous) {
                std::vector<double> vals;
                vals.reserve(rows.size());
                for (size_t r : rows) vals.push_back(train.at(r, j));
                std::sort(vals.begin(), vals.end());
                size_t m = vals.size();
                cell.representation[j] =
                    m % 2 ? vals[m / 2] : vals[m / 2 - 1] + (vals[m / 2] - vals[m / 2 - 1]) / 2.0;
            } else {
                std::vector<int64_t> cnt(train.schema.features[j].categories.size(), 0);
                for (size_t r : rows) ++cnt[static_cast<size_t>(train.at(r, j))];
                size_t mode = 0;
                for (size_t c = 1; c < cnt.size(); ++c) {
                    if (cnt[c] > cnt[mode]) mode = c;
                }
                cell.representation[j] = static_cast<double>(mode);
            }
        }
        std::vector<PathStep> rev;
        for (int cur = i; parent[cur] >= 0; cur = parent[cur]) {
            rev.push_back({tree.nodes[parent[cur]].rule, static_cast<bool>(from_left[cur])});
        }
        cell.path.assign(rev.rbegin(), rev.rend());
        tree.nodes[i].cell = static_cast<int>(tree.cells.size());
        tree.cells.push_back(std::move(cell));
    }
    return tree;
}

int FairTree::route_row(const TabularDataset& ds, size_t row) const {
    if (nodes.empty()) throw std::logic_error("route_row: empty tree");
    int cur = 0;
    while (!nodes[cur].leaf) {
        cur = goes_left(nodes[cur].rule, ds, row) ? nodes[cur].left : nodes[cur].right;
    }
    return nodes[cur].cell;
}

EncodedDataset FairTree::encode(const TabularDataset& ds) const {
    if (ds.schema.hash() != schema.hash()) {
        throw std::invalid_argument("encode: dataset schema does not match the encoder's schema");
    }
    if (ds.has_missing()) {
        throw std::invalid_argument("encode: dataset has missing values; impute first");
    }
    EncodedDataset out;
    out.k = n_cells();
    out.reps.reserve(cells.size());
    for (const auto& c : cells) out.reps.push_back(c.representation);
    out.cell.resize(ds.n());
    for (size_t r = 0; r < ds.n(); ++r) out.cell[r] = route_row(ds, r);
    out.sensitive = ds.sens;
    out.labels = ds.labels;
    return out;
}

std::vector<std::string> FairTree::describe_cell(int cell_id) const {
    if (cell_id < 1 || cell_id > static_cast<int>(cells.size())) {
        throw std::invalid_argument("describe_cell: invalid cell id");
    }
    struct Box {
        bool has_lo = false, has_hi = false;
        double lo = 0.0, hi = 0.0;
        std::vector<char> allowed;  // categorical only
    };
    std::vector<int> order;
    std::unordered_map<int, Box> box;
    for (const PathStep& step : cells[cell_id - 1].path) {
        int f = step.rule.feature;
        auto [it, fresh] = box.try_emplace(f);
        if (fresh) {
            order.push_back(f);
            if (!step.rule.is_threshold) {
                it->second.allowed.assign(schema.features[f].categories.size(), 1);
            }
        }
        Box& b = it->second;
        if (step.rule.is_threshold) {
            double v = step.rule.threshold;
            if (step.went_left) {
                if (!b.has_hi || v < b.hi) b.hi = v;
                b.has_hi = true;
            } else {
                if (!b.has_lo || v > b.lo) b.lo = v;
                b.has_lo = true;
            }
        } else {
            std::vector<char> in_set(schema.features[f].categories.size(), 0);
            for (int c : step.rule.category_set) in_set[c] = 1;
            for (size_t c = 0; c < b.allowed.size(); ++c) {
                if (step.went_left ? !in_set[c] : in_set[c]) b.allowed[c] = 0;
            }
        }
    }
    std::vector<std::string> out;
    for (int f : order) {
        const Box& b = box[f];
        const std::string& name = schema.features[f].name;
        if (schema.features[f].kind == FeatureKind::Continuous) {
            if (b.has_lo) out.push_back(name + " > " + fmt_num(b.lo));
            if (b.has_hi) out.push_back(name + " <= " + fmt_num(b.hi));
        } else {
            std::string s = name + " in {";
            bool first = true;
            for (size_t c = 0; c < b.allowed.size(); ++c) {
                if (!b.allowed[c]) continue;
                if (!first) s += ", ";
                s += schema.features[f].categories[c];
                first = false;
            }
            s += "}";
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::string FairTree::to_json_string() const {
    json j;
    j["format"] = "fair-tree-encoder";
    j["version"] = 1;
    j["schema_hash"] = hex64(schema.hash());
    json jc;
    jc["gamma"] = config.gamma;
    jc["max_leaves"] = config.max_leaves;
    jc["min_leaf_size"] = config.min_leaf_size;
    jc["quantile_orders"] = config.quantile_orders;
    jc["fairness_target"] = fairness_target_name(config.fairness_target);
    jc["seed"] = config.seed;
    jc["label_index"] = config.label_index;
    j["config"] = jc;
    j["nodes"] = json::array();
    for (const TreeNode& node : nodes) {
        json jn;
        if (node.leaf) {
            jn["cell"] = node.cell;
        } else {
            jn = rule_to_json(node.rule);
            jn["left"] = node.left;
            jn["right"] = node.right;
        }
        j["nodes"].push_back(std::move(jn));
    }
    j["cells"] = json::array();
    for (const Cell& c : cells) {
        json jc2;
        jc2["id"] = c.id;
        jc2["train_count"] = c.train_count;
        jc2["representation"] = c.representation;
        jc2["path"] = json::array();
        for (const PathStep& st : c.path) {
            json js = rule_to_json(st.rule);
            js["left"] = st.went_left;
            jc2["path"].push_back(std::move(js));
        }
        j["cells"].push_back(std::move(jc2));
    }
    return j.dump(2);
}

FairTree FairTree::from_json_string(const std::string& text, const FeatureSchema& schema) {
    json j = json::parse(text);
    if (j.value("format", "") != "fair-tree-encoder") {
        throw std::invalid_argument("not a fair-tree encoder file");
    }
    if (j.value("version", 0) != 1) throw std::invalid_argument("unsupported encoder version");
    if (j.value("schema_hash", "") != hex64(schema.hash())) {
        throw std::invalid_argument("encoder schema hash does not match the given schema");
    }
    FairTree tree;
    tree.schema = schema;
    const json& jc = j.at("config");
    tree.config.gamma = jc.at("gamma").get<double>();
    tree.config.max_leaves = jc.at("max_leaves").get<int>();
    tree.config.min_leaf_size = jc.at("min_leaf_size").get<int>();
    tree.config.quantile_orders = jc.at("quantile_orders").get<std::vector<int>>();
    tree.config.fairness_target = fairness_target_from_name(jc.at("fairness_target").get<std::string>());
    tree.config.seed = jc.at("seed").get<uint64_t>();
    tree.config.label_index = jc.at("label_index").get<int>();
    for (const json& jn : j.at("nodes")) {
        TreeNode node;
        if (jn.contains("cell")) {
            node.leaf = true;
            node.cell = jn.at("cell").get<int>();
        } else {
            node.leaf = false;
            node.rule = rule_from_json(jn);
            node.left = jn.at("left").get<int>();
            node.right = jn.at("right").get<int>();
            if (node.left < 0 || node.right < 0) throw std::invalid_argument("bad child index");
        }
        tree.nodes.push_back(std::move(node));
    }
    for (const json& jc2 : j.at("cells")) {
        Cell c;
        c.id = jc2.at("id").get<int>();
        c.train_count = jc2.at("train_count").get<int64_t>();
        c.representation = jc2.at("representation").get<std::vector<double>>();
        for (const json& js : jc2.at("path")) {
            PathStep st;
            st.rule = rule_from_json(js);
            st.went_left = js.at("left").get<bool>();
            c.path.push_back(std::move(st));
        }
        tree.cells.push_back(std::move(c));
    }
    for (const TreeNode& node : tree.nodes) {
        if (!node.leaf && (node.left >= static_cast<int>(tree.nodes.size()) ||
                           node.right >= static_cast<int>(tree.nodes.size()))) {
            throw std::invalid_argument("bad child index");
        }
        if (node.leaf && (node.cell < 0 || node.cell >= static_cast<int>(tree.cells.size()))) {
            throw std::invalid_argument("bad cell index");
        }
    }
    return tree;
}

void FairTree::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << to_json_string() << "\n";
}

FairTree FairTree::load(const std::string& path, const FeatureSchema& schema) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str(), schema);
}

}  // namespace faircert
