#include "faircert/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "faircert/metrics.hpp"
#include "faircert/rng.hpp"

namespace faircert {

std::string downstream_kind_name(DownstreamKind k) {
    switch (k) {
        case DownstreamKind::Logistic: return "logistic";
        case DownstreamKind::OneHiddenNN: return "one_hidden_nn";
        case DownstreamKind::DecisionTree: return "decision_tree";
    }
    throw std::logic_error("unknown classifier kind");
}

DownstreamKind downstream_kind_from_name(const std::string& name) {
    if (name == "logistic") return DownstreamKind::Logistic;
    if (name == "one_hidden_nn") return DownstreamKind::OneHiddenNN;
    if (name == "decision_tree") return DownstreamKind::DecisionTree;
    throw std::invalid_argument("unknown classifier kind '" + name + "'");
}

namespace {

struct Rows {
    size_t n = 0, d = 0;
    std::vector<double> a;  // row-major

    double* row(size_t r) { return a.data() + r * d; }
    const double* row(size_t r) const { return a.data() + r * d; }
};

Rows embed_rows(const EncodedDataset& e) {
    Rows x;
    x.n = e.n_rows();
    x.d = e.reps.empty() ? 0 : e.reps[0].size();
    x.a.resize(x.n * x.d);
    for (size_t r = 0; r < x.n; ++r) {
        const auto& rep = e.reps[e.cell[r]];
        std::copy(rep.begin(), rep.end(), x.row(r));
    }
    return x;
}

void standardize(Rows& train, Rows& test) {
    for (size_t j = 0; j < train.d; ++j) {
        double m = 0.0;
        for (size_t r = 0; r < train.n; ++r) m += train.row(r)[j];
        m /= static_cast<double>(train.n);
        double var = 0.0;
        for (size_t r = 0; r < train.n; ++r) {
            double diff = train.row(r)[j] - m;
            var += diff * diff;
        }
        double sd = std::sqrt(var / static_cast<double>(train.n));
        if (sd < 1e-12) sd = 1.0;
        for (size_t r = 0; r < train.n; ++r) train.row(r)[j] = (train.row(r)[j] - m) / sd;
        for (size_t r = 0; r < test.n; ++r) test.row(r)[j] = (test.row(r)[j] - m) / sd;
    }
}

double symmetric_uniform(std::mt19937_64& rng, double scale) {
    return (2.0 * unit_real(rng) - 1.0) * scale;
}

// Linear softmax model, cross-entropy loss, full-batch gradient descent.
struct Linear {
    int C = 0, d = 0;
    std::vector<double> w;  // C x (d+1), bias last

    int predict(const double* x) const {
        int best = 0;
        double best_v = 0.0;
        for (int c = 0; c < C; ++c) {
            double v = w[c * (d + 1) + d];
            for (int j = 0; j < d; ++j) v += w[c * (d + 1) + j] * x[j];
            if (c == 0 || v > best_v) {
                best_v = v;
                best = c;
            }
        }
        return best;
    }
};

Linear train_linear(const Rows& x, const std::vector<int>& y, int C, std::mt19937_64& rng,
                    double lr, int iters) {
    Linear m;
    m.C = C;
    m.d = static_cast<int>(x.d);
    int stride = m.d + 1;
    m.w.resize(static_cast<size_t>(C) * stride);
    for (double& v : m.w) v = symmetric_uniform(rng, 0.01);

    std::vector<double> logits(C), grad(m.w.size());
    for (int it = 0; it < iters; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (size_t r = 0; r < x.n; ++r) {
            const double* xr = x.row(r);
            double mx = 0.0;
            for (int c = 0; c < C; ++c) {
                double v = m.w[c * stride + m.d];
                for (int j = 0; j < m.d; ++j) v += m.w[c * stride + j] * xr[j];
                logits[c] = v;
                if (c == 0 || v > mx) mx = v;
            }
            double z = 0.0;
            for (int c = 0; c < C; ++c) z += std::exp(logits[c] - mx);
            for (int c = 0; c < C; ++c) {
                double g = std::exp(logits[c] - mx) / z - (c == y[r] ? 1.0 : 0.0);
                for (int j = 0; j < m.d; ++j) grad[c * stride + j] += g * xr[j];
                grad[c * stride + m.d] += g;
            }
        }
        double step = lr / static_cast<double>(x.n);
        for (size_t i = 0; i < m.w.size(); ++i) m.w[i] -= step * grad[i];
    }
    return m;
}

// One hidden ReLU layer, softmax output, full-batch gradient descent.
struct Net {
    int H = 0, C = 0, d = 0;
    std::vector<double> w1;  // H x (d+1)
    std::vector<double> w2;  // C x (H+1)

    int predict(const double* x, std::vector<double>& h) const {
        for (int u = 0; u < H; ++u) {
            double v = w1[u * (d + 1) + d];
            for (int j = 0; j < d; ++j) v += w1[u * (d + 1) + j] * x[j];
            h[u] = v > 0.0 ? v : 0.0;
        }
        int best = 0;
        double best_v = 0.0;
        for (int c = 0; c < C; ++c) {
            double v = w2[c * (H + 1) + H];
            for (int u = 0; u < H; ++u) v += w2[c * (H + 1) + u] * h[u];
            if (c == 0 || v > best_v) {
                best_v = v;
                best = c;
            }
        }
        return best;
    }
};

Net train_net(const Rows& x, const std::vector<int>& y, int C, int H, std::mt19937_64& rng,
              double lr, int iters) {
    Net m;
    m.H = H;
    m.C = C;
    m.d = static_cast<int>(x.d);
    int s1 = m.d + 1, s2 = H + 1;
    m.w1.resize(static_cast<size_t>(H) * s1);
    m.w2.resize(static_cast<size_t>(C) * s2);
    double a1 = std::sqrt(2.0 / s1), a2 = std::sqrt(2.0 / s2);
    for (double& v : m.w1) v = symmetric_uniform(rng, a1);
    for (double& v : m.w2) v = symmetric_uniform(rng, a2);

    std::vector<double> h(H), pre(H), logits(C), g1(m.w1.size()), g2(m.w2.size());
    for (int it = 0; it < iters; ++it) {
        std::fill(g1.begin(), g1.end(), 0.0);
        std::fill(g2.begin(), g2.end(), 0.0);
        for (size_t r = 0; r < x.n; ++r) {
            const double* xr = x.row(r);
            for (int u = 0; u < H; ++u) {
                double v = m.w1[u * s1 + m.d];
                for (int j = 0; j < m.d; ++j) v += m.w1[u * s1 + j] * xr[j];
                pre[u] = v;
                h[u] = v > 0.0 ? v : 0.0;
            }
            double mx = 0.0;
            for (int c = 0; c < C; ++c) {
                double v = m.w2[c * s2 + H];
                for (int u = 0; u < H; ++u) v += m.w2[c * s2 + u] * h[u];
                logits[c] = v;
                if (c == 0 || v > mx) mx = v;
            }
            double z = 0.0;
            for (int c = 0; c < C; ++c) z += std::exp(logits[c] - mx);
            for (int c = 0; c < C; ++c) {
                double gc = std::exp(logits[c] - mx) / z - (c == y[r] ? 1.0 : 0.0);
                for (int u = 0; u < H; ++u) g2[c * s2 + u] += gc * h[u];
                g2[c * s2 + H] += gc;
            }
            for (int u = 0; u < H; ++u) {
                if (pre[u] <= 0.0) continue;
                double gu = 0.0;
                for (int c = 0; c < C; ++c) {
                    gu += (std::exp(logits[c] - mx) / z - (c == y[r] ? 1.0 : 0.0)) *
                          m.w2[c * s2 + u];
                }
                for (int j = 0; j < m.d; ++j) g1[u * s1 + j] += gu * xr[j];
                g1[u * s1 + m.d] += gu;
            }
        }
        double step = lr / static_cast<double>(x.n);
        for (size_t i = 0; i < m.w1.size(); ++i) m.w1[i] -= step * g1[i];
        for (size_t i = 0; i < m.w2.size(); ++i) m.w2[i] -= step * g2[i];
    }
    return m;
}

// Depth-capped plain-Gini CART on the representation vectors.
struct CartNode {
    int feature = -1;
    double thr = 0.0;
    int left = -1, right = -1;
    int cls = -1;
};

struct Cart {
    std::vector<CartNode> nodes;

    int predict(const double* x) const {
        int cur = 0;
        while (nodes[cur].cls < 0) {
            cur = x[nodes[cur].feature] <= nodes[cur].thr ? nodes[cur].left : nodes[cur].right;
        }
        return nodes[cur].cls;
    }
};

double gini_of(const std::vector<int64_t>& cnt, int64_t n) {
    double acc = 0.0;
    for (int64_t c : cnt) {
        double p = static_cast<double>(c) / static_cast<double>(n);
        acc += p * p;
    }
    return 1.0 - acc;
}

int cart_build(Cart& t, const Rows& x, const std::vector<int>& y, int C,
               std::vector<size_t>& idx, int depth, int max_depth) {
    std::vector<int64_t> cnt(C, 0);
    for (size_t r : idx) ++cnt[y[r]];
    int64_t n = static_cast<int64_t>(idx.size());
    int maj = 0;
    for (int c = 1; c < C; ++c) {
        if (cnt[c] > cnt[maj]) maj = c;
    }
    int node = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    double node_gini = gini_of(cnt, n);
    if (depth >= max_depth || node_gini == 0.0 || n < 2) {
        t.nodes[node].cls = maj;
        return node;
    }
    int best_f = -1;
    double best_v = 0.0, best_thr = 0.0;
    for (size_t f = 0; f < x.d; ++f) {
        std::vector<std::pair<double, int>> v;
        v.reserve(idx.size());
        for (size_t r : idx) v.emplace_back(x.row(r)[f], y[r]);
        std::sort(v.begin(), v.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<int64_t> lc(C, 0), rc = cnt;
        for (size_t i = 0; i + 1 < v.size(); ++i) {
            ++lc[v[i].second];
            --rc[v[i].second];
            if (v[i].first == v[i + 1].first) continue;
            int64_t nl = static_cast<int64_t>(i) + 1, nr = n - nl;
            double val = (static_cast<double>(nl) * gini_of(lc, nl) +
                          static_cast<double>(nr) * gini_of(rc, nr)) /
                         static_cast<double>(n);
            if (best_f < 0 || val < best_v) {
                best_f = static_cast<int>(f);
                best_v = val;
                best_thr = v[i].first + (v[i + 1].first - v[i].first) / 2.0;
                if (!(best_thr < v[i + 1].first)) best_thr = v[i].first;
            }
        }
    }
    if (best_f < 0 || best_v >= node_gini - 1e-12) {
        t.nodes[node].cls = maj;
        return node;
    }
    std::vector<size_t> li, ri;
    for (size_t r : idx) (x.row(r)[best_f] <= best_thr ? li : ri).push_back(r);
    idx.clear();
    idx.shrink_to_fit();
    t.nodes[node].feature = best_f;
    t.nodes[node].thr = best_thr;
    int l = cart_build(t, x, y, C, li, depth + 1, max_depth);
    t.nodes[node].left = l;
    int r = cart_build(t, x, y, C, ri, depth + 1, max_depth);
    t.nodes[node].right = r;
    return node;
}

}  // namespace

EvalReport train_downstream(const EncodedDataset& train, const EncodedDataset& test,
                            DownstreamKind kind, DownstreamTarget target, int repetitions,
                            uint64_t seed, int hidden_units, int label_col) {
    if (repetitions < 1) throw std::invalid_argument("train_downstream: repetitions must be >= 1");
    if (train.n_rows() == 0 || test.n_rows() == 0) {
        throw std::invalid_argument("train_downstream: empty split");
    }
    if (label_col < 0 || static_cast<size_t>(label_col) >= train.labels.size()) {
        throw std::invalid_argument("train_downstream: label column out of range");
    }
    if (kind == DownstreamKind::OneHiddenNN && hidden_units < 1) {
        throw std::invalid_argument("train_downstream: hidden_units must be >= 1");
    }

    const std::vector<int>& y_train =
        target == DownstreamTarget::Label ? train.labels[label_col] : train.sensitive;
    const std::vector<int>& y_test =
        target == DownstreamTarget::Label ? test.labels[label_col] : test.sensitive;
    int C = 0;
    for (int v : y_train) {
        if (v < 0) throw std::invalid_argument("train_downstream: negative target value");
        C = std::max(C, v + 1);
    }
    int64_t first_cnt = std::count(y_train.begin(), y_train.end(), y_train[0]);
    if (C < 2 || first_cnt == static_cast<int64_t>(y_train.size())) {
        throw std::invalid_argument("train_downstream: degenerate single-class target");
    }

    Rows xtr = embed_rows(train), xte = embed_rows(test);
    standardize(xtr, xte);

    EvalReport rep;
    rep.classifier = downstream_kind_name(kind);
    if (kind == DownstreamKind::OneHiddenNN) {
        rep.classifier += "_" + std::to_string(hidden_units);
    }
    rep.target = target == DownstreamTarget::Label ? "label" : "group";
    rep.repetitions = repetitions;
    rep.seed = seed;

    bool eopp_ok = true, eo_ok = true;
    double eopp_max = 0.0, eo_max = 0.0;
    for (int r = 0; r < repetitions; ++r) {
        auto rng = make_rng(seed, "classifier", static_cast<uint64_t>(r));
        std::vector<int> pred(xte.n);
        switch (kind) {
            case DownstreamKind::Logistic: {
                Linear m = train_linear(xtr, y_train, C, rng, 0.5, 400);
                for (size_t i = 0; i < xte.n; ++i) pred[i] = m.predict(xte.row(i));
                break;
            }
            case DownstreamKind::OneHiddenNN: {
                Net m = train_net(xtr, y_train, C, hidden_units, rng, 0.2, 250);
                std::vector<double> h(hidden_units);
                for (size_t i = 0; i < xte.n; ++i) pred[i] = m.predict(xte.row(i), h);
                break;
            }
            case DownstreamKind::DecisionTree: {
                Cart t;
                std::vector<size_t> idx(xtr.n);
                for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
                cart_build(t, xtr, y_train, C, idx, 0, 5);
                for (size_t i = 0; i < xte.n; ++i) pred[i] = t.predict(xte.row(i));
                break;
            }
        }
        int64_t hits = 0;
        for (size_t i = 0; i < xte.n; ++i) {
            if (pred[i] == y_test[i]) ++hits;
        }
        rep.accuracy += static_cast<double>(hits) / static_cast<double>(xte.n);

        PredictionSet ps{pred, test.sensitive, test.labels[label_col]};
        rep.dp = std::max(rep.dp, dp_distance(ps));
        if (eopp_ok) {
            try {
                eopp_max = std::max(eopp_max, eopp_distance(ps));
            } catch (const std::invalid_argument&) {
                eopp_ok = false;
            }
        }
        if (eo_ok) {
            try {
                eo_max = std::max(eo_max, eo_distance(ps));
            } catch (const std::invalid_argument&) {
                eo_ok = false;
            }
        }
    }
    rep.accuracy /= static_cast<double>(repetitions);
    if (eopp_ok) rep.eopp = eopp_max;
    if (eo_ok) rep.eo = eo_max;
    return rep;
}

}  // namespace faircert
