#include "faircert/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "faircert/rng.hpp"

namespace faircert {

using nlohmann::json;

namespace {

double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

}  // namespace

int KMeansEncoder::embedded_dim() const {
    int e = 0;
    for (const Feature& f : schema.features) {
        e += f.kind == FeatureKind::Continuous ? 1 : static_cast<int>(f.categories.size());
    }
    return e;
}

std::vector<double> KMeansEncoder::embed_row(const TabularDataset& ds, size_t row) const {
    std::vector<double> x;
    x.reserve(embedded_dim());
    for (size_t j = 0; j < ds.d(); ++j) {
        if (schema.features[j].kind == FeatureKind::Continuous) {
            x.push_back((ds.at(row, j) - mean[j]) / scale[j]);
        } else {
            size_t c = static_cast<size_t>(ds.at(row, j));
            for (size_t v = 0; v < schema.features[j].categories.size(); ++v) {
                x.push_back(v == c ? 1.0 : 0.0);
            }
        }
    }
    return x;
}

int KMeansEncoder::nearest_center(const std::vector<double>& x) const {
    int best = 0;
    double best_d = sqdist(x, centers[0]);
    for (int c = 1; c < static_cast<int>(centers.size()); ++c) {
        double d = sqdist(x, centers[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

KMeansEncoder fit_kmeans(const TabularDataset& train, int k, uint64_t seed, int max_iters) {
    if (k < 1) throw std::invalid_argument("fit_kmeans: k must be at least 1");
    if (max_iters < 1) throw std::invalid_argument("fit_kmeans: max_iters must be at least 1");
    if (train.n() == 0) throw std::invalid_argument("fit_kmeans: empty training set");
    if (train.has_missing()) {
        throw std::invalid_argument("fit_kmeans: training set has missing values; impute first");
    }

    KMeansEncoder enc;
    enc.schema = train.schema;
    enc.k = k;
    enc.seed = seed;
    enc.max_iters = max_iters;
    enc.mean.assign(train.d(), 0.0);
    enc.scale.assign(train.d(), 1.0);
    size_t n = train.n();
    for (size_t j = 0; j < train.d(); ++j) {
        if (train.schema.features[j].kind != FeatureKind::Continuous) continue;
        double m = 0.0;
        for (size_t r = 0; r < n; ++r) m += train.at(r, j);
        m /= static_cast<double>(n);
        double var = 0.0;
        for (size_t r = 0; r < n; ++r) {
            double diff = train.at(r, j) - m;
            var += diff * diff;
        }
        double sd = std::sqrt(var / static_cast<double>(n));
        enc.mean[j] = m;
        enc.scale[j] = sd < 1e-12 ? 1.0 : sd;
    }

    std::vector<std::vector<double>> rows(n);
    for (size_t r = 0; r < n; ++r) rows[r] = enc.embed_row(train, r);
    std::set<std::vector<double>> distinct(rows.begin(), rows.end());
    if (static_cast<size_t>(k) > distinct.size()) {
        throw std::invalid_argument("fit_kmeans: k exceeds the number of distinct rows");
    }

    auto rng = make_rng(seed, "init");
    size_t start = static_cast<size_t>(bounded(rng, n));
    enc.centers.push_back(rows[start]);
    std::vector<double> min_d(n);
    for (size_t r = 0; r < n; ++r) min_d[r] = sqdist(rows[r], enc.centers[0]);
    while (static_cast<int>(enc.centers.size()) < k) {
        size_t far = 0;
        for (size_t r = 1; r < n; ++r) {
            if (min_d[r] > min_d[far]) far = r;
        }
        enc.centers.push_back(rows[far]);
        for (size_t r = 0; r < n; ++r) min_d[r] = std::min(min_d[r], sqdist(rows[r], enc.centers.back()));
    }

    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < max_iters; ++iter) {
        std::vector<int> next(n);
        double wcss = 0.0;
        for (size_t r = 0; r < n; ++r) {
            next[r] = enc.nearest_center(rows[r]);
            wcss += sqdist(rows[r], enc.centers[next[r]]);
        }
        enc.wcss_trace.push_back(wcss);
        if (next == assign) break;
        assign = std::move(next);

        int e = enc.embedded_dim();
        std::vector<std::vector<double>> sums(k, std::vector<double>(e, 0.0));
        std::vector<int64_t> counts(k, 0);
        for (size_t r = 0; r < n; ++r) {
            ++counts[assign[r]];
            for (int i = 0; i < e; ++i) sums[assign[r]][i] += rows[r][i];
        }
        std::vector<std::vector<double>> old = enc.centers;
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (int i = 0; i < e; ++i) enc.centers[c][i] = sums[c][i] / static_cast<double>(counts[c]);
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            size_t far = 0;
            double far_d = -1.0;
            for (size_t r = 0; r < n; ++r) {
                double d = sqdist(rows[r], old[c]);
                if (d > far_d) {
                    far_d = d;
                    far = r;
                }
            }
            enc.centers[c] = rows[far];
        }
    }
    return enc;
}

EncodedDataset KMeansEncoder::encode(const TabularDataset& ds) const {
    if (ds.schema.hash() != schema.hash()) {
        throw std::invalid_argument("encode: dataset schema does not match the encoder's schema");
    }
    if (ds.has_missing()) {
        throw std::invalid_argument("encode: dataset has missing values; impute first");
    }
    EncodedDataset out;
    out.k = n_cells();
    out.reps = centers;
    out.cell.resize(ds.n());
    for (size_t r = 0; r < ds.n(); ++r) out.cell[r] = nearest_center(embed_row(ds, r));
    out.sensitive = ds.sens;
    out.labels = ds.labels;
    return out;
}

std::string KMeansEncoder::to_json_string() const {
    json j;
    j["format"] = "kmeans-encoder";
    j["version"] = 1;
    j["schema_hash"] = hex64(schema.hash());
    j["k"] = k;
    j["seed"] = seed;
    j["max_iters"] = max_iters;
    j["scaling"]["mean"] = mean;
    j["scaling"]["scale"] = scale;
    j["centers"] = centers;
    return j.dump(2);
}

KMeansEncoder KMeansEncoder::from_json_string(const std::string& text,
                                              const FeatureSchema& schema) {
    json j = json::parse(text);
    if (j.value("format", "") != "kmeans-encoder") {
        throw std::invalid_argument("not a kmeans encoder file");
    }
    if (j.value("version", 0) != 1) throw std::invalid_argument("unsupported encoder version");
    if (j.value("schema_hash", "") != hex64(schema.hash())) {
        throw std::invalid_argument("encoder schema hash does not match the given schema");
    }
    KMeansEncoder enc;
    enc.schema = schema;
    enc.k = j.at("k").get<int>();
    enc.seed = j.at("seed").get<uint64_t>();
    enc.max_iters = j.at("max_iters").get<int>();
    enc.mean = j.at("scaling").at("mean").get<std::vector<double>>();
    enc.scale = j.at("scaling").at("scale").get<std::vector<double>>();
    enc.centers = j.at("centers").get<std::vector<std::vector<double>>>();
    if (enc.centers.empty()) throw std::invalid_argument("kmeans encoder has no centers");
    for (const auto& c : enc.centers) {
        if (static_cast<int>(c.size()) != enc.embedded_dim()) {
            throw std::invalid_argument("kmeans center dimension mismatch");
        }
    }
    return enc;
}

void KMeansEncoder::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << to_json_string() << "\n";
}

KMeansEncoder KMeansEncoder::load(const std::string& path, const FeatureSchema& schema) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str(), schema);
}

}  // namespace faircert
