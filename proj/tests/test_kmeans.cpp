#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "faircert/kmeans.hpp"
#include "faircert/rng.hpp"

using namespace faircert;

namespace {

TabularDataset blobs(int n_per, double gap, uint64_t seed) {
    TabularDataset ds;
    ds.schema.features = {{"u", FeatureKind::Continuous, {}}, {"v", FeatureKind::Continuous, {}}};
    ds.schema.sensitive_column = "s";
    ds.schema.label_columns = {"y"};
    ds.labels.resize(1);
    std::mt19937_64 rng = make_rng(seed, "blobs");
    for (int b = 0; b < 2; ++b) {
        for (int i = 0; i < n_per; ++i) {
            ds.feat.push_back(b * gap + unit_real(rng));
            ds.feat.push_back(b * gap + unit_real(rng));
            ds.sens.push_back(int(bounded(rng, 2)));
            ds.labels[0].push_back(b);
        }
    }
    return ds;
}

double wcss_of(const KMeansEncoder& enc, const TabularDataset& ds, const std::vector<int>& assign) {
    double total = 0.0;
    for (size_t r = 0; r < ds.n(); ++r) {
        std::vector<double> x = enc.embed_row(ds, r);
        const std::vector<double>& c = enc.centers[assign[r]];
        for (size_t j = 0; j < x.size(); ++j) total += (x[j] - c[j]) * (x[j] - c[j]);
    }
    return total;
}

}  // namespace

TEST_CASE("single cluster sits at the embedded mean") {
    TabularDataset ds = blobs(50, 4.0, 1);
    KMeansEncoder enc = fit_kmeans(ds, 1, 9);
    REQUIRE(enc.centers.size() == 1);
    std::vector<double> mean(enc.embedded_dim(), 0.0);
    for (size_t r = 0; r < ds.n(); ++r) {
        std::vector<double> x = enc.embed_row(ds, r);
        for (size_t j = 0; j < x.size(); ++j) mean[j] += x[j] / double(ds.n());
    }
    for (size_t j = 0; j < mean.size(); ++j) {
        CHECK(enc.centers[0][j] == doctest::Approx(mean[j]).scale(1).epsilon(1e-9));
    }
}

TEST_CASE("k repeated points are recovered exactly") {
    TabularDataset ds;
    ds.schema.features = {{"u", FeatureKind::Continuous, {}}};
    ds.schema.sensitive_column = "s";
    ds.schema.label_columns = {"y"};
    ds.labels.resize(1);
    for (int rep = 0; rep < 7; ++rep) {
        for (double v : {-2.0, 0.5, 3.0, 9.0}) {
            ds.feat.push_back(v);
            ds.sens.push_back(rep % 2);
            ds.labels[0].push_back(v > 1 ? 1 : 0);
        }
    }
    KMeansEncoder enc = fit_kmeans(ds, 4, 3);
    EncodedDataset out = enc.encode(ds);
    std::vector<double> center_vals;
    for (const auto& c : enc.centers) center_vals.push_back(c[0]);
    std::set<double> point_set;
    for (size_t r = 0; r < ds.n(); ++r) point_set.insert(enc.embed_row(ds, r)[0]);
    std::vector<double> point_vals(point_set.begin(), point_set.end());
    std::sort(center_vals.begin(), center_vals.end());
    REQUIRE(center_vals.size() == point_vals.size());
    for (size_t i = 0; i < point_vals.size(); ++i) {
        CHECK(center_vals[i] == doctest::Approx(point_vals[i]).scale(1).epsilon(1e-12));
    }
    // Identical rows always share a cell.
    for (size_t r = 4; r < ds.n(); ++r) CHECK(out.cell[r] == out.cell[r % 4]);

    SUBCASE("k beyond the distinct rows is rejected") {
        CHECK_THROWS_WITH(fit_kmeans(ds, 5, 3),
                          "fit_kmeans: k exceeds the number of distinct rows");
    }
}

TEST_CASE("objective beats random assignments and never rises") {
    TabularDataset ds = blobs(80, 6.0, 4);
    KMeansEncoder enc = fit_kmeans(ds, 2, 11);
    EncodedDataset out = enc.encode(ds);
    double fitted = wcss_of(enc, ds, out.cell);

    std::mt19937_64 rng = make_rng(12, "baseline");
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> assign(ds.n());
        for (auto& a : assign) a = int(bounded(rng, 2));
        KMeansEncoder random_centers = enc;
        // Centers of the random assignment, so the baseline is coherent.
        std::vector<std::vector<double>> sums(2, std::vector<double>(enc.embedded_dim(), 0.0));
        std::vector<int> counts(2, 0);
        for (size_t r = 0; r < ds.n(); ++r) {
            std::vector<double> x = enc.embed_row(ds, r);
            for (size_t j = 0; j < x.size(); ++j) sums[assign[r]][j] += x[j];
            counts[assign[r]] += 1;
        }
        for (int c = 0; c < 2; ++c) {
            if (counts[c] == 0) continue;
            for (auto& v : sums[c]) v /= counts[c];
        }
        random_centers.centers = sums;
        CHECK(fitted <= wcss_of(random_centers, ds, assign) + 1e-9);
    }

    SUBCASE("the recorded objective trace is non-increasing") {
        REQUIRE(!enc.wcss_trace.empty());
        for (size_t i = 1; i < enc.wcss_trace.size(); ++i) {
            CHECK(enc.wcss_trace[i] <= enc.wcss_trace[i - 1] + 1e-9);
        }
    }

    SUBCASE("the two blobs separate") {
        int mismatched = 0;
        for (size_t r = 0; r < ds.n(); ++r) {
            if (out.cell[r] != out.cell[0] && ds.label(r) == ds.label(0)) mismatched += 1;
            if (out.cell[r] == out.cell[0] && ds.label(r) != ds.label(0)) mismatched += 1;
        }
        CHECK(mismatched == 0);
    }
}

TEST_CASE("ties go to the lowest center index") {
    TabularDataset ds;
    ds.schema.features = {{"u", FeatureKind::Continuous, {}}};
    ds.schema.sensitive_column = "s";
    ds.schema.label_columns = {"y"};
    ds.labels.resize(1);
    for (double v : {0.0, 0.0, 0.0, 10.0, 10.0, 10.0}) {
        ds.feat.push_back(v);
        ds.sens.push_back(0);
        ds.labels[0].push_back(0);
    }
    KMeansEncoder enc = fit_kmeans(ds, 2, 0);
    std::vector<double> midpoint(1, 0.5 * (enc.centers[0][0] + enc.centers[1][0]));
    CHECK(enc.nearest_center(midpoint) == 0);
}

TEST_CASE("categorical one-hot embedding and duplication invariance") {
    TabularDataset ds;
    ds.schema.features = {{"u", FeatureKind::Continuous, {}},
                          {"c", FeatureKind::Categorical, {"p", "q", "r"}}};
    ds.schema.sensitive_column = "s";
    ds.schema.label_columns = {"y"};
    ds.labels.resize(1);
    std::mt19937_64 rng = make_rng(21, "kmtest");
    for (int i = 0; i < 90; ++i) {
        ds.feat.push_back(unit_real(rng) * 3.0);
        ds.feat.push_back(double(i % 3));
        ds.sens.push_back(int(bounded(rng, 2)));
        ds.labels[0].push_back(int(bounded(rng, 2)));
    }
    KMeansEncoder enc = fit_kmeans(ds, 3, 17);
    CHECK(enc.embedded_dim() == 4);  // 1 continuous + 3 one-hot

    EncodedDataset base = enc.encode(ds);
    TabularDataset doubled = duplicate(ds, 2);
    EncodedDataset dup = enc.encode(doubled);
    for (size_t r = 0; r < ds.n(); ++r) {
        CHECK(dup.cell[r] == base.cell[r]);
        CHECK(dup.cell[r + ds.n()] == base.cell[r]);
    }

    SUBCASE("serialization round trip") {
        std::string text = enc.to_json_string();
        KMeansEncoder back = KMeansEncoder::from_json_string(text, ds.schema);
        CHECK(back.to_json_string() == text);
        EncodedDataset again = back.encode(ds);
        CHECK(again.cell == base.cell);
        FeatureSchema other = ds.schema;
        other.sensitive_column = "zz";
        CHECK_THROWS(KMeansEncoder::from_json_string(text, other));
    }

    SUBCASE("fit is deterministic in the seed") {
        KMeansEncoder again = fit_kmeans(ds, 3, 17);
        CHECK(again.to_json_string() == enc.to_json_string());
        KMeansEncoder shifted = fit_kmeans(ds, 3, 18);
        // A different seed may land in the same optimum; the document must
        // still be well-formed either way.
        CHECK(shifted.centers.size() == 3);
    }
}
