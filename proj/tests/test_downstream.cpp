#include <random>
#include <vector>

#include "doctest.h"
#include "faircert/downstream.hpp"
#include "faircert/metrics.hpp"
#include "faircert/rng.hpp"

using namespace faircert;

namespace {

// Encoded data with explicit per-cell (s, y) compositions; representations
// are spread-out points so linear models can separate cells.
EncodedDataset make_encoded(const std::vector<std::vector<int>>& cell_s_y_count, int k) {
    EncodedDataset e;
    e.k = k;
    e.labels.resize(1);
    for (int c = 0; c < k; ++c) e.reps.push_back({double(c), double(c % 2)});
    for (const auto& row : cell_s_y_count) {
        for (int i = 0; i < row[3]; ++i) {
            e.cell.push_back(row[0]);
            e.sensitive.push_back(row[1]);
            e.labels[0].push_back(row[2]);
        }
    }
    return e;
}

}  // namespace

TEST_CASE("classifier kind names round trip") {
    CHECK(downstream_kind_name(DownstreamKind::Logistic) == "logistic");
    CHECK(downstream_kind_name(DownstreamKind::OneHiddenNN) == "one_hidden_nn");
    CHECK(downstream_kind_name(DownstreamKind::DecisionTree) == "decision_tree");
    CHECK(downstream_kind_from_name("logistic") == DownstreamKind::Logistic);
    CHECK_THROWS(downstream_kind_from_name("svm"));
}

TEST_CASE("separable labels are learned exactly") {
    // y equals the cell, and the cells are far apart in representation space.
    EncodedDataset train = make_encoded({{0, 0, 0, 40}, {0, 1, 0, 40}, {1, 0, 1, 40},
                                         {1, 1, 1, 40}},
                                        2);
    EncodedDataset test = make_encoded({{0, 0, 0, 20}, {0, 1, 0, 20}, {1, 0, 1, 20},
                                        {1, 1, 1, 20}},
                                       2);
    for (DownstreamKind kind :
         {DownstreamKind::Logistic, DownstreamKind::OneHiddenNN, DownstreamKind::DecisionTree}) {
        EvalReport rep = train_downstream(train, test, kind, DownstreamTarget::Label, 2, 7);
        CHECK(rep.accuracy == doctest::Approx(1.0));
        CHECK(rep.dp == doctest::Approx(0.0).scale(1).epsilon(1e-9));
        CHECK(rep.repetitions == 2);
    }
}

TEST_CASE("adversaries on group-balanced cells fall back to the base rate") {
    // Both cells carry s=0:s=1 at 60:40, so nothing predicts the group.
    EncodedDataset train = make_encoded({{0, 0, 0, 60}, {0, 1, 0, 40}, {1, 0, 1, 60},
                                         {1, 1, 1, 40}},
                                        2);
    EncodedDataset test = make_encoded({{0, 0, 0, 30}, {0, 1, 0, 20}, {1, 0, 1, 30},
                                        {1, 1, 1, 20}},
                                       2);
    EvalReport tree =
        train_downstream(train, test, DownstreamKind::DecisionTree, DownstreamTarget::Group, 1, 3);
    CHECK(tree.accuracy == doctest::Approx(0.6));
    CHECK(tree.dp == doctest::Approx(0.0).scale(1).epsilon(1e-9));

    EvalReport logi =
        train_downstream(train, test, DownstreamKind::Logistic, DownstreamTarget::Group, 2, 3);
    CHECK(logi.accuracy == doctest::Approx(0.6).epsilon(0.05));
    CHECK(logi.dp <= 0.05);
}

TEST_CASE("no classifier beats the exact worst case") {
    std::mt19937_64 rng = make_rng(17, "downstream");
    for (int trial = 0; trial < 6; ++trial) {
        int k = 2 + int(bounded(rng, 4));
        std::vector<std::vector<int>> spec;
        for (int c = 0; c < k; ++c) {
            for (int s = 0; s < 2; ++s) {
                for (int y = 0; y < 2; ++y) {
                    spec.push_back({c, s, y, 3 + int(bounded(rng, 25))});
                }
            }
        }
        EncodedDataset train = make_encoded(spec, k);
        EncodedDataset test = make_encoded(spec, k);
        double ceiling = worst_case_empirical_dp(test);
        for (DownstreamKind kind : {DownstreamKind::Logistic, DownstreamKind::OneHiddenNN,
                                    DownstreamKind::DecisionTree}) {
            for (DownstreamTarget target : {DownstreamTarget::Label, DownstreamTarget::Group}) {
                EvalReport rep = train_downstream(train, test, kind, target, 1,
                                                  stream_seed(trial, "t"), 12);
                CHECK(rep.dp <= ceiling + 1e-9);
            }
        }
    }
}

TEST_CASE("adversaries recover planted group signal") {
    // Cell identity IS the group: the adversary should approach accuracy 1
    // and the worst case should flag it.
    EncodedDataset train = make_encoded({{0, 0, 0, 50}, {0, 0, 1, 30}, {1, 1, 0, 30},
                                         {1, 1, 1, 50}},
                                        2);
    EncodedDataset test = make_encoded({{0, 0, 0, 25}, {0, 0, 1, 15}, {1, 1, 0, 15},
                                        {1, 1, 1, 25}},
                                       2);
    EvalReport rep =
        train_downstream(train, test, DownstreamKind::Logistic, DownstreamTarget::Group, 3, 5);
    CHECK(rep.accuracy == doctest::Approx(1.0));
    CHECK(rep.dp == doctest::Approx(1.0));
    CHECK(worst_case_empirical_dp(test) == doctest::Approx(1.0));
}

TEST_CASE("reports are deterministic in the seed") {
    EncodedDataset train = make_encoded({{0, 0, 0, 30}, {0, 1, 1, 25}, {1, 0, 1, 20},
                                         {1, 1, 0, 35}, {2, 0, 1, 15}, {2, 1, 0, 15}},
                                        3);
    EncodedDataset test = train;
    EvalReport a = train_downstream(train, test, DownstreamKind::OneHiddenNN,
                                    DownstreamTarget::Label, 3, 11, 20);
    EvalReport b = train_downstream(train, test, DownstreamKind::OneHiddenNN,
                                    DownstreamTarget::Label, 3, 11, 20);
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.dp == b.dp);
    CHECK(a.classifier == "one_hidden_nn_20");
    CHECK(a.eopp.has_value());
    CHECK(a.eo.has_value());
    if (a.eopp) CHECK(*a.eopp <= 1.0);
}

TEST_CASE("degenerate targets and missing slices") {
    EncodedDataset train = make_encoded({{0, 0, 1, 40}, {1, 1, 1, 40}}, 2);
    EncodedDataset test = train;
    CHECK_THROWS_WITH(
        train_downstream(train, test, DownstreamKind::Logistic, DownstreamTarget::Label, 1, 0),
        "train_downstream: degenerate single-class target");

    // All labels are 1: the y=0 slice is empty, so EO/EOpp come back absent
    // for the group adversary while DP still reports.
    EvalReport rep =
        train_downstream(train, test, DownstreamKind::Logistic, DownstreamTarget::Group, 1, 0);
    CHECK(rep.dp >= 0.0);
    CHECK_FALSE(rep.eo.has_value());
    CHECK(rep.eopp.has_value());  // y=1 slice is the whole set
}
