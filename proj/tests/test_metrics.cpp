#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "faircert/metrics.hpp"
#include "faircert/rng.hpp"

using namespace faircert;

namespace {

PredictionSet slice_by_label(const PredictionSet& p, int y) {
    PredictionSet out;
    for (size_t r = 0; r < p.n(); ++r) {
        if (p.label[r] != y) continue;
        out.pred.push_back(p.pred[r]);
        out.group.push_back(p.group[r]);
        out.label.push_back(p.label[r]);
    }
    return out;
}

}  // namespace

TEST_CASE("demographic parity distance") {
    SUBCASE("hand-built rates 0.8 vs 0.6") {
        PredictionSet p;
        p.pred = {1, 1, 1, 1, 0, 1, 1, 1, 0, 0};
        p.group = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
        p.label = {1, 1, 0, 1, 0, 1, 0, 1, 1, 0};
        CHECK(dp_distance(p) == doctest::Approx(0.2).epsilon(1e-12));
    }

    SUBCASE("constant classifier scores zero") {
        PredictionSet p;
        p.pred = {1, 1, 1, 1};
        p.group = {0, 1, 0, 1};
        p.label = {0, 1, 1, 0};
        CHECK(dp_distance(p) == 0.0);
    }

    SUBCASE("predicting the group is maximally unfair") {
        PredictionSet p;
        p.pred = {0, 0, 1, 1};
        p.group = {0, 0, 1, 1};
        p.label = {0, 1, 0, 1};
        CHECK(dp_distance(p) == doctest::Approx(1.0));
    }

    SUBCASE("multiclass takes the worst class") {
        PredictionSet p;
        // Class 2 rates: 0.5 vs 0.0; class 0 rates: 0.25 vs 0.5; class 1: 0.25 vs 0.5.
        p.pred = {2, 2, 0, 1, 0, 0, 1, 1};
        p.group = {0, 0, 0, 0, 1, 1, 1, 1};
        p.label = {0, 0, 0, 0, 0, 0, 0, 0};
        CHECK(dp_distance(p) == doctest::Approx(0.5));
    }

    SUBCASE("three groups take the worst pair") {
        PredictionSet p;
        p.pred = {1, 0, 1, 1, 0, 0};
        p.group = {0, 0, 1, 1, 2, 2};
        p.label = {0, 0, 0, 0, 0, 0};
        CHECK(dp_distance(p) == doctest::Approx(1.0));  // group 1 rate 1, group 2 rate 0
    }

    SUBCASE("an absent group is an error") {
        PredictionSet p;
        p.pred = {1, 0};
        p.group = {0, 0};
        p.label = {0, 1};
        CHECK_THROWS(dp_distance(p));
    }
}

TEST_CASE("label-conditioned distances on an eight-row table") {
    // rows: (pred, s, y)
    PredictionSet p;
    p.pred = {1, 0, 1, 1, 0, 1, 0, 0};
    p.group = {0, 0, 1, 1, 0, 0, 1, 1};
    p.label = {1, 1, 1, 1, 0, 0, 0, 0};
    // y=1 slice: s0 preds {1,0} rate 0.5; s1 preds {1,1} rate 1.0 -> 0.5
    // y=0 slice: s0 preds {0,1} rate 0.5; s1 preds {0,0} rate 0.0 -> 0.5
    CHECK(eopp_distance(p) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(eo_distance(p) == doctest::Approx(0.5).epsilon(1e-12));

    SUBCASE("predicting the true label is perfectly fair") {
        PredictionSet q = p;
        q.pred = q.label;
        CHECK(eopp_distance(q) == 0.0);
        CHECK(eo_distance(q) == 0.0);
    }

    SUBCASE("degenerate slices are errors") {
        PredictionSet q = p;
        q.label = {1, 1, 1, 1, 1, 1, 1, 1};
        CHECK_THROWS(eo_distance(q));
        q.label = {0, 0, 0, 0, 0, 0, 0, 0};
        CHECK_THROWS(eopp_distance(q));
    }
}

TEST_CASE("conditioned metrics reduce to DP on slices") {
    std::mt19937_64 rng = make_rng(99, "metrics");
    for (int trial = 0; trial < 300; ++trial) {
        PredictionSet p;
        size_t n = 20 + bounded(rng, 60);
        int classes = 2 + int(bounded(rng, 3));
        for (size_t r = 0; r < n; ++r) {
            p.pred.push_back(int(bounded(rng, uint64_t(classes))));
            p.group.push_back(int(bounded(rng, 2)));
            p.label.push_back(int(bounded(rng, 2)));
        }
        PredictionSet y0 = slice_by_label(p, 0), y1 = slice_by_label(p, 1);
        auto valid = [](const PredictionSet& q) {
            bool has0 = false, has1 = false;
            for (int g : q.group) (g == 0 ? has0 : has1) = true;
            return !q.pred.empty() && has0 && has1;
        };
        if (!valid(y0) || !valid(y1)) continue;
        CHECK(eopp_distance(p) == doctest::Approx(dp_distance(y1)).epsilon(1e-12));
        CHECK(eo_distance(p) ==
              doctest::Approx(0.5 * (dp_distance(y0) + dp_distance(y1))).epsilon(1e-12));
        CHECK(dp_distance(p) >= 0.0);
        CHECK(dp_distance(p) <= 1.0);
    }
}

TEST_CASE("worst-case empirical distance is the histogram gap") {
    EncodedDataset e;
    e.k = 3;
    e.reps = {{0.0}, {1.0}, {2.0}};
    e.labels.resize(1);
    auto add = [&](int cell, int s, int count) {
        for (int i = 0; i < count; ++i) {
            e.cell.push_back(cell);
            e.sensitive.push_back(s);
            e.labels[0].push_back(0);
        }
    };

    SUBCASE("worked 0.3 case") {
        // p0 = (0.5, 0.3, 0.2), p1 = (0.2, 0.3, 0.5) over 10 rows each.
        add(0, 0, 5);
        add(1, 0, 3);
        add(2, 0, 2);
        add(0, 1, 2);
        add(1, 1, 3);
        add(2, 1, 5);
        CHECK(worst_case_empirical_dp(e) == doctest::Approx(0.3).epsilon(1e-12));
    }

    SUBCASE("identical histograms score zero") {
        add(0, 0, 4);
        add(1, 0, 6);
        add(0, 1, 2);
        add(1, 1, 3);
        CHECK(worst_case_empirical_dp(e) == doctest::Approx(0.0));
    }

    SUBCASE("disjoint supports score one") {
        add(0, 0, 7);
        add(1, 1, 9);
        CHECK(worst_case_empirical_dp(e) == doctest::Approx(1.0));
    }

    SUBCASE("multigroup takes the worst pair") {
        add(0, 0, 10);
        add(0, 1, 5);
        add(1, 1, 5);
        add(1, 2, 10);
        CHECK(worst_case_empirical_dp(e) == doctest::Approx(1.0));
    }

    SUBCASE("a missing group is an error") {
        add(0, 0, 3);
        CHECK_THROWS(worst_case_empirical_dp(e));
    }
}

TEST_CASE("prediction sets validate their shape") {
    PredictionSet p;
    p.pred = {1, 0};
    p.group = {0};
    p.label = {0, 1};
    CHECK_THROWS(p.validate());
    p.group = {0, 1};
    p.validate();
}
