#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "faircert/pipeline.hpp"
#include "faircert/synth.hpp"

#include "json.hpp"

using namespace faircert;
using nlohmann::json;

namespace {

TabularDataset quick_synth(size_t n, uint64_t seed) {
    SynthSpec spec;
    spec.n = n;
    spec.seed = seed;
    spec.continuous = 2;
    spec.categorical = 1;
    spec.categories = 3;
    return make_synthetic(spec);
}

RunConfig quick_config() {
    RunConfig cfg;
    cfg.tree.max_leaves = 4;
    cfg.tree.min_leaf_size = 10;
    cfg.tree.gamma = 0.7;
    cfg.repetitions = 1;
    cfg.seed = 5;
    cfg.zoo = {{DownstreamKind::Logistic, 0}, {DownstreamKind::DecisionTree, 0}};
    return cfg;
}

}  // namespace

TEST_CASE("zoo entry naming") {
    CHECK(zoo_entry_name(DownstreamKind::OneHiddenNN, 200) == "one_hidden_nn_200");
    CHECK(zoo_entry_name(DownstreamKind::Logistic, 0) == "logistic");
    auto [kind, hidden] = zoo_entry_from_name("one_hidden_nn_35");
    CHECK(kind == DownstreamKind::OneHiddenNN);
    CHECK(hidden == 35);
    CHECK(zoo_entry_from_name("decision_tree").first == DownstreamKind::DecisionTree);
    CHECK_THROWS(zoo_entry_from_name("one_hidden_nn_"));
    CHECK_THROWS(zoo_entry_from_name("boosted"));
    CHECK(default_zoo().size() == 4);
}

TEST_CASE("pipeline produces a coherent self-contained document") {
    TabularDataset ds = quick_synth(400, 2);
    RunConfig cfg = quick_config();
    PipelineResult res = run_pipeline(ds, cfg);

    json doc = json::parse(res.document);
    CHECK(doc.at("format") == "faircert-result");
    CHECK(doc.at("encoder").at("kind") == "fair_tree");
    CHECK(doc.at("encoder").at("cells").get<int>() == res.n_cells);
    CHECK(doc.at("split").at("n_train").get<int>() == 240);
    CHECK(doc.at("split").at("n_val").get<int>() == 80);
    CHECK(doc.at("split").at("n_test").get<int>() == 80);
    CHECK(doc.contains("schema"));
    CHECK(doc.at("certificate").at("t_star").get<double>() == res.certificate.t_star);
    CHECK(doc.at("headline").at("t_star").get<double>() == res.certificate.t_star);
    CHECK(doc.at("headline").at("accuracy").get<double>() == res.accuracy);
    CHECK(doc.at("config_hash").get<std::string>() != "");
    // Two classifiers, label + adversary each.
    CHECK(res.evals.size() == 4);
    CHECK(doc.at("evaluations").size() == 4);
    CHECK(res.worst_case_dp >= 0.0);
    CHECK(res.empirical_dp <= res.worst_case_dp + 1e-9);

    SUBCASE("documents are byte-identical across runs") {
        PipelineResult again = run_pipeline(ds, cfg);
        CHECK(again.document == res.document);
    }

    SUBCASE("the seed changes the document") {
        RunConfig other = cfg;
        other.seed = 6;
        PipelineResult moved = run_pipeline(ds, other);
        CHECK(moved.document != res.document);
    }

    SUBCASE("adversary flag halves the evaluations") {
        RunConfig no_adv = cfg;
        no_adv.adversary = false;
        PipelineResult bare = run_pipeline(ds, no_adv);
        CHECK(bare.evals.size() == 2);
        for (const EvalReport& r : bare.evals) CHECK(r.target == "label");
    }
}

TEST_CASE("pipeline with a separate evaluation file") {
    TabularDataset ds = quick_synth(400, 3);
    TabularDataset eval_ds = quick_synth(150, 9);
    RunConfig cfg = quick_config();
    PipelineResult internal = run_pipeline(ds, cfg);
    PipelineResult external = run_pipeline(ds, cfg, &eval_ds);

    // Certificates agree (internal split either way); evaluation moves.
    CHECK(external.certificate.t_star == internal.certificate.t_star);
    json doc = json::parse(external.document);
    CHECK(doc.at("eval_rows").get<int>() == 150);
    CHECK(external.worst_case_dp != internal.worst_case_dp);
}

TEST_CASE("kmeans pipeline certifies too") {
    TabularDataset ds = quick_synth(400, 4);
    RunConfig cfg = quick_config();
    cfg.use_kmeans = true;
    cfg.kmeans_k = 5;
    PipelineResult res = run_pipeline(ds, cfg);
    CHECK(res.encoder_kind == "kmeans");
    CHECK(res.n_cells == 5);
    CHECK(res.certificate.t_star >= 0.0);
    CHECK(res.certificate.t_star <= 1.0);
    json doc = json::parse(res.document);
    CHECK(doc.at("encoder").at("model").at("format") == "kmeans-encoder");
}

TEST_CASE("duplication tightens the certificate") {
    TabularDataset ds = quick_synth(500, 7);
    RunConfig cfg = quick_config();
    cfg.tree.gamma = 0.9;
    PipelineResult base = run_pipeline(ds, cfg);
    RunConfig dup = cfg;
    dup.duplicate_m = 8;
    PipelineResult big = run_pipeline(ds, dup);
    json doc = json::parse(big.document);
    CHECK(doc.at("split").at("n_train").get<int>() == 2400);
    if (base.certificate.t_star < 1.0) {
        CHECK(big.certificate.t_star < base.certificate.t_star);
    }
}

TEST_CASE("validation share drives the certificate width") {
    TabularDataset ds = quick_synth(1200, 11);
    RunConfig wide = quick_config();
    wide.split = {0.7, 0.1, 0.2, 0};
    RunConfig narrow = quick_config();
    narrow.split = {0.4, 0.4, 0.2, 0};
    PipelineResult small_val = run_pipeline(ds, wide);
    PipelineResult big_val = run_pipeline(ds, narrow);
    // More validation rows -> tighter per-cell intervals. The tree changes
    // too (fewer train rows), so compare the mean interval contribution
    // only through the final certificate, directionally.
    CHECK(big_val.certificate.s_star <= small_val.certificate.s_star + 0.05);
}

TEST_CASE("sweep grid rows match standalone pipeline runs") {
    TabularDataset ds = quick_synth(400, 8);
    RunConfig base = quick_config();
    SweepGrids grids;
    grids.gammas = {0.0, 0.9};
    grids.max_leaves = {4};
    grids.min_leaf_sizes = {10};
    grids.vs = {0.25};
    SweepResult sw = run_sweep(ds, base, grids, 1);
    REQUIRE(sw.rows.size() == 2);

    SUBCASE("row reproduces the pipeline") {
        RunConfig solo = base;
        solo.tree.gamma = 0.9;
        solo.tree.max_leaves = 4;
        solo.tree.min_leaf_size = 10;
        solo.split.val_fraction = 0.25 * (1.0 - base.split.test_fraction);
        solo.split.train_fraction = 1.0 - base.split.test_fraction - solo.split.val_fraction;
        PipelineResult res = run_pipeline(ds, solo);
        const SweepRow& row = sw.rows[1];
        CHECK(row.ok);
        CHECK(row.gamma == 0.9);
        CHECK(row.t_star == res.certificate.t_star);
        CHECK(row.accuracy == res.accuracy);
        CHECK(row.empirical_dp == res.empirical_dp);
        CHECK(row.n_cells == res.n_cells);
    }

    SUBCASE("workers do not change the result") {
        SweepResult parallel = run_sweep(ds, base, grids, 3);
        CHECK(parallel.csv() == sw.csv());
    }

    SUBCASE("pareto flags mark the non-dominated rows") {
        for (const SweepRow& row : sw.rows) {
            if (!row.ok) continue;
            bool dominated = false;
            for (const SweepRow& other : sw.rows) {
                if (&other == &row || !other.ok) continue;
                if (other.accuracy >= row.accuracy && other.empirical_dp <= row.empirical_dp &&
                    (other.accuracy > row.accuracy || other.empirical_dp < row.empirical_dp)) {
                    dominated = true;
                }
            }
            CHECK(row.pareto_empirical == !dominated);
        }
    }

    SUBCASE("csv has the documented header and one line per row") {
        std::string csv = sw.csv();
        CHECK(csv.rfind("index,gamma,max_leaves,min_leaf_size,v,ok,error,n_cells,accuracy,"
                        "empirical_dp,t_star,pareto_empirical,pareto_certified",
                        0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') >= 2);
    }
}

TEST_CASE("sweep records failures without aborting") {
    TabularDataset ds = quick_synth(60, 13);  // too small for min_leaf 50
    RunConfig base = quick_config();
    base.tree.min_leaf_size = 10;
    SweepGrids grids;
    grids.gammas = {0.5};
    grids.max_leaves = {4};
    grids.min_leaf_sizes = {500};
    grids.vs = {0.25};
    SweepResult sw = run_sweep(ds, base, grids, 1);
    REQUIRE(sw.rows.size() == 1);
    CHECK_FALSE(sw.rows[0].ok);
    CHECK(sw.rows[0].error != "");
    CHECK(sw.rows[0].pareto_empirical == false);

    SUBCASE("kmeans base config cannot sweep tree grids") {
        RunConfig km = base;
        km.use_kmeans = true;
        CHECK_THROWS(run_sweep(ds, km, grids, 1));
    }
}

TEST_CASE("coverage harness on an exact discrete ground truth") {
    CoverageSpec spec;
    spec.q0 = {0.4, 0.3, 0.2, 0.1};
    spec.q1 = {0.1, 0.2, 0.3, 0.4};
    spec.n_per_trial = 600;
    spec.validate();
    // the sharpest classifier fires on every cell where q0 exceeds q1
    CHECK(spec.true_sup() == doctest::Approx(0.4).epsilon(1e-12));

    ConfidenceBudget budget;
    CoverageResult res = run_coverage(spec, 12, budget, 21, 1);
    CHECK(res.trials == 12);
    CHECK(res.per_trial.size() == 12);
    CHECK(res.violations <= res.trials);
    CHECK(res.mean_t_star >= spec.true_sup());  // loose data, tiny samples
    for (const CoverageTrial& t : res.per_trial) {
        if (t.ok) CHECK(t.violated == (t.t_star < spec.true_sup()));
    }

    SUBCASE("coverage is independent of the worker count") {
        CoverageResult par = run_coverage(spec, 12, budget, 21, 4);
        CHECK(par.to_json_string() == res.to_json_string());
    }

    SUBCASE("spec json round trips") {
        CoverageSpec back = CoverageSpec::from_json_string(spec.to_json_string());
        CHECK(back.to_json_string() == spec.to_json_string());
        CHECK(back.true_sup() == spec.true_sup());
    }

    SUBCASE("bad specs are rejected") {
        CoverageSpec bad = spec;
        bad.q1 = {0.5, 0.5};
        CHECK_THROWS(bad.validate());
        bad = spec;
        bad.q0 = {0.9, 0.05, 0.04, 0.0};  // does not sum to 1
        CHECK_THROWS(bad.validate());
    }
}

TEST_CASE("run config serialization feeds the hash") {
    RunConfig cfg = quick_config();
    RunConfig same = quick_config();
    CHECK(cfg.hash() == same.hash());
    same.tree.gamma = 0.71;
    CHECK(cfg.hash() != same.hash());
    CHECK(json::parse(cfg.to_json_string()).at("metric") == "dp");
}
