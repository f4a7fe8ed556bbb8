#include "faircert/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "faircert/metrics.hpp"
#include "faircert/rng.hpp"
#include "faircert/textio.hpp"

namespace faircert {

using nlohmann::json;

std::string zoo_entry_name(DownstreamKind kind, int hidden_units) {
    if (kind == DownstreamKind::OneHiddenNN) {
        return downstream_kind_name(kind) + "_" + std::to_string(hidden_units);
    }
    return downstream_kind_name(kind);
}

std::pair<DownstreamKind, int> zoo_entry_from_name(const std::string& name) {
    const std::string nn = "one_hidden_nn_";
    if (name.rfind(nn, 0) == 0) {
        int h = std::atoi(name.c_str() + nn.size());
        if (h < 1) throw std::invalid_argument("bad hidden unit count in '" + name + "'");
        return {DownstreamKind::OneHiddenNN, h};
    }
    return {downstream_kind_from_name(name), 0};
}

std::vector<std::pair<DownstreamKind, int>> default_zoo() {
    return {{DownstreamKind::Logistic, 0},
            {DownstreamKind::OneHiddenNN, 50},
            {DownstreamKind::OneHiddenNN, 200},
            {DownstreamKind::DecisionTree, 0}};
}

void RunConfig::validate() const {
    split.validate();
    budget.validate();
    if (use_kmeans) {
        if (kmeans_k < 1) throw std::invalid_argument("kmeans_k must be >= 1");
        if (kmeans_max_iters < 1) throw std::invalid_argument("kmeans_max_iters must be >= 1");
    } else {
        tree.validate();
    }
    if (duplicate_m < 1) throw std::invalid_argument("duplicate_m must be >= 1");
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    if (zoo.empty()) throw std::invalid_argument("classifier zoo must be non-empty");
}

std::string RunConfig::to_json_string() const {
    json j;
    j["split"] = {{"train_fraction", split.train_fraction},
                  {"val_fraction", split.val_fraction},
                  {"test_fraction", split.test_fraction}};
    if (use_kmeans) {
        j["encoder"] = {{"kind", "kmeans"}, {"k", kmeans_k}, {"max_iters", kmeans_max_iters}};
    } else {
        j["encoder"] = {{"kind", "fair_tree"},
                        {"gamma", tree.gamma},
                        {"max_leaves", tree.max_leaves},
                        {"min_leaf_size", tree.min_leaf_size},
                        {"quantile_orders", tree.quantile_orders},
                        {"fairness_target", fairness_target_name(tree.fairness_target)},
                        {"label_index", tree.label_index}};
    }
    j["budget"] = {{"epsilon", budget.epsilon},
                   {"eps_b", budget.eps_b},
                   {"eps_c", budget.eps_c},
                   {"eps_s", budget.eps_s}};
    j["metric"] = fairness_target_name(metric);
    j["duplicate_m"] = duplicate_m;
    j["seed"] = seed;
    j["repetitions"] = repetitions;
    j["adversary"] = adversary;
    j["zoo"] = json::array();
    for (const auto& [kind, h] : zoo) j["zoo"].push_back(zoo_entry_name(kind, h));
    return j.dump();
}

uint64_t RunConfig::hash() const { return fnv1a64(to_json_string()); }

namespace {

json eval_to_json(const EvalReport& e) {
    json j;
    j["classifier"] = e.classifier;
    j["target"] = e.target;
    j["repetitions"] = e.repetitions;
    j["seed"] = e.seed;
    j["accuracy"] = e.accuracy;
    j["dp"] = e.dp;
    j["eopp"] = e.eopp ? json(*e.eopp) : json(nullptr);
    j["eo"] = e.eo ? json(*e.eo) : json(nullptr);
    return j;
}

}  // namespace

PipelineResult run_pipeline(const TabularDataset& ds, const RunConfig& cfg,
                            const TabularDataset* eval_ds) {
    cfg.validate();
    int label_col = cfg.tree.label_index;

    const TabularDataset* working = &ds;
    TabularDataset duplicated;
    if (cfg.duplicate_m > 1) {
        duplicated = duplicate(ds, cfg.duplicate_m);
        working = &duplicated;
    }
    SplitSpec sp = cfg.split;
    sp.seed = stream_seed(cfg.seed, "split");
    SplitResult parts = split(*working, sp);

    FairTree tree;
    KMeansEncoder km;
    const Encoder* enc = nullptr;
    if (cfg.use_kmeans) {
        km = fit_kmeans(parts.train, cfg.kmeans_k, cfg.seed, cfg.kmeans_max_iters);
        enc = &km;
    } else {
        EncoderConfig tc = cfg.tree;
        tc.seed = cfg.seed;
        tree = fit_tree(parts.train, tc);
        enc = &tree;
    }

    PipelineResult res;
    res.encoder_kind = enc->kind();
    res.encoder_json = enc->to_json_string();
    res.n_cells = enc->n_cells();

    int groups = working->n_groups();
    res.certificate = groups > 2 ? certify_multigroup(*enc, parts.train, parts.val, parts.test,
                                                      cfg.budget, cfg.metric, label_col)
                                 : certify(*enc, parts.train, parts.val, parts.test, cfg.budget,
                                           cfg.metric, label_col);

    EncodedDataset enc_train = enc->encode(parts.train);
    EncodedDataset enc_eval = eval_ds ? enc->encode(*eval_ds) : enc->encode(parts.test);
    res.worst_case_dp = worst_case_empirical_dp(enc_eval);

    uint64_t slot = 0;
    bool have_acc = false;
    for (const auto& [kind, hidden] : cfg.zoo) {
        EvalReport lab = train_downstream(enc_train, enc_eval, kind, DownstreamTarget::Label,
                                          cfg.repetitions, stream_seed(cfg.seed, "classifier", slot++),
                                          hidden, label_col);
        if (!have_acc || lab.accuracy > res.accuracy) {
            res.accuracy = lab.accuracy;
            have_acc = true;
        }
        res.empirical_dp = std::max(res.empirical_dp, lab.dp);
        res.evals.push_back(std::move(lab));
        if (cfg.adversary) {
            EvalReport adv = train_downstream(enc_train, enc_eval, kind, DownstreamTarget::Group,
                                              cfg.repetitions,
                                              stream_seed(cfg.seed, "classifier", slot++), hidden,
                                              label_col);
            res.empirical_dp = std::max(res.empirical_dp, adv.dp);
            res.evals.push_back(std::move(adv));
        }
    }

    json doc;
    doc["format"] = "faircert-result";
    doc["version"] = 1;
    doc["config"] = json::parse(cfg.to_json_string());
    doc["config_hash"] = hex64(cfg.hash());
    doc["schema"] = json::parse(ds.schema.to_json_string());
    doc["split"] = {{"n_total", working->n()},
                    {"n_train", parts.train.n()},
                    {"n_val", parts.val.n()},
                    {"n_test", parts.test.n()},
                    {"duplicate_m", cfg.duplicate_m}};
    if (eval_ds) doc["eval_rows"] = eval_ds->n();
    doc["encoder"] = {{"kind", res.encoder_kind},
                      {"cells", res.n_cells},
                      {"hash", hex64(enc->hash())},
                      {"model", json::parse(res.encoder_json)}};
    doc["certificate"] = json::parse(res.certificate.to_json_string());
    doc["worst_case_empirical_dp"] = res.worst_case_dp;
    doc["evaluations"] = json::array();
    for (const EvalReport& e : res.evals) doc["evaluations"].push_back(eval_to_json(e));
    doc["headline"] = {{"accuracy", res.accuracy},
                       {"empirical_dp", res.empirical_dp},
                       {"t_star", res.certificate.t_star}};
    res.document = doc.dump(2);
    return res;
}

void SweepGrids::validate() const {
    if (gammas.empty() || max_leaves.empty() || min_leaf_sizes.empty() || vs.empty()) {
        throw std::invalid_argument("sweep grids must be non-empty");
    }
    for (double v : vs) {
        if (!(v > 0.0 && v < 1.0)) {
            throw std::invalid_argument("sweep v values must be in (0, 1)");
        }
    }
}

size_t SweepGrids::size() const {
    return gammas.size() * max_leaves.size() * min_leaf_sizes.size() * vs.size();
}

namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += "\"";
    return out;
}

void run_indexed(size_t count, int workers, const std::function<void(size_t)>& work) {
    workers = std::max(1, workers);
    if (workers == 1 || count <= 1) {
        for (size_t i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<size_t> next{0};
    auto loop = [&] {
        for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) work(i);
    };
    std::vector<std::thread> pool;
    int n_threads = static_cast<int>(std::min<size_t>(workers, count));
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(loop);
    for (auto& th : pool) th.join();
}

template <typename Getter>
void mark_pareto(std::vector<SweepRow>& rows, Getter cost, bool SweepRow::* flag) {
    for (SweepRow& r : rows) {
        if (!r.ok) continue;
        bool dominated = false;
        for (const SweepRow& o : rows) {
            if (!o.ok || &o == &r) continue;
            bool geq_acc = o.accuracy >= r.accuracy;
            bool leq_cost = cost(o) <= cost(r);
            bool strictly = o.accuracy > r.accuracy || cost(o) < cost(r);
            if (geq_acc && leq_cost && strictly) {
                dominated = true;
                break;
            }
        }
        r.*flag = !dominated;
    }
}

}  // namespace

SweepResult run_sweep(const TabularDataset& ds, const RunConfig& base, const SweepGrids& grids,
                      int workers) {
    grids.validate();
    if (base.use_kmeans) {
        throw std::invalid_argument("run_sweep sweeps tree hyperparameters; encoder must be the tree");
    }
    SweepResult res;
    res.rows.resize(grids.size());
    size_t idx = 0;
    for (double g : grids.gammas) {
        for (int k : grids.max_leaves) {
            for (int m : grids.min_leaf_sizes) {
                for (double v : grids.vs) {
                    SweepRow& row = res.rows[idx];
                    row.index = idx;
                    row.gamma = g;
                    row.max_leaves = k;
                    row.min_leaf_size = m;
                    row.v = v;
                    ++idx;
                }
            }
        }
    }
    run_indexed(res.rows.size(), workers, [&](size_t i) {
        SweepRow& row = res.rows[i];
        RunConfig cfg = base;
        cfg.tree.gamma = row.gamma;
        cfg.tree.max_leaves = row.max_leaves;
        cfg.tree.min_leaf_size = row.min_leaf_size;
        cfg.split.val_fraction = row.v * (1.0 - cfg.split.test_fraction);
        cfg.split.train_fraction =
            1.0 - cfg.split.test_fraction - cfg.split.val_fraction;
        try {
            PipelineResult pr = run_pipeline(ds, cfg);
            row.ok = true;
            row.n_cells = pr.n_cells;
            row.accuracy = pr.accuracy;
            row.empirical_dp = pr.empirical_dp;
            row.t_star = pr.certificate.t_star;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    });
    mark_pareto(res.rows, [](const SweepRow& r) { return r.empirical_dp; },
                &SweepRow::pareto_empirical);
    mark_pareto(res.rows, [](const SweepRow& r) { return r.t_star; },
                &SweepRow::pareto_certified);
    return res;
}

std::string SweepResult::csv() const {
    std::string out =
        "index,gamma,max_leaves,min_leaf_size,v,ok,error,n_cells,accuracy,empirical_dp,t_star,"
        "pareto_empirical,pareto_certified\n";
    for (const SweepRow& r : rows) {
        out += std::to_string(r.index) + "," + fmt_double(r.gamma) + "," +
               std::to_string(r.max_leaves) + "," + std::to_string(r.min_leaf_size) + "," +
               fmt_double(r.v) + "," + (r.ok ? "1" : "0") + "," + csv_quote(r.error) + ",";
        if (r.ok) {
            out += std::to_string(r.n_cells) + "," + fmt_double(r.accuracy) + "," +
                   fmt_double(r.empirical_dp) + "," + fmt_double(r.t_star) + "," +
                   (r.pareto_empirical ? "1" : "0") + "," + (r.pareto_certified ? "1" : "0");
        } else {
            out += ",,,,,";
        }
        out += "\n";
    }
    return out;
}

void CoverageSpec::validate() const {
    if (q0.size() != q1.size() || q0.empty()) {
        throw std::invalid_argument("coverage spec: q0 and q1 must be equal-length, non-empty");
    }
    auto check = [](const std::vector<double>& q, const char* name) {
        double sum = 0.0;
        for (double p : q) {
            if (p < 0.0) throw std::invalid_argument(std::string("coverage spec: ") + name +
                                                     " has a negative entry");
            sum += p;
        }
        if (std::fabs(sum - 1.0) > 1e-9) {
            throw std::invalid_argument(std::string("coverage spec: ") + name + " must sum to 1");
        }
    };
    check(q0, "q0");
    check(q1, "q1");
    if (!(p_s0 > 0.0 && p_s0 < 1.0)) {
        throw std::invalid_argument("coverage spec: p_s0 must be in (0, 1)");
    }
    if (n_per_trial < 3) throw std::invalid_argument("coverage spec: n_per_trial too small");
    if (!(train_fraction > 0.0 && val_fraction > 0.0 && test_fraction > 0.0) ||
        std::fabs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
        throw std::invalid_argument("coverage spec: fractions must be positive and sum to 1");
    }
}

double CoverageSpec::true_sup() const {
    double tv = 0.0;
    for (size_t i = 0; i < q0.size(); ++i) tv += std::fabs(q0[i] - q1[i]);
    return tv / 2.0;
}

std::string CoverageSpec::to_json_string() const {
    json j;
    j["q0"] = q0;
    j["q1"] = q1;
    j["p_s0"] = p_s0;
    j["n_per_trial"] = n_per_trial;
    j["train_fraction"] = train_fraction;
    j["val_fraction"] = val_fraction;
    j["test_fraction"] = test_fraction;
    return j.dump(2);
}

CoverageSpec CoverageSpec::from_json_string(const std::string& text) {
    json j = json::parse(text);
    CoverageSpec spec;
    spec.q0 = j.at("q0").get<std::vector<double>>();
    spec.q1 = j.at("q1").get<std::vector<double>>();
    spec.p_s0 = j.value("p_s0", 0.5);
    spec.n_per_trial = j.value("n_per_trial", static_cast<size_t>(2000));
    spec.train_fraction = j.value("train_fraction", 0.6);
    spec.val_fraction = j.value("val_fraction", 0.2);
    spec.test_fraction = j.value("test_fraction", 0.2);
    spec.validate();
    return spec;
}

CoverageSpec CoverageSpec::load(const std::string& path) {
    return from_json_string(read_text_file(path));
}

CoverageResult run_coverage(const CoverageSpec& spec, size_t trials,
                            const ConfidenceBudget& budget, uint64_t seed, int workers) {
    spec.validate();
    budget.validate();
    if (trials == 0) throw std::invalid_argument("run_coverage: trials must be positive");

    CoverageResult res;
    res.trials = trials;
    res.true_sup = spec.true_sup();
    res.per_trial.resize(trials);

    int k = static_cast<int>(spec.q0.size());
    size_t n = spec.n_per_trial;
    size_t n_val = static_cast<size_t>(spec.val_fraction * static_cast<double>(n));
    size_t n_test = static_cast<size_t>(spec.test_fraction * static_cast<double>(n));
    size_t n_train = n - n_val - n_test;

    run_indexed(trials, workers, [&](size_t i) {
        CoverageTrial& trial = res.per_trial[i];
        auto rng = make_rng(seed, "trial", i);
        std::vector<int> svals(n), cells(n);
        for (size_t r = 0; r < n; ++r) {
            int s = unit_real(rng) < spec.p_s0 ? 0 : 1;
            const std::vector<double>& q = s == 0 ? spec.q0 : spec.q1;
            double u = unit_real(rng);
            int cell = k - 1;
            double acc = 0.0;
            for (int c = 0; c < k; ++c) {
                acc += q[c];
                if (u < acc) {
                    cell = c;
                    break;
                }
            }
            svals[r] = s;
            cells[r] = cell;
        }
        std::vector<int> train_s(svals.begin(), svals.begin() + n_train);
        EncodedDataset val, test;
        val.k = k;
        val.cell.assign(cells.begin() + n_train, cells.begin() + n_train + n_val);
        val.sensitive.assign(svals.begin() + n_train, svals.begin() + n_train + n_val);
        test.k = k;
        test.cell.assign(cells.begin() + n_train + n_val, cells.end());
        test.sensitive.assign(svals.begin() + n_train + n_val, svals.end());
        try {
            BaseRateBounds base = bound_base_rates(train_s, budget.eps_b);
            if (!base.finite()) throw std::runtime_error("single-group trial");
            auto bounds = bound_cells(collect_cell_stats(val, k), base, budget.eps_c);
            SumBound sum = bound_sum(test, bounds, budget.eps_s);
            trial.ok = true;
            trial.t_star = std::min(1.0, std::max(0.0, 2.0 * sum.s_star - 1.0));
            trial.violated = trial.t_star < res.true_sup;
        } catch (const std::exception&) {
            trial.ok = false;
            trial.violated = true;
        }
    });

    double t_sum = 0.0;
    size_t ok_count = 0;
    for (const CoverageTrial& t : res.per_trial) {
        if (t.violated) ++res.violations;
        if (t.ok) {
            ++ok_count;
            t_sum += t.t_star;
        } else {
            ++res.failures;
        }
    }
    res.violation_fraction = static_cast<double>(res.violations) / static_cast<double>(trials);
    res.mean_t_star = ok_count ? t_sum / static_cast<double>(ok_count) : 0.0;
    return res;
}

std::string CoverageResult::to_json_string() const {
    json j;
    j["trials"] = trials;
    j["violations"] = violations;
    j["failures"] = failures;
    j["violation_fraction"] = violation_fraction;
    j["mean_t_star"] = mean_t_star;
    j["true_sup"] = true_sup;
    j["per_trial"] = json::array();
    for (const CoverageTrial& t : per_trial) {
        j["per_trial"].push_back(
            {{"ok", t.ok}, {"t_star", t.t_star}, {"violated", t.violated}});
    }
    return j.dump(2);
}

int resolve_workers(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("FAIRCERT_WORKERS")) {
        int w = std::atoi(env);
        if (w > 0) return w;
    }
    return 1;
}

}  // namespace faircert
