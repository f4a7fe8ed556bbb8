#include <cstdint>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "faircert/dataset.hpp"
#include "faircert/kmeans.hpp"
#include "faircert/metrics.hpp"
#include "faircert/pipeline.hpp"
#include "faircert/rng.hpp"
#include "faircert/synth.hpp"
#include "faircert/textio.hpp"
#include "faircert/tree.hpp"

using nlohmann::json;
using namespace faircert;

namespace {

// A JSON config file overrides command-line flags: for every key present the
// flag value is replaced.
struct Overrides {
    json j = json::object();

    void load(const std::string& path) {
        if (path.empty()) return;
        j = json::parse(read_text_file(path));
    }
    template <typename T>
    void get(const char* key, T& var) const {
        if (j.contains(key)) var = j.at(key).get<T>();
    }
};

struct DataOpts {
    std::string data, schema;

    TabularDataset load(bool allow_missing = false) const {
        return load_csv(data, FeatureSchema::load(schema), allow_missing);
    }
};

struct SplitOpts {
    double train = 0.6, val = 0.2, test = 0.2;

    void add(CLI::App* cmd) {
        cmd->add_option("--train-fraction", train, "Training split fraction");
        cmd->add_option("--val-fraction", val, "Validation split fraction");
        cmd->add_option("--test-fraction", test, "Test split fraction");
    }
    void override_from(const Overrides& ov) {
        ov.get("train_fraction", train);
        ov.get("val_fraction", val);
        ov.get("test_fraction", test);
    }
    SplitSpec spec() const { return {train, val, test, 0}; }
};

struct BudgetOpts {
    double epsilon = 0.05, eps_b = 0.005, eps_c = 0.04, eps_s = 0.005;

    void add(CLI::App* cmd) {
        cmd->add_option("--epsilon", epsilon, "Total error probability");
        cmd->add_option("--eps-b", eps_b, "Base-rate stage budget");
        cmd->add_option("--eps-c", eps_c, "Per-cell stage budget");
        cmd->add_option("--eps-s", eps_s, "Sum stage budget");
    }
    void override_from(const Overrides& ov) {
        ov.get("epsilon", epsilon);
        ov.get("eps_b", eps_b);
        ov.get("eps_c", eps_c);
        ov.get("eps_s", eps_s);
    }
    ConfidenceBudget budget() const { return {epsilon, eps_b, eps_c, eps_s}; }
};

struct EncoderOpts {
    std::string encoder = "tree";
    double gamma = 0.5;
    int max_leaves = 16;
    int min_leaf_size = 50;
    std::string quantile_orders = "1,2,4";
    std::string fairness_target = "dp";
    int label_index = 0;
    int kmeans_k = 16;
    int kmeans_iters = 100;

    void add(CLI::App* cmd) {
        cmd->add_option("--encoder", encoder, "Encoder kind: tree or kmeans")
            ->check(CLI::IsMember({"tree", "kmeans"}));
        cmd->add_option("--gamma", gamma, "Fairness weight in the split criterion");
        cmd->add_option("--max-leaves", max_leaves, "Leaf budget of the tree");
        cmd->add_option("--min-leaf-size", min_leaf_size, "Smallest legal leaf");
        cmd->add_option("--quantile-orders", quantile_orders,
                        "Comma-separated q values for categorical orderings");
        cmd->add_option("--fairness-target", fairness_target, "dp, eopp or eo")
            ->check(CLI::IsMember({"dp", "eopp", "eo"}));
        cmd->add_option("--label-index", label_index, "Label column index");
        cmd->add_option("--kmeans-k", kmeans_k, "Cluster count for the kmeans encoder");
        cmd->add_option("--kmeans-iters", kmeans_iters, "Lloyd iteration cap");
    }
    void override_from(const Overrides& ov) {
        ov.get("encoder", encoder);
        ov.get("gamma", gamma);
        ov.get("max_leaves", max_leaves);
        ov.get("min_leaf_size", min_leaf_size);
        ov.get("quantile_orders", quantile_orders);
        ov.get("fairness_target", fairness_target);
        ov.get("label_index", label_index);
        ov.get("kmeans_k", kmeans_k);
        ov.get("kmeans_iters", kmeans_iters);
    }
    std::vector<int> quantiles() const {
        std::vector<int> out;
        std::stringstream ss(quantile_orders);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) out.push_back(std::stoi(tok));
        }
        return out;
    }
    void apply(RunConfig& cfg) const {
        cfg.use_kmeans = encoder == "kmeans";
        cfg.kmeans_k = kmeans_k;
        cfg.kmeans_max_iters = kmeans_iters;
        cfg.tree.gamma = gamma;
        cfg.tree.max_leaves = max_leaves;
        cfg.tree.min_leaf_size = min_leaf_size;
        cfg.tree.quantile_orders = quantiles();
        cfg.tree.fairness_target = fairness_target_from_name(fairness_target);
        cfg.tree.label_index = label_index;
    }
};

void emit(const std::string& out_path, const std::string& content, const std::string& note) {
    if (out_path.empty()) {
        std::cout << content << "\n";
    } else {
        write_text_file(out_path, content + "\n");
        std::cout << note << " " << out_path << "\n";
    }
}

void write_encoded_csv(const EncodedDataset& enc, const FeatureSchema& schema,
                       const std::string& path) {
    std::string out = "cell";
    for (const Feature& f : schema.features) out += ",rep_" + f.name;
    out += "," + schema.sensitive_column;
    for (const std::string& l : schema.label_columns) out += "," + l;
    out += "\n";
    for (size_t r = 0; r < enc.n_rows(); ++r) {
        out += std::to_string(enc.cell[r] + 1);
        for (double v : enc.reps[enc.cell[r]]) out += "," + fmt_double(v);
        out += "," + std::to_string(enc.sensitive[r]);
        for (const auto& col : enc.labels) out += "," + std::to_string(col[r]);
        out += "\n";
    }
    emit(path, out.substr(0, out.size() - 1), "wrote");
}

// Fits on every row of the given file; use the pipeline command for the
// split-fit-certify-evaluate flow.
void cmd_fit(const DataOpts& data, const EncoderOpts& enc_opts, uint64_t seed,
             const std::string& out) {
    TabularDataset ds = data.load();
    std::string doc;
    if (enc_opts.encoder == "kmeans") {
        doc = fit_kmeans(ds, enc_opts.kmeans_k, seed, enc_opts.kmeans_iters).to_json_string();
    } else {
        EncoderConfig cfg;
        cfg.gamma = enc_opts.gamma;
        cfg.max_leaves = enc_opts.max_leaves;
        cfg.min_leaf_size = enc_opts.min_leaf_size;
        cfg.quantile_orders = enc_opts.quantiles();
        cfg.fairness_target = fairness_target_from_name(enc_opts.fairness_target);
        cfg.label_index = enc_opts.label_index;
        cfg.seed = seed;
        doc = fit_tree(ds, cfg).to_json_string();
    }
    emit(out, doc, "wrote encoder to");
}

// Loads a serialized encoder of either kind, rejecting schema mismatches.
std::pair<FairTree, KMeansEncoder> load_encoder(const std::string& path,
                                                const FeatureSchema& schema, bool& is_tree) {
    json j = json::parse(read_text_file(path));
    std::string format = j.value("format", "");
    is_tree = format == "fair-tree-encoder";
    std::pair<FairTree, KMeansEncoder> out;
    if (is_tree) {
        out.first = FairTree::load(path, schema);
    } else if (format == "kmeans-encoder") {
        out.second = KMeansEncoder::load(path, schema);
    } else {
        throw std::runtime_error("'" + path + "' is not a recognized encoder file");
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Restricted fair encoders with distribution-free unfairness certificates"};
    app.require_subcommand(1);

    // fit
    auto* fit = app.add_subcommand("fit", "Fit an encoder on a CSV file");
    static DataOpts fit_data;
    static EncoderOpts fit_enc;
    static uint64_t fit_seed = 0;
    static std::string fit_out, fit_config;
    fit->add_option("--data", fit_data.data, "Training CSV")->required();
    fit->add_option("--schema", fit_data.schema, "Schema JSON")->required();
    fit_enc.add(fit);
    fit->add_option("--seed", fit_seed, "Root seed");
    fit->add_option("--out", fit_out, "Output encoder path");
    fit->add_option("--config", fit_config, "JSON config overriding flags");
    fit->callback([] {
        Overrides ov;
        ov.load(fit_config);
        fit_enc.override_from(ov);
        ov.get("seed", fit_seed);
        cmd_fit(fit_data, fit_enc, fit_seed, fit_out);
    });

    // encode
    auto* encode = app.add_subcommand("encode", "Encode a CSV file with a fitted encoder");
    static DataOpts enc_data;
    static std::string enc_encoder, enc_out;
    encode->add_option("--data", enc_data.data, "Input CSV")->required();
    encode->add_option("--schema", enc_data.schema, "Schema JSON")->required();
    encode->add_option("--encoder", enc_encoder, "Fitted encoder JSON")->required();
    encode->add_option("--out", enc_out, "Output CSV path");
    encode->callback([] {
        TabularDataset ds = enc_data.load();
        bool is_tree = false;
        auto [tree, km] = load_encoder(enc_encoder, ds.schema, is_tree);
        const Encoder& e = is_tree ? static_cast<const Encoder&>(tree)
                                   : static_cast<const Encoder&>(km);
        write_encoded_csv(e.encode(ds), ds.schema, enc_out);
    });

    // certify
    auto* cert = app.add_subcommand("certify", "Split a CSV and certify a fitted encoder");
    static DataOpts cert_data;
    static SplitOpts cert_split;
    static BudgetOpts cert_budget;
    static std::string cert_encoder, cert_metric = "dp", cert_out, cert_config;
    static uint64_t cert_seed = 0;
    static int cert_label = 0;
    cert->add_option("--data", cert_data.data, "Input CSV")->required();
    cert->add_option("--schema", cert_data.schema, "Schema JSON")->required();
    cert->add_option("--encoder", cert_encoder, "Fitted encoder JSON")->required();
    cert_split.add(cert);
    cert_budget.add(cert);
    cert->add_option("--metric", cert_metric, "dp, eopp or eo")
        ->check(CLI::IsMember({"dp", "eopp", "eo"}));
    cert->add_option("--label-index", cert_label, "Label column index");
    cert->add_option("--seed", cert_seed, "Root seed");
    cert->add_option("--out", cert_out, "Output report path");
    cert->add_option("--config", cert_config, "JSON config overriding flags");
    cert->callback([] {
        Overrides ov;
        ov.load(cert_config);
        cert_split.override_from(ov);
        cert_budget.override_from(ov);
        ov.get("metric", cert_metric);
        ov.get("label_index", cert_label);
        ov.get("seed", cert_seed);
        TabularDataset ds = cert_data.load();
        bool is_tree = false;
        auto [tree, km] = load_encoder(cert_encoder, ds.schema, is_tree);
        const Encoder& e = is_tree ? static_cast<const Encoder&>(tree)
                                   : static_cast<const Encoder&>(km);
        SplitSpec sp = cert_split.spec();
        sp.seed = stream_seed(cert_seed, "split");
        SplitResult parts = split(ds, sp);
        FairnessTarget metric = fairness_target_from_name(cert_metric);
        CertificateReport rep =
            ds.n_groups() > 2
                ? certify_multigroup(e, parts.train, parts.val, parts.test,
                                     cert_budget.budget(), metric, cert_label)
                : certify(e, parts.train, parts.val, parts.test, cert_budget.budget(), metric,
                          cert_label);
        emit(cert_out, rep.to_json_string(), "wrote certificate to");
    });

    // eval
    auto* ev = app.add_subcommand("eval", "Train downstream classifiers on an encoding");
    static DataOpts ev_data;
    static SplitOpts ev_split;
    static std::string ev_encoder, ev_out, ev_classifiers, ev_config;
    static uint64_t ev_seed = 0;
    static int ev_label = 0, ev_reps = 5;
    static bool ev_no_adversary = false;
    ev->add_option("--data", ev_data.data, "Input CSV")->required();
    ev->add_option("--schema", ev_data.schema, "Schema JSON")->required();
    ev->add_option("--encoder", ev_encoder, "Fitted encoder JSON")->required();
    ev_split.add(ev);
    ev->add_option("--classifiers", ev_classifiers,
                   "Comma-separated: logistic, one_hidden_nn_<H>, decision_tree");
    ev->add_option("--repetitions", ev_reps, "Training repetitions per classifier");
    ev->add_flag("--no-adversary", ev_no_adversary, "Skip the group-predicting adversaries");
    ev->add_option("--label-index", ev_label, "Label column index");
    ev->add_option("--seed", ev_seed, "Root seed");
    ev->add_option("--out", ev_out, "Output JSON path");
    ev->add_option("--config", ev_config, "JSON config overriding flags");
    ev->callback([] {
        Overrides ov;
        ov.load(ev_config);
        ev_split.override_from(ov);
        ov.get("classifiers", ev_classifiers);
        ov.get("repetitions", ev_reps);
        ov.get("label_index", ev_label);
        ov.get("seed", ev_seed);
        TabularDataset ds = ev_data.load();
        bool is_tree = false;
        auto [tree, km] = load_encoder(ev_encoder, ds.schema, is_tree);
        const Encoder& e = is_tree ? static_cast<const Encoder&>(tree)
                                   : static_cast<const Encoder&>(km);
        SplitSpec sp = ev_split.spec();
        sp.seed = stream_seed(ev_seed, "split");
        SplitResult parts = split(ds, sp);
        EncodedDataset etr = e.encode(parts.train), ete = e.encode(parts.test);
        std::vector<std::pair<DownstreamKind, int>> zoo;
        if (ev_classifiers.empty()) {
            zoo = default_zoo();
        } else {
            std::stringstream ss(ev_classifiers);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (!tok.empty()) zoo.push_back(zoo_entry_from_name(tok));
            }
        }
        json doc;
        doc["worst_case_empirical_dp"] = worst_case_empirical_dp(ete);
        doc["evaluations"] = json::array();
        uint64_t slot = 0;
        for (const auto& [kind, hidden] : zoo) {
            for (int target = 0; target < (ev_no_adversary ? 1 : 2); ++target) {
                EvalReport r = train_downstream(
                    etr, ete, kind,
                    target == 0 ? DownstreamTarget::Label : DownstreamTarget::Group, ev_reps,
                    stream_seed(ev_seed, "classifier", slot++), hidden, ev_label);
                json je;
                je["classifier"] = r.classifier;
                je["target"] = r.target;
                je["repetitions"] = r.repetitions;
                je["seed"] = r.seed;
                je["accuracy"] = r.accuracy;
                je["dp"] = r.dp;
                je["eopp"] = r.eopp ? json(*r.eopp) : json(nullptr);
                je["eo"] = r.eo ? json(*r.eo) : json(nullptr);
                doc["evaluations"].push_back(je);
            }
        }
        emit(ev_out, doc.dump(2), "wrote evaluation to");
    });

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "Split, fit, certify and evaluate end to end");
    static DataOpts pipe_data;
    static SplitOpts pipe_split;
    static BudgetOpts pipe_budget;
    static EncoderOpts pipe_enc;
    static std::string pipe_metric = "dp", pipe_out, pipe_config, pipe_eval_file;
    static uint64_t pipe_seed = 0;
    static size_t pipe_m = 1;
    static int pipe_reps = 5;
    static bool pipe_no_adversary = false, pipe_impute = false;
    pipe->add_option("--data", pipe_data.data, "Input CSV")->required();
    pipe->add_option("--schema", pipe_data.schema, "Schema JSON")->required();
    pipe_split.add(pipe);
    pipe_budget.add(pipe);
    pipe_enc.add(pipe);
    pipe->add_option("--metric", pipe_metric, "dp, eopp or eo")
        ->check(CLI::IsMember({"dp", "eopp", "eo"}));
    pipe->add_option("--duplicate-m", pipe_m, "Duplicate the dataset M times before splitting");
    pipe->add_option("--repetitions", pipe_reps, "Training repetitions per classifier");
    pipe->add_flag("--no-adversary", pipe_no_adversary, "Skip the group-predicting adversaries");
    pipe->add_option("--eval-file", pipe_eval_file,
                     "Separate CSV evaluated in place of the test split");
    pipe->add_flag("--impute", pipe_impute,
                   "Impute missing values in --eval-file from the main dataset");
    pipe->add_option("--seed", pipe_seed, "Root seed");
    pipe->add_option("--out", pipe_out, "Output result path");
    pipe->add_option("--config", pipe_config, "JSON config overriding flags");
    pipe->callback([] {
        Overrides ov;
        ov.load(pipe_config);
        pipe_split.override_from(ov);
        pipe_budget.override_from(ov);
        pipe_enc.override_from(ov);
        ov.get("metric", pipe_metric);
        ov.get("duplicate_m", pipe_m);
        ov.get("repetitions", pipe_reps);
        ov.get("seed", pipe_seed);
        ov.get("eval_file", pipe_eval_file);
        ov.get("impute", pipe_impute);

        RunConfig cfg;
        cfg.split = pipe_split.spec();
        pipe_enc.apply(cfg);
        cfg.budget = pipe_budget.budget();
        cfg.metric = fairness_target_from_name(pipe_metric);
        cfg.duplicate_m = pipe_m;
        cfg.seed = pipe_seed;
        cfg.repetitions = pipe_reps;
        cfg.adversary = !pipe_no_adversary;

        TabularDataset ds = pipe_data.load();
        TabularDataset eval_ds;
        bool have_eval = !pipe_eval_file.empty();
        if (have_eval) {
            eval_ds = load_csv(pipe_eval_file, ds.schema, pipe_impute);
            if (eval_ds.has_missing()) eval_ds = impute(eval_ds, ds);
        } else if (pipe_impute) {
            throw std::runtime_error("--impute needs --eval-file");
        }
        PipelineResult res = run_pipeline(ds, cfg, have_eval ? &eval_ds : nullptr);
        emit(pipe_out, res.document, "wrote result to");
    });

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Grid of pipeline runs with a Pareto summary");
    static DataOpts sw_data;
    static SplitOpts sw_split;
    static BudgetOpts sw_budget;
    static EncoderOpts sw_enc;
    static std::string sw_metric = "dp", sw_out, sw_config;
    static std::vector<double> sw_gammas, sw_vs;
    static std::vector<int> sw_leaves, sw_min_leaf;
    static uint64_t sw_seed = 0;
    static int sw_reps = 2, sw_workers = 0;
    sweep->add_option("--data", sw_data.data, "Input CSV")->required();
    sweep->add_option("--schema", sw_data.schema, "Schema JSON")->required();
    sw_split.add(sweep);
    sw_budget.add(sweep);
    sw_enc.add(sweep);
    sweep->add_option("--metric", sw_metric, "dp, eopp or eo")
        ->check(CLI::IsMember({"dp", "eopp", "eo"}));
    sweep->add_option("--gammas", sw_gammas, "Gamma grid")->delimiter(',');
    sweep->add_option("--leaves-grid", sw_leaves, "max_leaves grid")->delimiter(',');
    sweep->add_option("--min-leaf-grid", sw_min_leaf, "min_leaf_size grid")->delimiter(',');
    sweep->add_option("--vs", sw_vs, "Validation-share grid (fraction of non-test rows)")
        ->delimiter(',');
    sweep->add_option("--repetitions", sw_reps, "Training repetitions per classifier");
    sweep->add_option("--workers", sw_workers, "Concurrent grid points (or FAIRCERT_WORKERS)");
    sweep->add_option("--seed", sw_seed, "Root seed");
    sweep->add_option("--out", sw_out, "Output CSV path");
    sweep->add_option("--config", sw_config, "JSON config overriding flags");
    sweep->callback([] {
        Overrides ov;
        ov.load(sw_config);
        sw_split.override_from(ov);
        sw_budget.override_from(ov);
        sw_enc.override_from(ov);
        ov.get("metric", sw_metric);
        ov.get("gammas", sw_gammas);
        ov.get("leaves_grid", sw_leaves);
        ov.get("min_leaf_grid", sw_min_leaf);
        ov.get("vs", sw_vs);
        ov.get("repetitions", sw_reps);
        ov.get("workers", sw_workers);
        ov.get("seed", sw_seed);

        RunConfig base;
        base.split = sw_split.spec();
        sw_enc.apply(base);
        base.use_kmeans = false;
        base.budget = sw_budget.budget();
        base.metric = fairness_target_from_name(sw_metric);
        base.seed = sw_seed;
        base.repetitions = sw_reps;

        SweepGrids grids;
        if (!sw_gammas.empty()) grids.gammas = sw_gammas;
        if (!sw_leaves.empty()) grids.max_leaves = sw_leaves;
        if (!sw_min_leaf.empty()) grids.min_leaf_sizes = sw_min_leaf;
        if (!sw_vs.empty()) grids.vs = sw_vs;

        TabularDataset ds = sw_data.load();
        SweepResult res = run_sweep(ds, base, grids, resolve_workers(sw_workers));
        emit(sw_out, res.csv(), "wrote sweep to");
    });

    // coverage
    auto* cov = app.add_subcommand("coverage", "Monte Carlo validity check of the certificates");
    static BudgetOpts cov_budget;
    static std::string cov_spec, cov_out, cov_config;
    static uint64_t cov_seed = 0;
    static size_t cov_trials = 1000;
    static int cov_workers = 0;
    cov->add_option("--spec", cov_spec, "Ground-truth distribution spec JSON")->required();
    cov->add_option("--trials", cov_trials, "Number of independent trials");
    cov_budget.add(cov);
    cov->add_option("--workers", cov_workers, "Concurrent trials (or FAIRCERT_WORKERS)");
    cov->add_option("--seed", cov_seed, "Root seed");
    cov->add_option("--out", cov_out, "Output JSON path");
    cov->add_option("--config", cov_config, "JSON config overriding flags");
    cov->callback([] {
        Overrides ov;
        ov.load(cov_config);
        cov_budget.override_from(ov);
        ov.get("trials", cov_trials);
        ov.get("workers", cov_workers);
        ov.get("seed", cov_seed);
        CoverageSpec spec = CoverageSpec::load(cov_spec);
        CoverageResult res = run_coverage(spec, cov_trials, cov_budget.budget(), cov_seed,
                                          resolve_workers(cov_workers));
        emit(cov_out, res.to_json_string(), "wrote coverage to");
    });

    // describe
    auto* desc = app.add_subcommand("describe", "Print cell predicates and bounds");
    static std::string desc_result;
    static int desc_cell = 0;  // 0 = every cell
    desc->add_option("--result", desc_result, "Pipeline result JSON")->required();
    desc->add_option("--cell", desc_cell, "Cell id (1-based); all cells when omitted");
    desc->callback([] {
        json doc = json::parse(read_text_file(desc_result));
        if (doc.value("format", "") != "faircert-result") {
            throw std::runtime_error("'" + desc_result + "' is not a pipeline result document");
        }
        if (doc.at("encoder").at("kind") != "fair_tree") {
            throw std::runtime_error("no symbolic description: encoder is not a tree");
        }
        FeatureSchema schema = FeatureSchema::from_json_string(doc.at("schema").dump());
        FairTree tree = FairTree::from_json_string(doc.at("encoder").at("model").dump(), schema);
        auto show_cell = [&](int id) {
            std::vector<std::string> preds = tree.describe_cell(id);
            std::cout << "cell " << id << " of " << tree.n_cells() << ":\n";
            if (preds.empty()) {
                std::cout << "  (entire domain)\n";
            } else {
                for (const std::string& p : preds) std::cout << "  " << p << "\n";
            }
            std::function<void(const json&, const std::string&)> show =
                [&](const json& cert, const std::string& label) {
                    if (cert.contains("cells")) {
                        for (const json& c : cert.at("cells")) {
                            if (c.at("id").get<int>() != id) continue;
                            std::cout << "  " << (label.empty() ? "bound" : label) << ": n_i="
                                      << c.at("n").get<int64_t>()
                                      << " m_i=" << c.at("m").get<int64_t>()
                                      << " t_i=" << fmt_double(c.at("t").get<double>())
                                      << (c.at("degenerate").get<bool>() ? " (degenerate)" : "")
                                      << "\n";
                        }
                    } else if (cert.contains("children")) {
                        for (const json& ch : cert.at("children")) {
                            show(ch, ch.value("restriction", label));
                        }
                    }
                };
            show(doc.at("certificate"), "");
        };
        if (desc_cell > 0) {
            show_cell(desc_cell);
        } else {
            for (int id = 1; id <= tree.n_cells(); ++id) show_cell(id);
        }
    });

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic CSV and schema");
    static SynthSpec sy_spec;
    static std::string sy_data, sy_schema, sy_config;
    synth->add_option("--n", sy_spec.n, "Rows");
    synth->add_option("--seed", sy_spec.seed, "Seed");
    synth->add_option("--rho", sy_spec.rho, "Group-label correlation");
    synth->add_option("--continuous", sy_spec.continuous, "Continuous feature count");
    synth->add_option("--categorical", sy_spec.categorical, "Categorical feature count");
    synth->add_option("--categories", sy_spec.categories, "Categories per categorical feature");
    synth->add_option("--groups", sy_spec.groups, "Sensitive group count");
    synth->add_option("--p-s0", sy_spec.p_s0, "P(s=0) for two groups");
    synth->add_option("--out-data", sy_data, "Output CSV path")->required();
    synth->add_option("--out-schema", sy_schema, "Output schema path")->required();
    synth->add_option("--config", sy_config, "JSON config overriding flags");
    synth->callback([] {
        Overrides ov;
        ov.load(sy_config);
        ov.get("n", sy_spec.n);
        ov.get("seed", sy_spec.seed);
        ov.get("rho", sy_spec.rho);
        ov.get("continuous", sy_spec.continuous);
        ov.get("categorical", sy_spec.categorical);
        ov.get("categories", sy_spec.categories);
        ov.get("groups", sy_spec.groups);
        ov.get("p_s0", sy_spec.p_s0);
        TabularDataset ds = make_synthetic(sy_spec);
        write_csv(ds, sy_data);
        ds.schema.save(sy_schema);
        std::cout << "wrote " << ds.n() << " rows to " << sy_data << " (schema " << sy_schema
                  << ")\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        json err;
        err["error"] = std::string(e.what());
        std::cout << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json err;
        err["error"] = std::string(e.what());
        std::cout << err.dump() << "\n";
        return 1;
    }
    return 0;
}
