#include "faircert/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "faircert/rng.hpp"
#include "json.hpp"

namespace faircert {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::string loc(const std::string& path, size_t line) {
    return path + ":" + std::to_string(line);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e && std::isfinite(out);
}

bool parse_int(const std::string& s, long& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

int coded_value(const std::string& raw, const std::vector<std::string>& coding,
                const std::string& path, size_t line, const std::string& col) {
    if (!coding.empty()) {
        auto it = std::find(coding.begin(), coding.end(), raw);
        if (it == coding.end()) {
            fail(loc(path, line) + ": column '" + col + "': value '" + raw +
                 "' not in declared coding");
        }
        return static_cast<int>(it - coding.begin());
    }
    long v = 0;
    if (!parse_int(raw, v) || v < 0) {
        fail(loc(path, line) + ": column '" + col + "': expected a non-negative integer, got '" +
             raw + "'");
    }
    return static_cast<int>(v);
}

}  // namespace

void FeatureSchema::validate() const {
    std::set<std::string> names;
    if (features.empty()) fail("schema: no features declared");
    for (const auto& f : features) {
        if (f.name.empty()) fail("schema: empty feature name");
        if (!names.insert(f.name).second) fail("schema: duplicate feature name '" + f.name + "'");
        if (f.kind == FeatureKind::Categorical) {
            if (f.categories.size() < 2) {
                fail("schema: categorical feature '" + f.name + "' needs >= 2 categories");
            }
            std::set<std::string> cats(f.categories.begin(), f.categories.end());
            if (cats.size() != f.categories.size()) {
                fail("schema: duplicate category in feature '" + f.name + "'");
            }
        } else if (!f.categories.empty()) {
            fail("schema: continuous feature '" + f.name + "' declares categories");
        }
    }
    if (sensitive_column.empty()) fail("schema: sensitive column missing");
    if (label_columns.empty()) fail("schema: at least one label column required");
    if (names.count(sensitive_column)) {
        fail("schema: sensitive column '" + sensitive_column + "' collides with a feature");
    }
    std::set<std::string> lbl;
    for (const auto& l : label_columns) {
        if (names.count(l)) fail("schema: label column '" + l + "' collides with a feature");
        if (l == sensitive_column) fail("schema: label column equals sensitive column");
        if (!lbl.insert(l).second) fail("schema: duplicate label column '" + l + "'");
    }
    if (!label_values.empty() && label_values.size() != label_columns.size()) {
        fail("schema: label_values must match label_columns");
    }
}

int FeatureSchema::feature_index(const std::string& name) const {
    for (size_t j = 0; j < features.size(); ++j) {
        if (features[j].name == name) return static_cast<int>(j);
    }
    return -1;
}

std::string FeatureSchema::to_json_string() const {
    json j;
    j["features"] = json::array();
    for (const auto& f : features) {
        json fj;
        fj["name"] = f.name;
        fj["kind"] = f.kind == FeatureKind::Continuous ? "continuous" : "categorical";
        if (f.kind == FeatureKind::Categorical) fj["categories"] = f.categories;
        j["features"].push_back(fj);
    }
    j["sensitive"] = sensitive_column;
    j["labels"] = label_columns;
    if (!sensitive_values.empty()) j["sensitive_values"] = sensitive_values;
    if (!label_values.empty()) j["label_values"] = label_values;
    return j.dump();
}

FeatureSchema FeatureSchema::from_json_string(const std::string& text) {
    json j = json::parse(text);
    FeatureSchema s;
    for (const auto& fj : j.at("features")) {
        Feature f;
        f.name = fj.at("name").get<std::string>();
        const std::string kind = fj.at("kind").get<std::string>();
        if (kind == "continuous") {
            f.kind = FeatureKind::Continuous;
        } else if (kind == "categorical") {
            f.kind = FeatureKind::Categorical;
            f.categories = fj.at("categories").get<std::vector<std::string>>();
        } else {
            fail("schema: unknown feature kind '" + kind + "'");
        }
        s.features.push_back(std::move(f));
    }
    s.sensitive_column = j.at("sensitive").get<std::string>();
    s.label_columns = j.at("labels").get<std::vector<std::string>>();
    if (j.contains("sensitive_values")) {
        s.sensitive_values = j["sensitive_values"].get<std::vector<std::string>>();
    }
    if (j.contains("label_values")) {
        s.label_values = j["label_values"].get<std::vector<std::vector<std::string>>>();
    }
    s.validate();
    return s;
}

FeatureSchema FeatureSchema::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("schema: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_string(buf.str());
}

void FeatureSchema::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) fail("schema: cannot write '" + path + "'");
    out << to_json_string() << "\n";
}

uint64_t FeatureSchema::hash() const { return fnv1a64(to_json_string()); }

bool TabularDataset::has_missing() const {
    return std::any_of(missing_mask.begin(), missing_mask.end(), [](uint8_t m) { return m != 0; });
}

int TabularDataset::n_groups() const {
    int g = 0;
    for (int s : sens) g = std::max(g, s + 1);
    return g;
}

int TabularDataset::n_classes(size_t label_col) const {
    int c = 0;
    for (int y : labels[label_col]) c = std::max(c, y + 1);
    return c;
}

TabularDataset TabularDataset::select_rows(const std::vector<size_t>& rows) const {
    TabularDataset out;
    out.schema = schema;
    const size_t dd = d();
    out.feat.reserve(rows.size() * dd);
    out.sens.reserve(rows.size());
    out.labels.resize(labels.size());
    if (!missing_mask.empty()) out.missing_mask.reserve(rows.size() * dd);
    for (size_t r : rows) {
        for (size_t j = 0; j < dd; ++j) {
            out.feat.push_back(feat[r * dd + j]);
            if (!missing_mask.empty()) out.missing_mask.push_back(missing_mask[r * dd + j]);
        }
        out.sens.push_back(sens[r]);
        for (size_t c = 0; c < labels.size(); ++c) out.labels[c].push_back(labels[c][r]);
    }
    return out;
}

void TabularDataset::validate() const {
    if (n() == 0) fail("dataset: empty");
    if (feat.size() != n() * d()) fail("dataset: feature buffer size mismatch");
    if (labels.size() != schema.label_columns.size()) fail("dataset: label column count mismatch");
    for (const auto& col : labels) {
        if (col.size() != n()) fail("dataset: label column length mismatch");
    }
    for (size_t j = 0; j < d(); ++j) {
        const auto& f = schema.features[j];
        if (f.kind != FeatureKind::Categorical) continue;
        for (size_t r = 0; r < n(); ++r) {
            if (is_missing(r, j)) continue;
            const double v = at(r, j);
            if (v < 0 || v >= static_cast<double>(f.categories.size()) || v != std::floor(v)) {
                fail("dataset: row " + std::to_string(r) + " feature '" + f.name +
                     "' holds an undeclared category index");
            }
        }
    }
}

void SplitSpec::validate() const {
    if (!(train_fraction > 0 && train_fraction < 1) || !(val_fraction > 0 && val_fraction < 1) ||
        !(test_fraction > 0 && test_fraction < 1)) {
        fail("split: fractions must lie in (0,1)");
    }
    if (std::fabs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-12) {
        fail("split: fractions must sum to 1");
    }
}

TabularDataset load_csv(const std::string& path, const FeatureSchema& schema, bool allow_missing) {
    schema.validate();
    std::ifstream in(path);
    if (!in) fail("load_csv: cannot open '" + path + "'");

    std::string header;
    if (!std::getline(in, header)) fail("load_csv: '" + path + "' is empty");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    const auto cols = split_line(header);

    const size_t d = schema.features.size();
    std::vector<int> feat_col(d, -1);
    int sens_col = -1;
    std::vector<int> label_col(schema.label_columns.size(), -1);
    for (size_t c = 0; c < cols.size(); ++c) {
        const std::string& name = cols[c];
        const int fi = schema.feature_index(name);
        if (fi >= 0) {
            feat_col[fi] = static_cast<int>(c);
        } else if (name == schema.sensitive_column) {
            sens_col = static_cast<int>(c);
        } else {
            for (size_t l = 0; l < schema.label_columns.size(); ++l) {
                if (name == schema.label_columns[l]) label_col[l] = static_cast<int>(c);
            }
        }
    }
    for (size_t j = 0; j < d; ++j) {
        if (feat_col[j] < 0) {
            fail(loc(path, 1) + ": missing column '" + schema.features[j].name + "'");
        }
    }
    if (sens_col < 0) fail(loc(path, 1) + ": missing column '" + schema.sensitive_column + "'");
    for (size_t l = 0; l < schema.label_columns.size(); ++l) {
        if (label_col[l] < 0) {
            fail(loc(path, 1) + ": missing column '" + schema.label_columns[l] + "'");
        }
    }

    // Category name -> index lookup per categorical feature.
    std::vector<std::unordered_map<std::string, int>> cat_index(d);
    for (size_t j = 0; j < d; ++j) {
        const auto& f = schema.features[j];
        for (size_t c = 0; c < f.categories.size(); ++c) {
            cat_index[j][f.categories[c]] = static_cast<int>(c);
        }
    }

    TabularDataset ds;
    ds.schema = schema;
    ds.labels.resize(schema.label_columns.size());
    bool any_missing = false;
    std::vector<uint8_t> miss_row(d, 0);

    std::string line;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != cols.size()) {
            fail(loc(path, line_no) + ": expected " + std::to_string(cols.size()) +
                 " fields, got " + std::to_string(fields.size()));
        }
        std::fill(miss_row.begin(), miss_row.end(), 0);
        for (size_t j = 0; j < d; ++j) {
            const std::string& raw = fields[feat_col[j]];
            const auto& f = schema.features[j];
            if (raw.empty()) {
                if (!allow_missing) {
                    fail(loc(path, line_no) + ": column '" + f.name +
                         "': missing value (enable imputation to accept)");
                }
                any_missing = true;
                miss_row[j] = 1;
                ds.feat.push_back(0.0);
                continue;
            }
            if (f.kind == FeatureKind::Continuous) {
                double v = 0;
                if (!parse_double(raw, v)) {
                    fail(loc(path, line_no) + ": column '" + f.name +
                         "': unparseable value '" + raw + "'");
                }
                ds.feat.push_back(v);
            } else {
                auto it = cat_index[j].find(raw);
                if (it == cat_index[j].end()) {
                    fail(loc(path, line_no) + ": column '" + f.name + "': category '" + raw +
                         "' not declared in schema");
                }
                ds.feat.push_back(static_cast<double>(it->second));
            }
        }
        const std::string& sraw = fields[sens_col];
        if (sraw.empty()) fail(loc(path, line_no) + ": column '" + schema.sensitive_column +
                               "': missing sensitive value");
        ds.sens.push_back(coded_value(sraw, schema.sensitive_values, path, line_no,
                                      schema.sensitive_column));
        for (size_t l = 0; l < schema.label_columns.size(); ++l) {
            const std::string& lraw = fields[label_col[l]];
            if (lraw.empty()) fail(loc(path, line_no) + ": column '" + schema.label_columns[l] +
                                   "': missing label value");
            const auto& coding =
                schema.label_values.empty() ? std::vector<std::string>{} : schema.label_values[l];
            ds.labels[l].push_back(
                coded_value(lraw, coding, path, line_no, schema.label_columns[l]));
        }
        if (any_missing && ds.missing_mask.size() < ds.feat.size()) {
            // Backfill mask for rows read before the first missing value.
            ds.missing_mask.resize(ds.feat.size() - d, 0);
            ds.missing_mask.insert(ds.missing_mask.end(), miss_row.begin(), miss_row.end());
        }
    }
    if (ds.n() == 0) fail("load_csv: '" + path + "' has no data rows");
    ds.validate();
    return ds;
}

void write_csv(const TabularDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail("write_csv: cannot write '" + path + "'");
    const auto& schema = ds.schema;
    for (size_t j = 0; j < schema.features.size(); ++j) {
        if (j) out << ',';
        out << schema.features[j].name;
    }
    out << ',' << schema.sensitive_column;
    for (const auto& l : schema.label_columns) out << ',' << l;
    out << '\n';
    out.precision(17);
    for (size_t r = 0; r < ds.n(); ++r) {
        for (size_t j = 0; j < ds.d(); ++j) {
            if (j) out << ',';
            if (ds.is_missing(r, j)) continue;  // empty field = missing
            const auto& f = schema.features[j];
            if (f.kind == FeatureKind::Continuous) {
                out << ds.at(r, j);
            } else {
                out << f.categories[static_cast<size_t>(ds.at(r, j))];
            }
        }
        if (schema.sensitive_values.empty()) {
            out << ',' << ds.sens[r];
        } else {
            out << ',' << schema.sensitive_values[ds.sens[r]];
        }
        for (size_t l = 0; l < ds.labels.size(); ++l) {
            if (schema.label_values.empty()) {
                out << ',' << ds.labels[l][r];
            } else {
                out << ',' << schema.label_values[l][ds.labels[l][r]];
            }
        }
        out << '\n';
    }
}

SplitResult split(const TabularDataset& ds, const SplitSpec& spec) {
    spec.validate();
    const size_t n = ds.n();
    const auto fsize = [n](double frac) {
        return static_cast<size_t>(std::floor(frac * static_cast<double>(n)));
    };
    const size_t n_train_floor = fsize(spec.train_fraction);
    const size_t n_val = fsize(spec.val_fraction);
    const size_t n_test = fsize(spec.test_fraction);
    if (n_train_floor < 1 || n_val < 1 || n_test < 1) {
        fail("split: a fraction is too small for n=" + std::to_string(n));
    }
    const size_t n_train = n - n_val - n_test;  // remainder rows go to train

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    // Hand-rolled Fisher-Yates: std::shuffle is not portable across stdlibs.
    std::mt19937_64 rng(spec.seed);
    for (size_t i = n; i > 1; --i) {
        const size_t j = static_cast<size_t>(bounded(rng, i));
        std::swap(order[i - 1], order[j]);
    }

    SplitResult out;
    out.train = ds.select_rows({order.begin(), order.begin() + n_train});
    out.val = ds.select_rows({order.begin() + n_train, order.begin() + n_train + n_val});
    out.test = ds.select_rows({order.begin() + n_train + n_val, order.end()});
    return out;
}

TabularDataset duplicate(const TabularDataset& ds, size_t m) {
    if (m < 1) fail("duplicate: M must be >= 1");
    if (m > 1 && ds.n() > std::numeric_limits<size_t>::max() / m) {
        fail("duplicate: row count overflow");
    }
    TabularDataset out;
    out.schema = ds.schema;
    out.labels.resize(ds.labels.size());
    out.feat.reserve(ds.feat.size() * m);
    out.sens.reserve(ds.n() * m);
    for (size_t copy = 0; copy < m; ++copy) {
        out.feat.insert(out.feat.end(), ds.feat.begin(), ds.feat.end());
        out.sens.insert(out.sens.end(), ds.sens.begin(), ds.sens.end());
        if (!ds.missing_mask.empty()) {
            out.missing_mask.insert(out.missing_mask.end(), ds.missing_mask.begin(),
                                    ds.missing_mask.end());
        }
        for (size_t c = 0; c < ds.labels.size(); ++c) {
            out.labels[c].insert(out.labels[c].end(), ds.labels[c].begin(), ds.labels[c].end());
        }
    }
    return out;
}

TabularDataset impute(const TabularDataset& ds, const TabularDataset& reference) {
    if (reference.has_missing()) fail("impute: reference dataset has missing values");
    if (ds.schema.hash() != reference.schema.hash()) fail("impute: schema mismatch");
    TabularDataset out = ds;
    const size_t d = ds.d();
    for (size_t j = 0; j < d; ++j) {
        bool col_missing = false;
        for (size_t r = 0; r < ds.n() && !col_missing; ++r) col_missing = ds.is_missing(r, j);
        if (!col_missing) continue;
        const auto& f = ds.schema.features[j];
        double fill = 0.0;
        if (f.kind == FeatureKind::Continuous) {
            double sum = 0.0;
            for (size_t r = 0; r < reference.n(); ++r) sum += reference.at(r, j);
            fill = sum / static_cast<double>(reference.n());
        } else {
            std::vector<size_t> counts(f.categories.size(), 0);
            for (size_t r = 0; r < reference.n(); ++r) {
                counts[static_cast<size_t>(reference.at(r, j))]++;
            }
            size_t best = 0;
            for (size_t c = 1; c < counts.size(); ++c) {
                if (counts[c] > counts[best]) best = c;  // ties keep the lowest index
            }
            fill = static_cast<double>(best);
        }
        for (size_t r = 0; r < ds.n(); ++r) {
            if (ds.is_missing(r, j)) out.feat[r * d + j] = fill;
        }
    }
    out.missing_mask.clear();
    return out;
}

}  // namespace faircert
