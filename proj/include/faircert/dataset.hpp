#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace faircert {

enum class FeatureKind { Continuous, Categorical };

struct Feature {
    std::string name;
    FeatureKind kind = FeatureKind::Continuous;
    std::vector<std::string> categories;  // categorical only, >= 2 entries
};

// Typed column layout of a dataset: d feature columns plus one sensitive
// column and at least one label column. Sensitive/label values are small
// non-negative integers in the CSV unless a string->id mapping is declared.
struct FeatureSchema {
    std::vector<Feature> features;
    std::string sensitive_column;
    std::vector<std::string> label_columns;
    std::vector<std::string> sensitive_values;               // optional string coding
    std::vector<std::vector<std::string>> label_values;      // optional, per label column

    void validate() const;
    int feature_index(const std::string& name) const;  // -1 if absent
    std::string to_json_string() const;
    static FeatureSchema from_json_string(const std::string& text);
    static FeatureSchema load(const std::string& path);
    void save(const std::string& path) const;
    uint64_t hash() const;  // FNV-1a over the canonical JSON form
};

class TabularDataset {
  public:
    FeatureSchema schema;
    std::vector<double> feat;                // row-major n*d, categorical as index
    std::vector<int> sens;                   // per-row group id
    std::vector<std::vector<int>> labels;    // [label column][row]
    std::vector<uint8_t> missing_mask;       // empty unless missing values present

    size_t n() const { return sens.size(); }
    size_t d() const { return schema.features.size(); }
    double at(size_t row, size_t col) const { return feat[row * d() + col]; }
    bool is_missing(size_t row, size_t col) const {
        return !missing_mask.empty() && missing_mask[row * d() + col] != 0;
    }
    bool has_missing() const;
    int label(size_t row, size_t col = 0) const { return labels[col][row]; }

    int n_groups() const;   // 1 + max observed sensitive id
    int n_classes(size_t label_col = 0) const;

    TabularDataset select_rows(const std::vector<size_t>& rows) const;
    void validate() const;
};

struct SplitSpec {
    double train_fraction = 0.6;
    double val_fraction = 0.2;
    double test_fraction = 0.2;
    uint64_t seed = 0;

    void validate() const;
};

struct SplitResult {
    TabularDataset train, val, test;
};

// Loading treats an empty field as a missing value; missing values are an
// error unless allow_missing is set (imputation is a separate, explicit step).
TabularDataset load_csv(const std::string& path, const FeatureSchema& schema,
                        bool allow_missing = false);
void write_csv(const TabularDataset& ds, const std::string& path);

// Deterministic partition of rows given (seed, n); floored val/test sizes,
// remainder rows go to train.
SplitResult split(const TabularDataset& ds, const SplitSpec& spec);

TabularDataset duplicate(const TabularDataset& ds, size_t m);

// Fills each missing continuous value with the reference column mean and each
// missing categorical value with the reference column mode (ties -> lowest
// category index).
TabularDataset impute(const TabularDataset& ds, const TabularDataset& reference);

}  // namespace faircert
