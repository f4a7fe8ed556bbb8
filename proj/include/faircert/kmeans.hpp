#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "faircert/dataset.hpp"
#include "faircert/encoded.hpp"

namespace faircert {

// Fairness-unaware baseline encoder: k-means over a numeric embedding of the
// rows (continuous features standardized with train statistics, categorical
// features one-hot). Cell representations are the cluster centers.
class KMeansEncoder : public Encoder {
  public:
    FeatureSchema schema;
    int k = 1;
    uint64_t seed = 0;
    int max_iters = 100;
    std::vector<double> mean, scale;            // per original feature, continuous entries only
    std::vector<std::vector<double>> centers;   // k x embedded_dim
    std::vector<double> wcss_trace;             // per-iteration objective, not serialized

    int embedded_dim() const;
    std::vector<double> embed_row(const TabularDataset& ds, size_t row) const;
    int nearest_center(const std::vector<double>& x) const;  // lowest index wins ties

    EncodedDataset encode(const TabularDataset& ds) const override;
    int n_cells() const override { return static_cast<int>(centers.size()); }
    std::string kind() const override { return "kmeans"; }
    std::string to_json_string() const override;

    void save(const std::string& path) const;
    static KMeansEncoder from_json_string(const std::string& text, const FeatureSchema& schema);
    static KMeansEncoder load(const std::string& path, const FeatureSchema& schema);
};

// Lloyd's algorithm from a deterministic greedy farthest-point initialization
// (seeded start row). Stops at an assignment fixpoint or after max_iters.
KMeansEncoder fit_kmeans(const TabularDataset& train, int k, uint64_t seed, int max_iters = 100);

}  // namespace faircert
