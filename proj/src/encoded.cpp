#include "faircert/encoded.hpp"

#include <stdexcept>

#include "faircert/rng.hpp"

namespace faircert {

EncodedDataset EncodedDataset::filter(const std::vector<char>& keep) const {
    if (keep.size() != n_rows()) throw std::invalid_argument("filter: mask size mismatch");
    EncodedDataset out;
    out.k = k;
    out.reps = reps;
    out.labels.resize(labels.size());
    for (size_t r = 0; r < n_rows(); ++r) {
        if (!keep[r]) continue;
        out.cell.push_back(cell[r]);
        out.sensitive.push_back(sensitive[r]);
        for (size_t c = 0; c < labels.size(); ++c) out.labels[c].push_back(labels[c][r]);
    }
    return out;
}

EncodedDataset EncodedDataset::filter_by_label(size_t label_col, int value) const {
    if (label_col >= labels.size()) throw std::invalid_argument("filter_by_label: bad column");
    std::vector<char> keep(n_rows());
    for (size_t r = 0; r < n_rows(); ++r) keep[r] = labels[label_col][r] == value;
    return filter(keep);
}

EncodedDataset EncodedDataset::restrict_groups(int group_a, int group_b) const {
    std::vector<char> keep(n_rows());
    for (size_t r = 0; r < n_rows(); ++r) {
        keep[r] = sensitive[r] == group_a || sensitive[r] == group_b;
    }
    EncodedDataset out = filter(keep);
    for (auto& s : out.sensitive) s = (s == group_a) ? 0 : 1;
    return out;
}

uint64_t Encoder::hash() const { return fnv1a64(to_json_string()); }

}  // namespace faircert
