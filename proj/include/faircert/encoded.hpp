#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace faircert {

class TabularDataset;

// Output of a restricted encoder: every row lands in one of k cells and all
// rows of a cell share the cell's representation vector. Sensitive and label
// values are carried through unchanged.
struct EncodedDataset {
    int k = 0;
    std::vector<int> cell;                   // per-row cell id in [0, k)
    std::vector<std::vector<double>> reps;   // one representation per cell
    std::vector<int> sensitive;
    std::vector<std::vector<int>> labels;    // [label column][row]

    size_t n_rows() const { return cell.size(); }

    EncodedDataset filter(const std::vector<char>& keep) const;
    EncodedDataset filter_by_label(size_t label_col, int value) const;
    // Keeps rows of the two given groups and remaps them to s=0 / s=1.
    EncodedDataset restrict_groups(int group_a, int group_b) const;
};

// Common surface of the restricted encoders; the certification pipeline only
// needs encode() and the cell count.
class Encoder {
  public:
    virtual ~Encoder() = default;
    virtual EncodedDataset encode(const TabularDataset& ds) const = 0;
    virtual int n_cells() const = 0;
    virtual std::string kind() const = 0;
    virtual std::string to_json_string() const = 0;
    uint64_t hash() const;
};

}  // namespace faircert
