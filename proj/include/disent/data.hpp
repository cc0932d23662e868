#pragma once

#include "disent/network.hpp"
#include "disent/numerics.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace disent {

// Fine class -> binary group. Either "fine < threshold ? 0 : 1" or an
// explicit table.
class GroupMapping {
public:
    static GroupMapping threshold(int threshold);
    static GroupMapping table(std::map<int, int> table);

    // Throws Mapping if the class is not covered.
    int group_of(int fine_label) const;
    std::string describe() const;

    friend bool operator==(const GroupMapping&, const GroupMapping&) = default;

private:
    std::optional<int> threshold_;
    std::map<int, int> table_;
};

struct LabeledDataset {
    DenseMatrix features;
    std::vector<int> fine_labels;   // evaluation-only ground truth
    std::vector<int> group_labels;  // training target; empty until grouped
    std::string name;
    std::optional<GroupMapping> mapping;

    std::size_t size() const noexcept { return features.rows(); }
    bool grouped() const noexcept { return !group_labels.empty(); }

    // Shared invariant check for every constructor output.
    void validate() const;

    // Features and group labels only.
    TrainingView training_view() const;

    LabeledDataset subset(std::span<const std::size_t> indices) const;
};

struct BlobOptions {
    std::size_t n_per_class = 100;
    std::size_t n_classes = 10;
    std::size_t dim = 20;
    double center_scale = 1.0;
    double noise_sigma = 0.25;
    std::uint64_t seed = 1;
    // Centers closer than this many noise sigmas trigger regeneration with
    // the next seed. Zero disables the guard.
    double min_separation_sigmas = 4.0;
};

// Gaussian blobs around seeded class centers; group = fine < n_classes/2.
LabeledDataset gen_blobs(const BlobOptions& options);

// Smallest pairwise distance between class means, computed from the data.
double min_center_distance(const DenseMatrix& centers);

// Big-endian IDX image/label pair (MNIST layout). Pixels scaled by 1/255.
// The result carries fine labels only.
LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

LabeledDataset apply_grouping(const LabeledDataset& ds, const GroupMapping& mapping);

struct DatasetSplit {
    LabeledDataset train;
    LabeledDataset validation;
    LabeledDataset test;
};

// Seeded shuffle, then contiguous cut by the three fractions.
DatasetSplit split(const LabeledDataset& ds, const std::array<double, 3>& fractions,
                   std::uint64_t seed);

// First `count` rows of a seeded permutation.
LabeledDataset subsample(const LabeledDataset& ds, std::size_t count, std::uint64_t seed);

// CSV with header feature_0..feature_{d-1},fine_label,group_label.
// Ungrouped datasets write -1 group labels.
std::string dataset_to_csv(const LabeledDataset& ds);
LabeledDataset dataset_from_csv(const std::string& text, const std::string& name = "csv");
void save_dataset_csv(const LabeledDataset& ds, const std::filesystem::path& path);
LabeledDataset load_dataset_csv(const std::filesystem::path& path);

}  // namespace disent
