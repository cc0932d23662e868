#pragma once

#include "disent/numerics.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace disent {

// Cluster-vs-class co-occurrence counts. Rows index distinct values of the
// first labeling, columns the second, both in ascending label order.
struct ContingencyTable {
    std::vector<std::int64_t> counts;  // rows x cols, row-major
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::int64_t> row_sums;
    std::vector<std::int64_t> col_sums;
    std::int64_t total = 0;

    std::int64_t operator()(std::size_t i, std::size_t j) const { return counts[i * cols + j]; }
};

ContingencyTable contingency(std::span<const int> u, std::span<const int> v);

// Natural-log entropy of a marginal.
double entropy(std::span<const std::int64_t> counts, std::int64_t total);

double mutual_information(const ContingencyTable& table);

// Expected MI under the hypergeometric (permutation) model, in log-Gamma space.
double expected_mutual_information(std::span<const std::int64_t> row_sums,
                                   std::span<const std::int64_t> col_sums, std::int64_t total);
double expected_mutual_information(const ContingencyTable& table);

// How the two entropies are combined into a normalizer.
enum class Normalization { Max, Arithmetic, Geometric, Min };

std::string_view to_string(Normalization n) noexcept;
std::optional<Normalization> parse_normalization(std::string_view name) noexcept;

double ami(std::span<const int> u, std::span<const int> v,
           Normalization norm = Normalization::Max);
double nmi(std::span<const int> u, std::span<const int> v,
           Normalization norm = Normalization::Geometric);

struct ClusterScores {
    double ami = 0.0;
    double nmi = 0.0;
};

ClusterScores score(std::span<const int> truth, std::span<const int> predicted,
                    Normalization ami_norm = Normalization::Max,
                    Normalization nmi_norm = Normalization::Geometric);

// counts(c, t): samples of fine class c whose largest activation is neuron t
// (ties to the lowest index). Classes are 0..max(label).
struct ActivationHistogram {
    std::size_t classes = 0;
    std::size_t neurons = 0;
    std::vector<std::int64_t> counts;

    std::int64_t operator()(std::size_t c, std::size_t t) const { return counts[c * neurons + t]; }
};

ActivationHistogram activation_histogram(const DenseMatrix& activations,
                                         std::span<const int> fine_labels);

// Neurons that are the argmax for at least `fraction` of the samples.
std::size_t count_spread_neurons(const DenseMatrix& activations, double fraction);

}  // namespace disent
