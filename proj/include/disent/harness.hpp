#pragma once

#include "disent/clustering.hpp"
#include "disent/config.hpp"
#include "disent/data.hpp"
#include "disent/losses.hpp"
#include "disent/metrics.hpp"
#include "disent/network.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace disent {

// "baseline" for LossKind::None, otherwise the loss name.
std::string method_name(LossKind kind);

struct DataConfig {
    std::string source = "blobs";
    BlobOptions blobs;
    std::filesystem::path idx_images;
    std::filesystem::path idx_labels;
    std::filesystem::path csv_path;
    std::size_t max_samples = 0;
    int group_threshold = 5;
    std::array<double, 3> fractions{0.8, 0.1, 0.1};
    std::uint64_t split_seed = 1;
};

struct ExperimentConfig {
    DataConfig data;
    std::vector<std::size_t> hidden_sizes{32, 10};
    Activation hidden_activation = Activation::Relu;
    TrainConfig train;
    std::optional<double> margin_override;
    double single_margin = kDefaultSingleMargin;
    double multi_margin = kDefaultMultiMargin;
    double multi2_margin = kDefaultMultiMargin;
    double loss_weight = 1.0;
    int target_layer = -1;
    std::vector<LossKind> methods;
    std::vector<std::uint64_t> seeds{1, 2, 3};
    int layer = -1;
    KMeansOptions cluster;
    Normalization ami_norm = Normalization::Max;
    Normalization nmi_norm = Normalization::Geometric;
    double spread_fraction = 0.05;
    std::filesystem::path output_dir = "out";
    nlohmann::json echo;  // flat config the values came from

    static ExperimentConfig from_config(const Config& config);
    void validate() const;

    LossSpec loss_for(LossKind kind) const;
    // [input, hidden..., 1]
    std::vector<std::size_t> layer_sizes(std::size_t input_dim) const;
    std::vector<Activation> activations() const;
    std::size_t representation_layer(int requested) const;
};

// Source dataset, grouped and optionally subsampled.
LabeledDataset load_dataset(const DataConfig& data);
DatasetSplit prepare_splits(const DataConfig& data);

// Trains one model on the grouped training split.
TrainResult train_method(const ExperimentConfig& config, const LabeledDataset& train_set, LossKind method,
                         std::uint64_t seed);

struct RunRow {
    std::string method;
    std::uint64_t seed = 0;
    std::string split;
    double ami = 0.0;
    double nmi = 0.0;
    double train_acc = 0.0;
};

struct SpreadRow {
    std::string method;
    std::uint64_t seed = 0;
    std::size_t active_neurons = 0;
    double test_acc = 0.0;
};

struct SummaryRow {
    std::string method;
    std::string split;
    std::size_t runs = 0;
    double ami_mean = 0.0, ami_std = 0.0;
    double nmi_mean = 0.0, nmi_std = 0.0;
    double train_acc_mean = 0.0, train_acc_std = 0.0;
};

struct ExperimentReport {
    std::vector<RunRow> rows;
    std::vector<SpreadRow> spread;
    std::vector<SummaryRow> summary;
    nlohmann::json provenance;
};

// Mean and sample standard deviation per (method, split), in first-seen order.
std::vector<SummaryRow> summarize(const std::vector<RunRow>& rows);

// Every method x seed: train, embed validation and test, cluster, score.
// A failing cell is rethrown with method/seed context after the rows
// finished so far are written to <output_dir>/results.partial.csv.
ExperimentReport run_experiment(const ExperimentConfig& config);

std::string results_csv(const std::vector<RunRow>& rows);
std::string spread_csv(const std::vector<SpreadRow>& rows);
nlohmann::json report_json(const ExperimentReport& report);

// report.json, results.csv and spread.csv under the output directory.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

struct SweepRow {
    std::string method;
    std::uint64_t seed = 0;
    std::size_t k = 0;
    double ami = 0.0;
};

// One trained model per method x seed, kmeans for every k in [k_min, k_max].
std::vector<SweepRow> sweep_k(const ExperimentConfig& config, std::size_t k_min, std::size_t k_max,
                              const std::string& split_name = "test");
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct DiagnosticsFiles {
    std::filesystem::path histogram;
    std::filesystem::path pca;
};

std::string histogram_csv(const ActivationHistogram& h);
std::string pca_tsv(const DenseMatrix& activations, const LabeledDataset& ds);

// Writes <prefix>histogram.csv (class,neuron,count) and <prefix>pca.tsv
// (pc1,pc2,fine_label,group_label) for the given layer.
DiagnosticsFiles export_diagnostics(const MlpModel& model, const LabeledDataset& ds, std::size_t layer,
                                    const std::filesystem::path& dir, const std::string& prefix = "");

const LabeledDataset& pick_split(const DatasetSplit& parts, const std::string& name);

std::string code_version();
std::string utc_timestamp();

}  // namespace disent
