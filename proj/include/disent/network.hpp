#pragma once

#include "disent/losses.hpp"
#include "disent/numerics.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace disent {

enum class Activation { Relu, Tanh, Sigmoid, Identity };

std::string_view to_string(Activation act) noexcept;
std::optional<Activation> parse_activation(std::string_view name) noexcept;

struct DenseLayer {
    DenseMatrix weights;  // out x in
    DenseVector bias;     // out
    Activation activation = Activation::Identity;

    std::size_t in_dim() const noexcept { return weights.cols(); }
    std::size_t out_dim() const noexcept { return weights.rows(); }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct MlpModel {
    std::vector<DenseLayer> layers;
    std::uint64_t seed = 0;

    std::size_t depth() const noexcept { return layers.size(); }
    std::size_t input_dim() const noexcept { return layers.empty() ? 0 : layers.front().in_dim(); }
    std::vector<std::size_t> layer_sizes() const;
    std::vector<Activation> activations() const;

    // Throws if dimensions do not chain or a parameter is non-finite.
    void validate() const;

    friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

// Glorot-uniform weights, zero biases. `sizes` has one more entry than
// `activations`.
MlpModel init_model(std::span<const std::size_t> sizes, std::span<const Activation> activations,
                    std::uint64_t seed);

double glorot_bound(std::size_t fan_in, std::size_t fan_out);

struct ForwardTrace {
    DenseMatrix input;
    std::vector<DenseMatrix> pre;   // per layer, n x out
    std::vector<DenseMatrix> post;  // per layer, n x out
};

struct ForwardResult {
    DenseMatrix yhat;
    ForwardTrace trace;
};

ForwardResult forward(const MlpModel& model, const DenseMatrix& x);

// Post-activation of `layer_index` for every row of x.
DenseMatrix embed(const MlpModel& model, const DenseMatrix& x, std::size_t layer_index);

struct LayerGrad {
    DenseMatrix weights;
    DenseVector bias;
};

struct Gradients {
    std::vector<LayerGrad> layers;
    double task_loss = 0.0;
    double aux_loss = 0.0;
};

// d(BCE + weight * auxiliary)/d(parameters). The single-layer loss adds only
// to the target layer's weights; activation-based losses enter at the target
// layer's output and propagate through every earlier layer.
Gradients backward(const MlpModel& model, const ForwardTrace& trace, std::span<const int> labels,
                   const LossSpec& spec);

// Task + weighted auxiliary loss evaluated without gradients.
double total_loss(const MlpModel& model, const DenseMatrix& x, std::span<const int> labels,
                  const LossSpec& spec);

struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    std::vector<LayerGrad> m;
    std::vector<LayerGrad> v;

    static AdamState for_model(const MlpModel& model, double learning_rate);
};

// One bias-corrected Adam update. Throws TrainingDiverged on a non-finite
// gradient, leaving the model untouched.
void adam_step(MlpModel& model, const Gradients& grads, AdamState& state);

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 128;
    double learning_rate = 1e-3;
    LossSpec loss;
    std::uint64_t seed = 1;
    bool shuffle = true;

    void validate() const;
};

struct EpochLog {
    std::size_t epoch = 0;
    double task_loss = 0.0;  // BCE over the full training set after the epoch
    double aux_loss = 0.0;   // batch-size-weighted mean of the auxiliary term
    double accuracy = 0.0;   // training accuracy after the epoch

    friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

struct TrainLog {
    std::vector<EpochLog> epochs;
    friend bool operator==(const TrainLog&, const TrainLog&) = default;
};

// The only view of a dataset the training path can see: features and the
// coarse group labels.
struct TrainingView {
    const DenseMatrix& features;
    std::span<const int> group_labels;
};

struct TrainResult {
    MlpModel model;
    TrainLog log;
};

TrainResult train(MlpModel model, const TrainingView& data, const TrainConfig& config);

double binary_accuracy(const DenseMatrix& yhat, std::span<const int> labels);

}  // namespace disent
