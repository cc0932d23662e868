#include "disent/network.hpp"

#include "disent/error.hpp"
#include "disent/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace disent {

std::string_view to_string(Activation act) noexcept {
    switch (act) {
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Identity: return "identity";
    }
    return "identity";
}

std::optional<Activation> parse_activation(std::string_view name) noexcept {
    for (auto a : {Activation::Relu, Activation::Tanh, Activation::Sigmoid, Activation::Identity})
        if (to_string(a) == name) return a;
    return std::nullopt;
}

std::vector<std::size_t> MlpModel::layer_sizes() const {
    std::vector<std::size_t> sizes;
    if (layers.empty()) return sizes;
    sizes.push_back(layers.front().in_dim());
    for (const auto& l : layers) sizes.push_back(l.out_dim());
    return sizes;
}

std::vector<Activation> MlpModel::activations() const {
    std::vector<Activation> acts;
    for (const auto& l : layers) acts.push_back(l.activation);
    return acts;
}

void MlpModel::validate() const {
    require(!layers.empty(), ErrorKind::InvalidConfig, "model has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        require(layer.in_dim() >= 1 && layer.out_dim() >= 1, ErrorKind::InvalidConfig,
                "layer " + std::to_string(l) + " has an empty dimension");
        require(layer.bias.size() == layer.out_dim(), ErrorKind::InvalidConfig,
                "layer " + std::to_string(l) + " bias length mismatch");
        if (l > 0)
            require(layer.in_dim() == layers[l - 1].out_dim(), ErrorKind::InvalidConfig,
                    "layer " + std::to_string(l) + " input does not chain with previous output");
        require(layer.weights.all_finite() &&
                    std::all_of(layer.bias.begin(), layer.bias.end(),
                                [](double v) { return std::isfinite(v); }),
                ErrorKind::InvalidConfig, "layer " + std::to_string(l) + " has non-finite parameters");
    }
}

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

MlpModel init_model(std::span<const std::size_t> sizes, std::span<const Activation> activations,
                    std::uint64_t seed) {
    require(sizes.size() >= 2, ErrorKind::InvalidConfig, "need at least two layer sizes");
    require(activations.size() == sizes.size() - 1, ErrorKind::InvalidConfig,
            "need one activation per layer");
    for (auto s : sizes) require(s >= 1, ErrorKind::InvalidConfig, "layer size must be >= 1");

    Rng rng(seed);
    MlpModel model;
    model.seed = seed;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t in = sizes[l];
        const std::size_t out = sizes[l + 1];
        const double bound = glorot_bound(in, out);
        DenseLayer layer{DenseMatrix(out, in), DenseVector(out, 0.0), activations[l]};
        for (auto& w : layer.weights.data()) w = rng.uniform(-bound, bound);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double activate(Activation act, double z) {
    switch (act) {
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::Tanh: return std::tanh(z);
        case Activation::Sigmoid: return sigmoid(z);
        case Activation::Identity: return z;
    }
    return z;
}

double activation_derivative(Activation act, double pre, double post) {
    switch (act) {
        case Activation::Relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: return 1.0 - post * post;
        case Activation::Sigmoid: return post * (1.0 - post);
        case Activation::Identity: return 1.0;
    }
    return 1.0;
}

DenseMatrix affine(const DenseLayer& layer, const DenseMatrix& x) {
    DenseMatrix z = matmul_nt(x, layer.weights);
    for (std::size_t r = 0; r < z.rows(); ++r) {
        auto row = z.row(r);
        for (std::size_t c = 0; c < z.cols(); ++c) row[c] += layer.bias[c];
    }
    return z;
}

DenseMatrix apply_activation(Activation act, const DenseMatrix& z) {
    DenseMatrix a(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.size(); ++i) a.data()[i] = activate(act, z.data()[i]);
    return a;
}

void add_scaled(DenseMatrix& dst, const DenseMatrix& src, double scale) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += scale * src.data()[i];
}

struct AuxTerm {
    double value = 0.0;
    DenseMatrix grad_h;     // w.r.t. target post-activation (may be empty)
    DenseMatrix grad_yhat;  // w.r.t. output (xcov only)
    DenseMatrix grad_w;     // w.r.t. target weights (single only)
};

// Evaluates the auxiliary term for one batch. Covariance penalties are
// undefined for a single sample and are skipped on such batches.
AuxTerm auxiliary(const MlpModel& model, const ForwardTrace& trace, std::span<const int> labels,
                  const LossSpec& spec, std::size_t target) {
    AuxTerm aux;
    const std::size_t n = trace.input.rows();
    switch (spec.kind) {
        case LossKind::None: break;
        case LossKind::Single: {
            auto r = loss_single(model.layers[target].weights, spec.margin);
            aux.value = r.value;
            aux.grad_w = std::move(r.grad);
            break;
        }
        case LossKind::Multi: {
            auto r = loss_multi(trace.post[target], labels, spec.margin);
            aux.value = r.value;
            aux.grad_h = std::move(r.grad);
            break;
        }
        case LossKind::Multi2: {
            auto r = loss_multi_unlabeled(trace.post[target], spec.margin);
            aux.value = r.value;
            aux.grad_h = std::move(r.grad);
            break;
        }
        case LossKind::Decov: {
            if (n < 2) break;
            auto r = loss_decov(trace.post[target]);
            aux.value = r.value;
            aux.grad_h = std::move(r.grad);
            break;
        }
        case LossKind::Xcov: {
            if (n < 2) break;
            auto r = loss_xcov(trace.post[target], trace.post.back());
            aux.value = r.value;
            aux.grad_h = std::move(r.grad_h);
            aux.grad_yhat = std::move(r.grad_yhat);
            break;
        }
    }
    return aux;
}

void check_trace(const MlpModel& model, const ForwardTrace& trace) {
    const bool ok = [&] {
        if (trace.pre.size() != model.depth() || trace.post.size() != model.depth()) return false;
        if (trace.input.cols() != model.input_dim()) return false;
        for (std::size_t l = 0; l < model.depth(); ++l) {
            const auto& p = trace.post[l];
            if (p.rows() != trace.input.rows() || p.cols() != model.layers[l].out_dim()) return false;
            if (trace.pre[l].rows() != p.rows() || trace.pre[l].cols() != p.cols()) return false;
        }
        return true;
    }();
    require(ok, ErrorKind::InvalidInput, "forward trace does not match the model (stale trace)");
}

}  // namespace

ForwardResult forward(const MlpModel& model, const DenseMatrix& x) {
    require(!model.layers.empty(), ErrorKind::InvalidInput, "model has no layers");
    require(x.cols() == model.input_dim(), ErrorKind::Shape,
            "input has " + std::to_string(x.cols()) + " columns, model expects " +
                std::to_string(model.input_dim()));
    ForwardResult result;
    result.trace.input = x;
    const DenseMatrix* current = &x;
    for (const auto& layer : model.layers) {
        result.trace.pre.push_back(affine(layer, *current));
        result.trace.post.push_back(apply_activation(layer.activation, result.trace.pre.back()));
        current = &result.trace.post.back();
    }
    result.yhat = result.trace.post.back();
    return result;
}

DenseMatrix embed(const MlpModel& model, const DenseMatrix& x, std::size_t layer_index) {
    require(layer_index < model.depth(), ErrorKind::InvalidInput,
            "embedding layer " + std::to_string(layer_index) + " outside model depth " +
                std::to_string(model.depth()));
    require(x.cols() == model.input_dim(), ErrorKind::Shape, "embed: input width mismatch");
    DenseMatrix current = x;
    for (std::size_t l = 0; l <= layer_index; ++l) {
        const auto& layer = model.layers[l];
        current = apply_activation(layer.activation, affine(layer, current));
    }
    return current;
}

Gradients backward(const MlpModel& model, const ForwardTrace& trace, std::span<const int> labels,
                   const LossSpec& spec) {
    check_trace(model, trace);
    const std::size_t depth = model.depth();
    const std::size_t n = trace.input.rows();
    require(labels.size() == n, ErrorKind::InvalidInput, "label count does not match the trace");
    spec.validate(depth);
    const std::size_t target = spec.resolved_layer(depth);
    const double lambda = spec.weight;

    const DenseMatrix& yhat = trace.post.back();
    auto bce = loss_bce(yhat, labels);
    AuxTerm aux = auxiliary(model, trace, labels, spec, target);

    Gradients grads;
    grads.task_loss = bce.value;
    grads.aux_loss = aux.value;
    grads.layers.resize(depth);

    // Gradient injected at each layer's post-activation by the auxiliary term.
    std::vector<DenseMatrix> injected(depth);
    if (!aux.grad_h.empty()) {
        injected[target] = DenseMatrix(n, model.layers[target].out_dim());
        add_scaled(injected[target], aux.grad_h, lambda);
    }
    if (!aux.grad_yhat.empty()) {
        if (injected.back().empty()) injected.back() = DenseMatrix(n, yhat.cols());
        add_scaled(injected.back(), aux.grad_yhat, lambda);
    }

    DenseMatrix dpost;
    for (std::size_t l = depth; l-- > 0;) {
        const auto& layer = model.layers[l];
        const auto& pre = trace.pre[l];
        const auto& post = trace.post[l];
        DenseMatrix dz(n, layer.out_dim());

        if (l + 1 == depth) {
            if (layer.activation == Activation::Sigmoid && yhat.cols() == 1) {
                // BCE through a sigmoid collapses to (yhat - y) / n; this stays
                // correct when the sigmoid saturates to exactly 0 or 1.
                for (std::size_t i = 0; i < n; ++i)
                    dz(i, 0) = (post(i, 0) - static_cast<double>(labels[i])) / static_cast<double>(n);
                if (!injected[l].empty())
                    for (std::size_t i = 0; i < n; ++i)
                        dz(i, 0) += injected[l](i, 0) * post(i, 0) * (1.0 - post(i, 0));
            } else {
                dpost = bce.grad;
                if (!injected[l].empty()) add_scaled(dpost, injected[l], 1.0);
                for (std::size_t i = 0; i < dz.size(); ++i)
                    dz.data()[i] = dpost.data()[i] *
                                   activation_derivative(layer.activation, pre.data()[i], post.data()[i]);
            }
        } else {
            if (!injected[l].empty()) add_scaled(dpost, injected[l], 1.0);
            for (std::size_t i = 0; i < dz.size(); ++i)
                dz.data()[i] = dpost.data()[i] *
                               activation_derivative(layer.activation, pre.data()[i], post.data()[i]);
        }

        const DenseMatrix& input = l == 0 ? trace.input : trace.post[l - 1];
        grads.layers[l].weights = matmul_tn(dz, input);
        grads.layers[l].bias.assign(layer.out_dim(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = dz.row(i);
            for (std::size_t c = 0; c < row.size(); ++c) grads.layers[l].bias[c] += row[c];
        }
        if (l > 0) dpost = matmul(dz, layer.weights);
    }

    if (!aux.grad_w.empty()) add_scaled(grads.layers[target].weights, aux.grad_w, lambda);
    return grads;
}

double total_loss(const MlpModel& model, const DenseMatrix& x, std::span<const int> labels,
                  const LossSpec& spec) {
    spec.validate(model.depth());
    auto fwd = forward(model, x);
    const double task = loss_bce(fwd.yhat, labels).value;
    const auto aux = auxiliary(model, fwd.trace, labels, spec, spec.resolved_layer(model.depth()));
    return task + spec.weight * aux.value;
}

AdamState AdamState::for_model(const MlpModel& model, double learning_rate) {
    AdamState state;
    state.learning_rate = learning_rate;
    for (const auto& layer : model.layers) {
        LayerGrad zero{DenseMatrix(layer.out_dim(), layer.in_dim()), DenseVector(layer.out_dim(), 0.0)};
        state.m.push_back(zero);
        state.v.push_back(std::move(zero));
    }
    return state;
}

void adam_step(MlpModel& model, const Gradients& grads, AdamState& state) {
    require(grads.layers.size() == model.depth() && state.m.size() == model.depth() &&
                state.v.size() == model.depth(),
            ErrorKind::Shape, "adam_step: gradient/state depth mismatch");
    for (std::size_t l = 0; l < model.depth(); ++l) {
        const auto& g = grads.layers[l];
        const auto& layer = model.layers[l];
        require(g.weights.rows() == layer.out_dim() && g.weights.cols() == layer.in_dim() &&
                    g.bias.size() == layer.out_dim(),
                ErrorKind::Shape, "adam_step: gradient shape mismatch at layer " + std::to_string(l));
        const bool finite = g.weights.all_finite() &&
                            std::all_of(g.bias.begin(), g.bias.end(), [](double v) { return std::isfinite(v); });
        require(finite, ErrorKind::TrainingDiverged,
                "non-finite gradient at layer " + std::to_string(l));
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);

    auto update = [&](std::span<double> param, std::span<const double> grad, std::span<double> m,
                      std::span<double> v) {
        for (std::size_t i = 0; i < param.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * grad[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            param[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    };

    for (std::size_t l = 0; l < model.depth(); ++l) {
        auto& layer = model.layers[l];
        update(layer.weights.data(), grads.layers[l].weights.data(), state.m[l].weights.data(),
               state.v[l].weights.data());
        update(layer.bias, grads.layers[l].bias, state.m[l].bias, state.v[l].bias);
    }
}

void TrainConfig::validate() const {
    require(epochs >= 1, ErrorKind::InvalidConfig, "train epochs must be >= 1");
    require(batch_size >= 1, ErrorKind::InvalidConfig, "train batch size must be >= 1");
    require(std::isfinite(learning_rate) && learning_rate > 0.0, ErrorKind::InvalidConfig,
            "learning rate must be > 0");
    loss.validate();
}

double binary_accuracy(const DenseMatrix& yhat, std::span<const int> labels) {
    require(yhat.rows() == labels.size(), ErrorKind::Shape, "accuracy: label count mismatch");
    if (labels.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int predicted = yhat(i, 0) >= 0.5 ? 1 : 0;
        if (predicted == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

TrainResult train(MlpModel model, const TrainingView& data, const TrainConfig& config) {
    config.validate();
    model.validate();
    config.loss.validate(model.depth());
    const std::size_t n = data.features.rows();
    require(n >= 1, ErrorKind::InvalidInput, "training set is empty");
    require(data.group_labels.size() == n, ErrorKind::Shape, "group label count mismatch");
    require(model.layers.back().out_dim() == 1, ErrorKind::InvalidConfig,
            "binary classification needs a single output unit");
    for (int y : data.group_labels)
        require(y == 0 || y == 1, ErrorKind::InvalidInput, "group labels must be 0 or 1");

    Rng rng(mix_seed(config.seed, 0x7472ULL));
    AdamState adam = AdamState::for_model(model, config.learning_rate);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainLog log;
    std::vector<int> batch_labels;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        if (config.shuffle) rng.shuffle(order.begin(), order.end());
        double aux_sum = 0.0;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t stop = std::min(n, start + config.batch_size);
            std::span<const std::size_t> idx(order.data() + start, stop - start);
            DenseMatrix xb = data.features.select_rows(idx);
            batch_labels.resize(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) batch_labels[i] = data.group_labels[idx[i]];

            auto fwd = forward(model, xb);
            auto grads = backward(model, fwd.trace, batch_labels, config.loss);
            if (!std::isfinite(grads.task_loss) || !std::isfinite(grads.aux_loss))
                fail(ErrorKind::TrainingDiverged,
                     "training diverged in epoch " + std::to_string(epoch) + ": non-finite loss");
            try {
                adam_step(model, grads, adam);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::TrainingDiverged) throw;
                fail(ErrorKind::TrainingDiverged,
                     "training diverged in epoch " + std::to_string(epoch) + ": " + e.what());
            }
            aux_sum += grads.aux_loss * static_cast<double>(idx.size());
        }

        auto full = forward(model, data.features);
        EpochLog entry;
        entry.epoch = epoch;
        entry.task_loss = loss_bce(full.yhat, data.group_labels).value;
        entry.aux_loss = aux_sum / static_cast<double>(n);
        entry.accuracy = binary_accuracy(full.yhat, data.group_labels);
        if (!std::isfinite(entry.task_loss) || !model.layers.back().weights.all_finite())
            fail(ErrorKind::TrainingDiverged,
                 "training diverged in epoch " + std::to_string(epoch) + ": non-finite loss");
        log.epochs.push_back(entry);
    }
    return {std::move(model), std::move(log)};
}

}  // namespace disent
