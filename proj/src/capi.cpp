#include "disent/disent.h"

#include "disent/commands.hpp"
#include "disent/config.hpp"
#include "disent/data.hpp"
#include "disent/error.hpp"
#include "disent/harness.hpp"
#include "disent/losses.hpp"
#include "disent/metrics.hpp"
#include "disent/model_io.hpp"
#include "disent/network.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

struct disent_config {
    disent::Config value;
};

struct disent_dataset {
    disent::LabeledDataset value;
};

struct disent_model {
    disent::MlpModel value;
};

namespace {

thread_local std::string g_last_error;

disent_status to_status(disent::ErrorKind kind) {
    using disent::ErrorKind;
    switch (kind) {
        case ErrorKind::InvalidInput: return DISENT_ERR_INVALID_INPUT;
        case ErrorKind::Shape: return DISENT_ERR_SHAPE;
        case ErrorKind::Domain: return DISENT_ERR_DOMAIN;
        case ErrorKind::InvalidConfig: return DISENT_ERR_INVALID_CONFIG;
        case ErrorKind::Format: return DISENT_ERR_FORMAT;
        case ErrorKind::Consistency: return DISENT_ERR_CONSISTENCY;
        case ErrorKind::Mapping: return DISENT_ERR_MAPPING;
        case ErrorKind::TrainingDiverged: return DISENT_ERR_TRAINING_DIVERGED;
        case ErrorKind::Io: return DISENT_ERR_IO;
        case ErrorKind::Validation: return DISENT_ERR_VALIDATION;
    }
    return DISENT_ERR_INTERNAL;
}

template <class F>
disent_status guarded(F&& f) {
    try {
        f();
        g_last_error.clear();
        return DISENT_OK;
    } catch (const disent::Error& e) {
        g_last_error = e.what();
        return to_status(e.kind());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
    } catch (const std::exception& e) {
        g_last_error = e.what();
    } catch (...) {
        g_last_error = "unknown error";
    }
    return DISENT_ERR_INTERNAL;
}

#define DISENT_REQUIRE_ARG(p)                                    \
    do {                                                         \
        if ((p) == nullptr) {                                    \
            g_last_error = "null argument: " #p;                 \
            return DISENT_ERR_NULL_ARGUMENT;                     \
        }                                                        \
    } while (0)

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require_len(std::size_t got, std::size_t want, const char* what) {
    disent::require(got == want, disent::ErrorKind::Shape,
                    std::string(what) + ": buffer holds " + std::to_string(got) + " values, need " +
                        std::to_string(want));
}

disent::Normalization norm_or(const char* name, disent::Normalization fallback) {
    if (name == nullptr) return fallback;
    auto n = disent::parse_normalization(name);
    disent::require(n.has_value(), disent::ErrorKind::InvalidInput,
                    std::string("unknown normalization '") + name + "'");
    return *n;
}

std::size_t resolve_layer(const disent::MlpModel& m, int layer) {
    const int depth = static_cast<int>(m.depth());
    const int l = layer == -1 ? depth - 2 : layer;
    disent::require(l >= 0 && l < depth, disent::ErrorKind::InvalidInput,
                    "layer " + std::to_string(layer) + " outside model depth " + std::to_string(depth));
    return static_cast<std::size_t>(l);
}

}  // namespace

extern "C" {

const char* disent_version(void) {
    static const std::string v = disent::code_version();
    return v.c_str();
}

const char* disent_status_name(disent_status status) {
    switch (status) {
        case DISENT_OK: return "ok";
        case DISENT_ERR_INVALID_INPUT: return "invalid-input";
        case DISENT_ERR_SHAPE: return "shape";
        case DISENT_ERR_DOMAIN: return "domain";
        case DISENT_ERR_INVALID_CONFIG: return "invalid-config";
        case DISENT_ERR_FORMAT: return "format";
        case DISENT_ERR_CONSISTENCY: return "consistency";
        case DISENT_ERR_MAPPING: return "mapping";
        case DISENT_ERR_TRAINING_DIVERGED: return "training-diverged";
        case DISENT_ERR_IO: return "io";
        case DISENT_ERR_VALIDATION: return "validation";
        case DISENT_ERR_NULL_ARGUMENT: return "null-argument";
        case DISENT_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* disent_last_error(void) { return g_last_error.c_str(); }

void disent_string_free(char* s) { std::free(s); }

disent_status disent_config_new(disent_config** out) {
    DISENT_REQUIRE_ARG(out);
    return guarded([&] { *out = new disent_config{}; });
}

void disent_config_free(disent_config* config) { delete config; }

disent_status disent_config_load(disent_config* config, const char* path) {
    DISENT_REQUIRE_ARG(config);
    DISENT_REQUIRE_ARG(path);
    // Merge into a copy so a bad file leaves the config untouched.
    return guarded([&] {
        disent::Config next = config->value;
        next.load_file(path);
        config->value = std::move(next);
    });
}

disent_status disent_config_set(disent_config* config, const char* assignment) {
    DISENT_REQUIRE_ARG(config);
    DISENT_REQUIRE_ARG(assignment);
    return guarded([&] { config->value.set(assignment); });
}

disent_status disent_config_apply_env(disent_config* config) {
    DISENT_REQUIRE_ARG(config);
    return guarded([&] {
        if (auto seed = disent::seed_override_from_env()) config->value.override_seeds(*seed);
    });
}

disent_status disent_config_to_json(const disent_config* config, char** out_json) {
    DISENT_REQUIRE_ARG(config);
    DISENT_REQUIRE_ARG(out_json);
    return guarded([&] { *out_json = dup_string(config->value.to_json().dump(2)); });
}

disent_status disent_config_help(char** out_text) {
    DISENT_REQUIRE_ARG(out_text);
    return guarded([&] { *out_text = dup_string(disent::config_help()); });
}

disent_status disent_run_command(const char* name, const disent_config* config, char** out_text) {
    DISENT_REQUIRE_ARG(name);
    DISENT_REQUIRE_ARG(config);
    return guarded([&] {
        const std::string text = disent::run_command(name, config->value);
        if (out_text != nullptr) *out_text = dup_string(text);
    });
}

disent_status disent_dataset_blobs(size_t n_per_class, size_t n_classes, size_t dim, double center_scale,
                                   double noise_sigma, uint64_t seed, disent_dataset** out) {
    DISENT_REQUIRE_ARG(out);
    return guarded([&] {
        disent::BlobOptions o;
        o.n_per_class = n_per_class;
        o.n_classes = n_classes;
        o.dim = dim;
        o.center_scale = center_scale;
        o.noise_sigma = noise_sigma;
        o.seed = seed;
        *out = new disent_dataset{disent::gen_blobs(o)};
    });
}

disent_status disent_dataset_from_config(const disent_config* config, disent_dataset** out) {
    DISENT_REQUIRE_ARG(config);
    DISENT_REQUIRE_ARG(out);
    return guarded([&] {
        const auto cfg = disent::ExperimentConfig::from_config(config->value);
        *out = new disent_dataset{disent::load_dataset(cfg.data)};
    });
}

disent_status disent_dataset_load_csv(const char* path, disent_dataset** out) {
    DISENT_REQUIRE_ARG(path);
    DISENT_REQUIRE_ARG(out);
    return guarded([&] { *out = new disent_dataset{disent::load_dataset_csv(path)}; });
}

disent_status disent_dataset_save_csv(const disent_dataset* ds, const char* path) {
    DISENT_REQUIRE_ARG(ds);
    DISENT_REQUIRE_ARG(path);
    return guarded([&] { disent::save_dataset_csv(ds->value, path); });
}

void disent_dataset_free(disent_dataset* ds) { delete ds; }

size_t disent_dataset_rows(const disent_dataset* ds) { return ds ? ds->value.size() : 0; }
size_t disent_dataset_cols(const disent_dataset* ds) { return ds ? ds->value.features.cols() : 0; }

disent_status disent_dataset_features(const disent_dataset* ds, double* out, size_t len) {
    DISENT_REQUIRE_ARG(ds);
    DISENT_REQUIRE_ARG(out);
    return guarded([&] {
        const auto& f = ds->value.features;
        require_len(len, f.size(), "features");
        std::copy(f.data().begin(), f.data().end(), out);
    });
}

disent_status disent_dataset_fine_labels(const disent_dataset* ds, int* out, size_t len) {
    DISENT_REQUIRE_ARG(ds);
    DISENT_REQUIRE_ARG(out);
    return guarded([&] {
        require_len(len, ds->value.size(), "fine labels");
        std::copy(ds->value.fine_labels.begin(), ds->value.fine_labels.end(), out);
    });
}

disent_status disent_dataset_group_labels(const disent_dataset* ds, int* out, size_t len) {
    DISENT_REQUIRE_ARG(ds);
    DISENT_REQUIRE_ARG(out);
    return guarded([&] {
        disent::require(ds->value.grouped(), disent::ErrorKind::InvalidInput, "dataset has no group labels");
        require_len(len, ds->value.size(), "group labels");
        std::copy(ds->value.group_labels.begin(), ds->value.group_labels.end(), out);
    });
}

disent_status disent_model_train(const disent_config* config, const disent_dataset* ds, disent_model** out) {
    DISENT_REQUIRE_ARG(config);
    DISENT_REQUIRE_ARG(ds);
    DISENT_REQUIRE_ARG(out);
    return guarded([&] {
        const auto cfg = disent::ExperimentConfig::from_config(config->value);
        disent::require(ds->value.grouped(), disent::ErrorKind::InvalidInput, "training needs group labels");
        auto result = disent::train_method(cfg, ds->value, cfg.train.loss.kind, cfg.train.seed);
        *out = new disent_model{std::move(result.model)};
    });
}

disent_status disent_model_load(const char* path, disent_model** out) {
    DISENT_REQUIRE_ARG(path);
    DISENT_REQUIRE_ARG(out);
    return guarded([&] { *out = new disent_model{disent::load_model(path)}; });
}

disent_status disent_model_save(const disent_model* model, const char* path) {
    DISENT_REQUIRE_ARG(model);
    DISENT_REQUIRE_ARG(path);
    return guarded([&] { disent::save_model(model->value, path); });
}

void disent_model_free(disent_model* model) { delete model; }

size_t disent_model_depth(const disent_model* model) { return model ? model->value.depth() : 0; }

size_t disent_model_layer_width(const disent_model* model, size_t layer) {
    if (model == nullptr || layer >= model->value.depth()) return 0;
    return model->value.layers[layer].out_dim();
}

disent_status disent_model_embed(const disent_model* model, const disent_dataset* ds, int layer, double* out,
                                 size_t len) {
    DISENT_REQUIRE_ARG(model);
    DISENT_REQUIRE_ARG(ds);
    DISENT_REQUIRE_ARG(out);
    return guarded([&] {
        const auto e = disent::embed(model->value, ds->value.features, resolve_layer(model->value, layer));
        require_len(len, e.size(), "embedding");
        std::copy(e.data().begin(), e.data().end(), out);
    });
}

disent_status disent_model_predict(const disent_model* model, const disent_dataset* ds, double* out, size_t len) {
    DISENT_REQUIRE_ARG(model);
    DISENT_REQUIRE_ARG(ds);
    DISENT_REQUIRE_ARG(out);
    return guarded([&] {
        const auto y = disent::forward(model->value, ds->value.features).yhat;
        require_len(len, y.size(), "predictions");
        std::copy(y.data().begin(), y.data().end(), out);
    });
}

disent_status disent_kmeans(const double* x, size_t n, size_t d, size_t k, size_t n_init, uint64_t seed,
                            int* assignments, double* inertia) {
    DISENT_REQUIRE_ARG(x);
    DISENT_REQUIRE_ARG(assignments);
    return guarded([&] {
        disent::DenseMatrix m(n, d);
        std::copy(x, x + n * d, m.data().begin());
        disent::KMeansOptions o;
        o.k = k;
        o.n_init = n_init;
        o.seed = seed;
        const auto res = disent::kmeans(m, o);
        std::copy(res.assignments.begin(), res.assignments.end(), assignments);
        if (inertia != nullptr) *inertia = res.inertia;
    });
}

disent_status disent_ami(const int* truth, const int* pred, size_t n, const char* normalization, double* out) {
    DISENT_REQUIRE_ARG(truth);
    DISENT_REQUIRE_ARG(pred);
    DISENT_REQUIRE_ARG(out);
    return guarded([&] {
        *out = disent::ami({truth, n}, {pred, n}, norm_or(normalization, disent::Normalization::Max));
    });
}

disent_status disent_nmi(const int* truth, const int* pred, size_t n, const char* normalization, double* out) {
    DISENT_REQUIRE_ARG(truth);
    DISENT_REQUIRE_ARG(pred);
    DISENT_REQUIRE_ARG(out);
    return guarded([&] {
        *out = disent::nmi({truth, n}, {pred, n}, norm_or(normalization, disent::Normalization::Geometric));
    });
}

disent_status disent_loss(const char* kind, const double* x, size_t rows, size_t cols, const int* labels,
                          double margin, double* value, double* grad) {
    DISENT_REQUIRE_ARG(kind);
    DISENT_REQUIRE_ARG(x);
    DISENT_REQUIRE_ARG(value);
    return guarded([&] {
        disent::DenseMatrix m(rows, cols);
        std::copy(x, x + rows * cols, m.data().begin());
        const std::string k = kind;
        disent::LossValueAndGrad r;
        if (k == "single") {
            r = disent::loss_single(m, margin);
        } else if (k == "multi") {
            disent::require(labels != nullptr, disent::ErrorKind::InvalidInput, "multi loss needs labels");
            r = disent::loss_multi(m, {labels, rows}, margin);
        } else if (k == "multi2") {
            r = disent::loss_multi_unlabeled(m, margin);
        } else if (k == "decov") {
            r = disent::loss_decov(m);
        } else {
            disent::fail(disent::ErrorKind::InvalidInput, "unknown loss kind '" + k + "'");
        }
        *value = r.value;
        if (grad != nullptr) std::copy(r.grad.data().begin(), r.grad.data().end(), grad);
    });
}

}  // extern "C"
