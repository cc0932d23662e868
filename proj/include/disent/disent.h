#ifndef DISENT_H
#define DISENT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DISENT_API __declspec(dllexport)
#else
#define DISENT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum disent_status {
    DISENT_OK = 0,
    DISENT_ERR_INVALID_INPUT = 1,
    DISENT_ERR_SHAPE = 2,
    DISENT_ERR_DOMAIN = 3,
    DISENT_ERR_INVALID_CONFIG = 4,
    DISENT_ERR_FORMAT = 5,
    DISENT_ERR_CONSISTENCY = 6,
    DISENT_ERR_MAPPING = 7,
    DISENT_ERR_TRAINING_DIVERGED = 8,
    DISENT_ERR_IO = 9,
    DISENT_ERR_VALIDATION = 10,
    DISENT_ERR_NULL_ARGUMENT = 11,
    DISENT_ERR_INTERNAL = 99
} disent_status;

typedef struct disent_config disent_config;
typedef struct disent_dataset disent_dataset;
typedef struct disent_model disent_model;

DISENT_API const char* disent_version(void);
DISENT_API const char* disent_status_name(disent_status status);
/* Message of the last failing call on this thread; "" after a success. */
DISENT_API const char* disent_last_error(void);
/* Releases strings returned through char** out-parameters. */
DISENT_API void disent_string_free(char* s);

/* Configuration */
DISENT_API disent_status disent_config_new(disent_config** out);
DISENT_API void disent_config_free(disent_config* config);
DISENT_API disent_status disent_config_load(disent_config* config, const char* path);
/* "key=value" */
DISENT_API disent_status disent_config_set(disent_config* config, const char* assignment);
/* Applies DISENT_SEED_OVERRIDE if it is set. */
DISENT_API disent_status disent_config_apply_env(disent_config* config);
DISENT_API disent_status disent_config_to_json(const disent_config* config, char** out_json);
DISENT_API disent_status disent_config_help(char** out_text);

/* Runs a CLI subcommand ("gen-data", "train", "embed", "cluster", "evaluate",
   "run-experiment", "sweep-k", "diagnostics"). out_text may be NULL. */
DISENT_API disent_status disent_run_command(const char* name, const disent_config* config, char** out_text);

/* Datasets */
DISENT_API disent_status disent_dataset_blobs(size_t n_per_class, size_t n_classes, size_t dim,
                                              double center_scale, double noise_sigma, uint64_t seed,
                                              disent_dataset** out);
DISENT_API disent_status disent_dataset_from_config(const disent_config* config, disent_dataset** out);
DISENT_API disent_status disent_dataset_load_csv(const char* path, disent_dataset** out);
DISENT_API disent_status disent_dataset_save_csv(const disent_dataset* ds, const char* path);
DISENT_API void disent_dataset_free(disent_dataset* ds);
DISENT_API size_t disent_dataset_rows(const disent_dataset* ds);
DISENT_API size_t disent_dataset_cols(const disent_dataset* ds);
/* Row-major copy; len must equal rows * cols. */
DISENT_API disent_status disent_dataset_features(const disent_dataset* ds, double* out, size_t len);
DISENT_API disent_status disent_dataset_fine_labels(const disent_dataset* ds, int* out, size_t len);
/* DISENT_ERR_INVALID_INPUT if the dataset has no group labels. */
DISENT_API disent_status disent_dataset_group_labels(const disent_dataset* ds, int* out, size_t len);

/* Models */
/* Trains on the whole dataset with the config's model, train and loss keys. */
DISENT_API disent_status disent_model_train(const disent_config* config, const disent_dataset* ds,
                                            disent_model** out);
DISENT_API disent_status disent_model_load(const char* path, disent_model** out);
DISENT_API disent_status disent_model_save(const disent_model* model, const char* path);
DISENT_API void disent_model_free(disent_model* model);
DISENT_API size_t disent_model_depth(const disent_model* model);
DISENT_API size_t disent_model_layer_width(const disent_model* model, size_t layer);
/* layer -1 is the penultimate layer; len must equal rows * width. */
DISENT_API disent_status disent_model_embed(const disent_model* model, const disent_dataset* ds, int layer,
                                            double* out, size_t len);
/* Sigmoid outputs, one per row. */
DISENT_API disent_status disent_model_predict(const disent_model* model, const disent_dataset* ds, double* out,
                                              size_t len);

/* Clustering and metrics */
DISENT_API disent_status disent_kmeans(const double* x, size_t n, size_t d, size_t k, size_t n_init, uint64_t seed,
                                       int* assignments, double* inertia);
/* normalization: "max", "arithmetic", "geometric", "min" or NULL for the default. */
DISENT_API disent_status disent_ami(const int* truth, const int* pred, size_t n, const char* normalization,
                                    double* out);
DISENT_API disent_status disent_nmi(const int* truth, const int* pred, size_t n, const char* normalization,
                                    double* out);

/* Auxiliary losses on a rows x cols matrix. kind: "single" (x is a weight
   matrix), "multi" (labels required), "multi2", "decov". grad may be NULL,
   otherwise it receives rows * cols values. */
DISENT_API disent_status disent_loss(const char* kind, const double* x, size_t rows, size_t cols, const int* labels,
                                     double margin, double* value, double* grad);

#ifdef __cplusplus
}
#endif

#endif
