#ifndef GRAPHLEARN_GRAPHLEARN_H
#define GRAPHLEARN_GRAPHLEARN_H

/*
 * C interface to the graphlearn library: supervised graph learning by
 * Laplacian-regularized linear regression.
 *
 * Every object is an opaque handle released with its *_free function.
 * Functions return a gl_status; on failure gl_last_error() describes the
 * problem (the message is per thread and valid until the next failing call
 * on that thread). Output handles are only written on success.
 *
 * Strings returned through char** out-parameters are owned by the caller and
 * released with gl_string_free.
 *
 * Configuration objects are passed as JSON text. Keys and defaults:
 *
 *   synth config:  n_nodes (10), n_graphs_train (16), n_graphs_test (16),
 *                  base_density (0.4), perturb_fraction (0.1), n_signals (10),
 *                  outlier_fraction (0.1), seed (1),
 *                  graph_family ("perturbed-base" | "erdos-renyi"),
 *                  er_edge_probability (0.4)
 *   hyper config:  alpha, beta, sigma (null: data-driven default),
 *                  alpha_scale (0.1), beta_scale (10) giving alpha_scale/M and
 *                  beta_scale/M, sigma_scale (0.1) times the median squared
 *                  signal difference, h ([h0, h1, h2], default [0, 1, 0])
 *   eval options:  threshold (null: keep the training graphs' mean edge count)
 *   experiment:    synth {...}, m_over_n ([1,4,8,16,32]) or m_values [...],
 *                  outlier_fractions ([0.1, 0.25]), runs (100), hyper {...},
 *                  threshold, threads (0 = all cores)
 */

#include <stddef.h>

#if defined(_WIN32)
#  if defined(GRAPHLEARN_BUILDING_LIBRARY)
#    define GL_API __declspec(dllexport)
#  else
#    define GL_API __declspec(dllimport)
#  endif
#else
#  define GL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gl_status {
  GL_OK = 0,
  GL_ERR_INVALID_ARGUMENT = 1,
  GL_ERR_DIMENSION = 2,
  GL_ERR_IO = 3,
  GL_ERR_PARSE = 4,
  GL_ERR_DEGENERATE = 5,
  GL_ERR_NUMERIC = 6,
  GL_ERR_INTERNAL = 99
} gl_status;

typedef enum gl_split { GL_SPLIT_TRAIN = 0, GL_SPLIT_TEST = 1 } gl_split;

typedef struct gl_matrix gl_matrix;
typedef struct gl_dataset gl_dataset;
typedef struct gl_model gl_model;

GL_API const char* gl_version(void);
GL_API const char* gl_last_error(void);
GL_API const char* gl_status_name(gl_status status);
GL_API void gl_string_free(char* s);

/* Dense row-major matrices. */
GL_API gl_status gl_matrix_create(size_t rows, size_t cols, const double* row_major, gl_matrix** out);
GL_API size_t gl_matrix_rows(const gl_matrix* m);
GL_API size_t gl_matrix_cols(const gl_matrix* m);
/* Copies rows*cols values in row-major order; len must be at least that. */
GL_API gl_status gl_matrix_copy_data(const gl_matrix* m, double* out, size_t len);
/* ".json" files use {"rows","cols","data"}; anything else is headerless CSV. */
GL_API gl_status gl_matrix_load(const char* path, gl_matrix** out);
GL_API gl_status gl_matrix_save(const gl_matrix* m, const char* path);
GL_API void gl_matrix_free(gl_matrix* m);

/* Graph helpers. */
GL_API gl_status gl_laplacian(const gl_matrix* adjacency, gl_matrix** out);
/* Clamp negatives, zero entries below tau and the diagonal. */
GL_API gl_status gl_threshold(const gl_matrix* estimate, double tau, gl_matrix** out);

/* Synthetic datasets and dataset directories (manifest.json + CSV files). */
GL_API gl_status gl_dataset_synthesize(const char* synth_config_json, gl_dataset** out);
GL_API gl_status gl_dataset_load(const char* dir, gl_dataset** out);
GL_API gl_status gl_dataset_save(const gl_dataset* ds, const char* dir);
GL_API size_t gl_dataset_size(const gl_dataset* ds, gl_split split);
GL_API gl_status gl_dataset_signals(const gl_dataset* ds, gl_split split, size_t index, gl_matrix** out);
GL_API gl_status gl_dataset_adjacency(const gl_dataset* ds, gl_split split, size_t index, gl_matrix** out);
/* {"config", "outlier_indices", "n_train", "n_test", "n_nodes", "n_signals"} */
GL_API gl_status gl_dataset_summary(const gl_dataset* ds, char** json_out);
GL_API void gl_dataset_free(gl_dataset* ds);

/* Training. The report holds final_cost, gradient_norm,
 * stationarity_tolerance, min_curvature, psd_warning and the resolved
 * hyperparameters. */
GL_API gl_status gl_train(const gl_dataset* ds, const char* hyper_json, gl_model** model_out, char** report_json);

GL_API gl_status gl_model_load(const char* path, gl_model** out);
GL_API gl_status gl_model_save(const gl_model* model, const char* path);
GL_API gl_status gl_model_to_json(const gl_model* model, char** json_out);
GL_API size_t gl_model_k(const gl_model* model);
GL_API gl_status gl_model_weights(const gl_model* model, double* out, size_t len);
GL_API void gl_model_free(gl_model* model);

/* Predicted adjacency for an N x K signal matrix (N may differ from the
 * training graphs). Negative weights are clamped to zero. */
GL_API gl_status gl_predict(const gl_model* model, const gl_matrix* signals, gl_matrix** out);
/* The unclamped linear output; may hold negative weights. */
GL_API gl_status gl_predict_raw(const gl_model* model, const gl_matrix* signals, gl_matrix** out);

/* NMSE and F-score over the dataset's test split; JSON EvalReport. */
GL_API gl_status gl_evaluate(const gl_model* model, const gl_dataset* ds, const char* options_json, char** report_json);

/* Full Monte-Carlo sweep. Writes runs.csv, summary.csv, weights.csv and
 * report.json to output_dir and returns the report. */
GL_API gl_status gl_experiment_run(const char* config_json, const char* output_dir, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* GRAPHLEARN_GRAPHLEARN_H */
