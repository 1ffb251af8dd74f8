/*
 * Copyright 2026 The gsdlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C API of the gsdlab shared library.
 *
 * The library measures how similar a "private" dataset is to candidate
 * "public" datasets through the distance between the top-k right singular
 * subspaces of their per-sample gradient matrices, optionally under
 * differential privacy, and trains small models by projecting clipped
 * per-sample gradients onto a public gradient subspace.
 *
 * Conventions:
 *  - every function returns a gsdlab_status; 0 means success
 *  - on failure, gsdlab_last_error() returns a thread-local message
 *  - strings returned through char** are heap-allocated; release them with
 *    gsdlab_string_free
 *  - matrix files are headerless CSV, row-major, one row per line, values
 *    in the shortest decimal form that round-trips exactly
 *  - dataset CSV files carry the label as the trailing column
 */

#ifndef GSDLAB_H_
#define GSDLAB_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gsdlab_status {
  GSDLAB_OK = 0,
  GSDLAB_ERROR_INVALID_ARGUMENT = 1,
  GSDLAB_ERROR_DIM_MISMATCH = 2,
  GSDLAB_ERROR_RANK_DEFICIENT = 3,
  GSDLAB_ERROR_BAD_K = 4,
  GSDLAB_ERROR_NONFINITE = 5,
  GSDLAB_ERROR_NONSYMMETRIC = 6,
  GSDLAB_ERROR_ZERO_GAP = 7,
  GSDLAB_ERROR_BAD_MAGNITUDE = 8,
  GSDLAB_ERROR_EMPTY_MATRIX = 9,
  GSDLAB_ERROR_IO = 10,
  GSDLAB_ERROR_PARSE = 11,
  GSDLAB_ERROR_INTERNAL = 12
} gsdlab_status;

const char* gsdlab_status_name(gsdlab_status status);

/* Message describing the most recent failure on this thread. */
const char* gsdlab_last_error(void);

void gsdlab_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Matrices                                                            */

typedef struct gsdlab_matrix gsdlab_matrix;

/* data may be NULL for a zero matrix; otherwise rows*cols row-major. */
gsdlab_status gsdlab_matrix_create(size_t rows, size_t cols,
                                   const double* data, gsdlab_matrix** out);
gsdlab_status gsdlab_matrix_read_csv(const char* path, gsdlab_matrix** out);
gsdlab_status gsdlab_matrix_write_csv(const gsdlab_matrix* m,
                                      const char* path);
size_t gsdlab_matrix_rows(const gsdlab_matrix* m);
size_t gsdlab_matrix_cols(const gsdlab_matrix* m);
/* Row-major storage of length rows*cols, owned by the handle. */
const double* gsdlab_matrix_data(const gsdlab_matrix* m);
void gsdlab_matrix_free(gsdlab_matrix* m);

/* ------------------------------------------------------------------ */
/* Models                                                              */

typedef struct gsdlab_model gsdlab_model;

/* spec_json example:
 *   {"kind": "logistic-regression", "input_dim": 16, "num_classes": 2}
 * kinds: linear-regression | logistic-regression | softmax-regression | mlp
 * (mlp adds "hidden_dims": [...] and "activation": "tanh"|"relu").
 * Weights are drawn uniformly with scale 1/sqrt(fan_in); biases are zero. */
gsdlab_status gsdlab_model_create(const char* spec_json, uint64_t seed,
                                  gsdlab_model** out);
gsdlab_status gsdlab_model_param_count(const gsdlab_model* m, size_t* out);
/* 1 x p parameter matrix (the CSV exchange format for weights). */
gsdlab_status gsdlab_model_params(const gsdlab_model* m, gsdlab_matrix** out);
gsdlab_status gsdlab_model_set_params(gsdlab_model* m,
                                      const gsdlab_matrix* params);
void gsdlab_model_free(gsdlab_model* m);

/* batch: m x (input_dim + 1) matrix, label in the trailing column. */
gsdlab_status gsdlab_per_sample_gradients(const gsdlab_model* m,
                                          const gsdlab_matrix* batch,
                                          gsdlab_matrix** out);
gsdlab_status gsdlab_evaluate(const gsdlab_model* m,
                              const gsdlab_matrix* batch, double* loss,
                              double* accuracy);

/* ------------------------------------------------------------------ */
/* Distances                                                           */

/* Distance between the top-k right singular subspaces of two gradient
 * matrices (rows = examples). Returns a JSON report. */
gsdlab_status gsdlab_gradient_subspace_distance(const gsdlab_matrix* g_priv,
                                                const gsdlab_matrix* g_pub,
                                                size_t k, char** report_json);

/* Full pipeline from dataset CSV files: per-sample gradients of both
 * batches at the model weights, top-k subspaces, projection metric.
 * random_labels != 0 relabels both batches uniformly at random (seeded by
 * label_seed). headline_raw selects which distance the "distance" field of
 * the report carries (raw in [0, sqrt(k)] vs normalized in [0, 1]). */
gsdlab_status gsdlab_gsd_run(const char* model_spec_json, uint64_t model_seed,
                             const char* private_csv, const char* public_csv,
                             size_t k, int random_labels, uint64_t label_seed,
                             int headline_raw, char** report_json);

/* Differentially private variant: the private side is row-clipped and its
 * top direction is one draw from the Bingham density exp(v'Av) with
 * A = (m*epsilon/2)*(1/m)G'G; k is fixed to 1. The report gains a
 * "privacy" block with epsilon_effective = epsilon/clip_norm^2. */
gsdlab_status gsdlab_dp_gsd_run(const char* model_spec_json,
                                uint64_t model_seed, const char* private_csv,
                                const char* public_csv, double epsilon,
                                double delta, double clip_norm, uint64_t seed,
                                int random_labels, uint64_t label_seed,
                                int headline_raw, char** report_json);

/* ------------------------------------------------------------------ */
/* Private training                                                    */

/* config_json:
 *   {"model": {...}, "model_seed": 1,
 *    "gep": {"k": 2, "power_iterations": 20, "learning_rate": 1.0,
 *            "iterations": 60, "clip_embedding": 1.0, "clip_residual": 0.0,
 *            "sigma_embedding": null, "sigma_residual": null,
 *            "batch_size": 256, "seed": 1},
 *    "privacy": {"epsilon": 2.0, "delta": 1e-5, "clip_norm": 1.0}}
 * null sigmas are calibrated as 2*sqrt(2*T*log(1/delta))/epsilon.
 * result_json_path receives the full result; trace_csv_path (optional,
 * may be NULL) receives one row per step: t,r_t,d_t,gsd_t,s1_t,sk1_t,loss.
 * summary_json returns the result without the parameter vectors. */
gsdlab_status gsdlab_gep_train_run(const char* config_json,
                                   const char* private_train_csv,
                                   const char* private_test_csv,
                                   const char* public_csv,
                                   const char* result_json_path,
                                   const char* trace_csv_path,
                                   char** summary_json);

/* sigma = 2*sqrt(2*T*log(1/delta))/epsilon. epsilon_in_range reports
 * whether epsilon < 2*log(1/delta), the range the calibration is stated
 * for. */
gsdlab_status gsdlab_gep_noise_scale(double epsilon, double delta,
                                     uint64_t iterations, double* sigma,
                                     int* epsilon_in_range);

/* Sample count above which the private distance is (rho, eta)-close to the
 * exact one, from the top eigenvalue and eigengap of the clipped gradient
 * second-moment matrix. */
gsdlab_status gsdlab_required_sample_size(double top_eigenvalue,
                                          double eigengap, size_t ambient_dim,
                                          double rho, double eta,
                                          double epsilon, double clip_norm,
                                          double* out);

/* ------------------------------------------------------------------ */
/* Synthetic tasks and experiments                                     */

/* spec_json:
 *   {"name": "demo",
 *    "task": {"input_dim": 16, "num_classes": 2, "n_train": 1024,
 *             "n_test": 512, "n_public": 512, "margin": 8.0,
 *             "noise": 0.25, "seed": 42},
 *    "shifts": [{"kind": "rotation", "magnitude": 0.5236}, ...]}
 * Writes train.csv, test.csv, public_*.csv and manifest.json into out_dir;
 * manifest_json receives the manifest text. */
gsdlab_status gsdlab_synth_make(const char* spec_json, const char* out_dir,
                                char** manifest_json);

/* Runs one experiment (monotonicity | ordering-stability | lemma1-audit |
 * spectrum | dppca-utility | dpgsd-closeness). When out_path is non-NULL
 * the report JSON is written there along with a CSV side table. passed
 * receives 1/0. The worker pool is capped by the GSDLAB_THREADS
 * environment variable. */
gsdlab_status gsdlab_experiment_run(const char* config_json,
                                    const char* out_path, int* passed,
                                    char** report_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GSDLAB_H_ */
