// Copyright 2026 The gsdlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gsdlab.h"

#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "core/error.hpp"
#include "core/gep.hpp"
#include "core/gsd.hpp"
#include "core/harness.hpp"
#include "core/matrix.hpp"
#include "core/model.hpp"
#include "core/privacy.hpp"
#include "core/synth.hpp"

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

gsdlab_status status_from(gsdlab::Status s) {
  using gsdlab::Status;
  switch (s) {
    case Status::kOk: return GSDLAB_OK;
    case Status::kInvalidArgument: return GSDLAB_ERROR_INVALID_ARGUMENT;
    case Status::kDimMismatch: return GSDLAB_ERROR_DIM_MISMATCH;
    case Status::kRankDeficient: return GSDLAB_ERROR_RANK_DEFICIENT;
    case Status::kBadK: return GSDLAB_ERROR_BAD_K;
    case Status::kNonFinite: return GSDLAB_ERROR_NONFINITE;
    case Status::kNonSymmetric: return GSDLAB_ERROR_NONSYMMETRIC;
    case Status::kZeroGap: return GSDLAB_ERROR_ZERO_GAP;
    case Status::kBadMagnitude: return GSDLAB_ERROR_BAD_MAGNITUDE;
    case Status::kEmptyMatrix: return GSDLAB_ERROR_EMPTY_MATRIX;
    case Status::kIoError: return GSDLAB_ERROR_IO;
    case Status::kParseError: return GSDLAB_ERROR_PARSE;
    case Status::kInternal: return GSDLAB_ERROR_INTERNAL;
  }
  return GSDLAB_ERROR_INTERNAL;
}

// Runs fn, translating exceptions into status codes + the thread-local
// error message.
template <typename Fn>
gsdlab_status guarded(Fn&& fn) {
  try {
    fn();
    return GSDLAB_OK;
  } catch (const gsdlab::Error& e) {
    g_last_error = e.what();
    return status_from(e.status());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return GSDLAB_ERROR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GSDLAB_ERROR_INTERNAL;
  }
}

gsdlab_status require_c(bool cond, const char* msg) {
  if (cond) return GSDLAB_OK;
  g_last_error = msg;
  return GSDLAB_ERROR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

gsdlab::Batch load_batch(const char* path) {
  return gsdlab::batch_from_csv(path);
}

}  // namespace

struct gsdlab_matrix {
  gsdlab::Matrix m;
};

struct gsdlab_model {
  gsdlab::ModelParams params;
};

extern "C" {

const char* gsdlab_status_name(gsdlab_status status) {
  switch (status) {
    case GSDLAB_OK: return "ok";
    case GSDLAB_ERROR_INVALID_ARGUMENT: return "invalid-argument";
    case GSDLAB_ERROR_DIM_MISMATCH: return "dim-mismatch";
    case GSDLAB_ERROR_RANK_DEFICIENT: return "rank-deficient";
    case GSDLAB_ERROR_BAD_K: return "bad-k";
    case GSDLAB_ERROR_NONFINITE: return "non-finite";
    case GSDLAB_ERROR_NONSYMMETRIC: return "non-symmetric";
    case GSDLAB_ERROR_ZERO_GAP: return "zero-gap";
    case GSDLAB_ERROR_BAD_MAGNITUDE: return "bad-magnitude";
    case GSDLAB_ERROR_EMPTY_MATRIX: return "empty-matrix";
    case GSDLAB_ERROR_IO: return "io-error";
    case GSDLAB_ERROR_PARSE: return "parse-error";
    case GSDLAB_ERROR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* gsdlab_last_error(void) { return g_last_error.c_str(); }

void gsdlab_string_free(char* s) { delete[] s; }

gsdlab_status gsdlab_matrix_create(size_t rows, size_t cols,
                                   const double* data, gsdlab_matrix** out) {
  if (auto rc = require_c(out != nullptr, "matrix_create: out is NULL"))
    return rc;
  return guarded([&] {
    auto* h = new gsdlab_matrix{gsdlab::Matrix(rows, cols)};
    if (data != nullptr)
      std::memcpy(h->m.data().data(), data, rows * cols * sizeof(double));
    *out = h;
  });
}

gsdlab_status gsdlab_matrix_read_csv(const char* path, gsdlab_matrix** out) {
  if (auto rc = require_c(path && out, "matrix_read_csv: NULL argument"))
    return rc;
  return guarded([&] { *out = new gsdlab_matrix{gsdlab::read_csv(path)}; });
}

gsdlab_status gsdlab_matrix_write_csv(const gsdlab_matrix* m,
                                      const char* path) {
  if (auto rc = require_c(m && path, "matrix_write_csv: NULL argument"))
    return rc;
  return guarded([&] { gsdlab::write_csv(m->m, path); });
}

size_t gsdlab_matrix_rows(const gsdlab_matrix* m) { return m ? m->m.rows() : 0; }
size_t gsdlab_matrix_cols(const gsdlab_matrix* m) { return m ? m->m.cols() : 0; }

const double* gsdlab_matrix_data(const gsdlab_matrix* m) {
  return m ? m->m.data().data() : nullptr;
}

void gsdlab_matrix_free(gsdlab_matrix* m) { delete m; }

gsdlab_status gsdlab_model_create(const char* spec_json, uint64_t seed,
                                  gsdlab_model** out) {
  if (auto rc = require_c(spec_json && out, "model_create: NULL argument"))
    return rc;
  return guarded([&] {
    const gsdlab::ModelSpec spec =
        gsdlab::model_spec_from_json_text(spec_json);
    *out = new gsdlab_model{gsdlab::init_model(spec, seed)};
  });
}

gsdlab_status gsdlab_model_param_count(const gsdlab_model* m, size_t* out) {
  if (auto rc = require_c(m && out, "model_param_count: NULL argument"))
    return rc;
  *out = m->params.spec.param_count();
  return GSDLAB_OK;
}

gsdlab_status gsdlab_model_params(const gsdlab_model* m, gsdlab_matrix** out) {
  if (auto rc = require_c(m && out, "model_params: NULL argument")) return rc;
  return guarded([&] {
    gsdlab::Matrix params(1, m->params.theta.size());
    params.data() = m->params.theta;
    *out = new gsdlab_matrix{std::move(params)};
  });
}

gsdlab_status gsdlab_model_set_params(gsdlab_model* m,
                                      const gsdlab_matrix* params) {
  if (auto rc = require_c(m && params, "model_set_params: NULL argument"))
    return rc;
  return guarded([&] {
    gsdlab::require(params->m.rows() == 1 &&
                        params->m.cols() == m->params.spec.param_count(),
                    gsdlab::Status::kDimMismatch,
                    "model_set_params: expected a 1 x param_count matrix");
    m->params.theta = params->m.data();
  });
}

void gsdlab_model_free(gsdlab_model* m) { delete m; }

gsdlab_status gsdlab_per_sample_gradients(const gsdlab_model* m,
                                          const gsdlab_matrix* batch,
                                          gsdlab_matrix** out) {
  if (auto rc =
          require_c(m && batch && out, "per_sample_gradients: NULL argument"))
    return rc;
  return guarded([&] {
    const gsdlab::Batch b = gsdlab::batch_from_matrix(batch->m);
    *out = new gsdlab_matrix{gsdlab::per_sample_gradients(m->params, b)};
  });
}

gsdlab_status gsdlab_evaluate(const gsdlab_model* m,
                              const gsdlab_matrix* batch, double* loss,
                              double* accuracy) {
  if (auto rc = require_c(m && batch && loss && accuracy,
                          "evaluate: NULL argument"))
    return rc;
  return guarded([&] {
    const gsdlab::Batch b = gsdlab::batch_from_matrix(batch->m);
    const gsdlab::Metrics met = gsdlab::evaluate(m->params, b);
    *loss = met.loss;
    *accuracy = met.accuracy;
  });
}

gsdlab_status gsdlab_gradient_subspace_distance(const gsdlab_matrix* g_priv,
                                                const gsdlab_matrix* g_pub,
                                                size_t k, char** report_json) {
  if (auto rc = require_c(g_priv && g_pub && report_json,
                          "gradient_subspace_distance: NULL argument"))
    return rc;
  return guarded([&] {
    const gsdlab::GsdReport r =
        gsdlab::gsd_from_gradients(g_priv->m, g_pub->m, k);
    *report_json = dup_string(gsdlab::gsd_report_to_json_text(r, false));
  });
}

gsdlab_status gsdlab_gsd_run(const char* model_spec_json, uint64_t model_seed,
                             const char* private_csv, const char* public_csv,
                             size_t k, int random_labels, uint64_t label_seed,
                             int headline_raw, char** report_json) {
  if (auto rc = require_c(model_spec_json && private_csv && public_csv &&
                              report_json,
                          "gsd_run: NULL argument"))
    return rc;
  return guarded([&] {
    const gsdlab::ModelSpec spec =
        gsdlab::model_spec_from_json_text(model_spec_json);
    const gsdlab::ModelParams model = gsdlab::init_model(spec, model_seed);
    const gsdlab::Batch priv = load_batch(private_csv);
    const gsdlab::Batch pub = load_batch(public_csv);
    gsdlab::GsdOptions opts;
    opts.random_labels = random_labels != 0;
    opts.label_seed = label_seed;
    const gsdlab::GsdReport r = gsdlab::gsd(priv, pub, model, k, opts);
    *report_json =
        dup_string(gsdlab::gsd_report_to_json_text(r, headline_raw != 0));
  });
}

gsdlab_status gsdlab_dp_gsd_run(const char* model_spec_json,
                                uint64_t model_seed, const char* private_csv,
                                const char* public_csv, double epsilon,
                                double delta, double clip_norm, uint64_t seed,
                                int random_labels, uint64_t label_seed,
                                int headline_raw, char** report_json) {
  if (auto rc = require_c(model_spec_json && private_csv && public_csv &&
                              report_json,
                          "dp_gsd_run: NULL argument"))
    return rc;
  return guarded([&] {
    const gsdlab::ModelSpec spec =
        gsdlab::model_spec_from_json_text(model_spec_json);
    const gsdlab::ModelParams model = gsdlab::init_model(spec, model_seed);
    const gsdlab::Batch priv = load_batch(private_csv);
    const gsdlab::Batch pub = load_batch(public_csv);
    gsdlab::PrivacyParams params;
    params.epsilon = epsilon;
    params.delta = delta;
    params.clip_norm = clip_norm;
    gsdlab::GsdOptions opts;
    opts.random_labels = random_labels != 0;
    opts.label_seed = label_seed;
    const gsdlab::DpGsdResult res =
        gsdlab::dp_gsd(priv, pub, model, params, seed, opts);
    json j = json::parse(
        gsdlab::gsd_report_to_json_text(res.report, headline_raw != 0));
    j["privacy"] = {{"mechanism", res.mechanism},
                    {"epsilon", epsilon},
                    {"delta", delta},
                    {"clip_norm", clip_norm},
                    {"epsilon_effective", res.epsilon_effective}};
    *report_json = dup_string(j.dump(2));
  });
}

gsdlab_status gsdlab_gep_train_run(const char* config_json,
                                   const char* private_train_csv,
                                   const char* private_test_csv,
                                   const char* public_csv,
                                   const char* result_json_path,
                                   const char* trace_csv_path,
                                   char** summary_json) {
  if (auto rc = require_c(config_json && private_train_csv && public_csv,
                          "gep_train_run: NULL argument"))
    return rc;
  return guarded([&] {
    json cfg_j;
    try {
      cfg_j = json::parse(config_json);
    } catch (const json::exception& e) {
      gsdlab::fail(gsdlab::Status::kParseError,
                   std::string("gep config: ") + e.what());
    }
    gsdlab::require(cfg_j.contains("model"), gsdlab::Status::kParseError,
                    "gep config: missing 'model'");
    const gsdlab::ModelSpec spec = gsdlab::model_spec_from_json(cfg_j["model"]);
    const std::uint64_t model_seed =
        cfg_j.contains("model_seed") ? cfg_j["model_seed"].get<std::uint64_t>()
                                     : 0;
    const gsdlab::ModelParams model0 = gsdlab::init_model(spec, model_seed);
    gsdlab::GepConfig gep = cfg_j.contains("gep")
                                ? gsdlab::gep_config_from_json(cfg_j["gep"])
                                : gsdlab::GepConfig{};
    gsdlab::PrivacyParams privacy =
        cfg_j.contains("privacy")
            ? gsdlab::privacy_params_from_json(cfg_j["privacy"])
            : gsdlab::PrivacyParams{};

    const gsdlab::Batch train = load_batch(private_train_csv);
    gsdlab::Batch test;
    if (private_test_csv != nullptr && private_test_csv[0] != '\0')
      test = load_batch(private_test_csv);
    const gsdlab::Batch pub = load_batch(public_csv);

    const gsdlab::GepResult res =
        gsdlab::gep_train(train, test, pub, model0, gep, privacy);

    json out;
    out["config"] = {{"model", json::parse(gsdlab::model_spec_to_json_text(spec))},
                     {"model_seed", model_seed},
                     {"gep", gsdlab::gep_config_to_json(gep)},
                     {"privacy", gsdlab::privacy_params_to_json(privacy)}};
    out["iterations"] = res.iterations_run;
    out["sigma_embedding"] = res.sigma_embedding_used;
    out["sigma_residual"] = res.sigma_residual_used;
    out["final"] = {{"loss", res.final_test.loss},
                    {"accuracy", res.final_test.accuracy}};
    out["averaged"] = {{"loss", res.averaged_test.loss},
                       {"accuracy", res.averaged_test.accuracy}};
    double worst = -1e300;
    for (const auto& t : res.trace)
      worst = std::max(worst, t.reconstruction_error - t.lemma1_bound);
    out["trace_summary"] = {{"steps", res.trace.size()},
                            {"max_bound_violation", worst},
                            {"final_train_loss", res.trace.back().train_loss}};
    if (summary_json != nullptr) *summary_json = dup_string(out.dump(2));

    if (result_json_path != nullptr && result_json_path[0] != '\0') {
      json full = out;
      full["final_params"] = res.final_model.theta;
      full["averaged_params"] = res.averaged_model.theta;
      gsdlab::write_text_file(result_json_path, full.dump(2) + "\n");
    }
    if (trace_csv_path != nullptr && trace_csv_path[0] != '\0')
      gsdlab::write_text_file(trace_csv_path, gsdlab::trace_to_csv(res.trace));
  });
}

gsdlab_status gsdlab_gep_noise_scale(double epsilon, double delta,
                                     uint64_t iterations, double* sigma,
                                     int* epsilon_in_range) {
  if (auto rc = require_c(sigma != nullptr, "gep_noise_scale: sigma is NULL"))
    return rc;
  return guarded([&] {
    gsdlab::PrivacyParams p;
    p.epsilon = epsilon;
    p.delta = delta;
    p.iterations = iterations;
    const gsdlab::NoiseScale s = gsdlab::gep_noise_scale(p);
    *sigma = s.sigma;
    if (epsilon_in_range != nullptr)
      *epsilon_in_range = s.epsilon_in_range ? 1 : 0;
  });
}

gsdlab_status gsdlab_required_sample_size(double top_eigenvalue,
                                          double eigengap, size_t ambient_dim,
                                          double rho, double eta,
                                          double epsilon, double clip_norm,
                                          double* out) {
  if (auto rc = require_c(out != nullptr, "required_sample_size: out is NULL"))
    return rc;
  return guarded([&] {
    gsdlab::DpPcaDiagnostics diag;
    diag.top_eigenvalue = top_eigenvalue;
    diag.eigengap = eigengap;
    diag.ambient_dim = ambient_dim;
    gsdlab::CloseApprox close;
    close.rho = rho;
    close.eta = eta;
    *out = gsdlab::required_sample_size(diag, close, epsilon, clip_norm);
  });
}

gsdlab_status gsdlab_synth_make(const char* spec_json, const char* out_dir,
                                char** manifest_json) {
  if (auto rc = require_c(spec_json && out_dir, "synth_make: NULL argument"))
    return rc;
  return guarded([&] {
    const gsdlab::SynthRequest req =
        gsdlab::synth_request_from_json_text(spec_json);
    const std::string manifest = gsdlab::synth_make(req, out_dir);
    if (manifest_json != nullptr) *manifest_json = dup_string(manifest);
  });
}

gsdlab_status gsdlab_experiment_run(const char* config_json,
                                    const char* out_path, int* passed,
                                    char** report_json) {
  if (auto rc = require_c(config_json != nullptr,
                          "experiment_run: config is NULL"))
    return rc;
  return guarded([&] {
    gsdlab::ExperimentConfig cfg =
        gsdlab::experiment_config_from_json_text(config_json);
    if (out_path != nullptr && out_path[0] != '\0') cfg.output = out_path;
    const gsdlab::ExperimentReport rep = gsdlab::run_experiment(cfg);
    if (passed != nullptr) *passed = rep.passed ? 1 : 0;
    if (report_json != nullptr) *report_json = dup_string(rep.to_json_text());
  });
}

}  // extern "C"
