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

#include "core/gep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/rng.hpp"

namespace gsdlab {

namespace {

constexpr std::uint64_t kTagBatch = 0x62617463ULL;
constexpr std::uint64_t kTagSubspace = 0x73756273ULL;
constexpr std::uint64_t kTagNoise = 0x6e6f6973ULL;

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

Matrix clip_rows_allow_zero(const Matrix& g, double c) {
  if (c == 0.0) return Matrix(g.rows(), g.cols(), 0.0);
  return clip_rows(g, c);
}

std::vector<double> column_sums(const Matrix& m) {
  std::vector<double> s(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) s[j] += row[j];
  }
  return s;
}

}  // namespace

void GepConfig::validate() const {
  require(k >= 1, Status::kBadK, "gep: k must be positive");
  require(power_iterations >= 1, Status::kInvalidArgument,
          "gep: power iteration count must be positive");
  require(learning_rate > 0.0, Status::kInvalidArgument,
          "gep: learning rate must be positive");
  require(clip_embedding > 0.0, Status::kInvalidArgument,
          "gep: embedding clip norm must be positive");
  require(clip_residual >= 0.0, Status::kInvalidArgument,
          "gep: residual clip norm must be non-negative");
  require(batch_size >= 1, Status::kInvalidArgument,
          "gep: batch size must be positive");
}

Subspace public_subspace(const Matrix& g_pub, std::size_t k,
                         std::size_t power_iterations, std::uint64_t seed) {
  require(!g_pub.empty(), Status::kEmptyMatrix, "public_subspace: empty matrix");
  require(g_pub.all_finite(), Status::kNonFinite,
          "public_subspace: non-finite entries");
  const std::size_t p = g_pub.cols();
  require(k >= 1 && k <= std::min(g_pub.rows(), p), Status::kBadK,
          "public_subspace: k must be in 1..min(m, p)");
  require(power_iterations >= 1, Status::kInvalidArgument,
          "public_subspace: need at least one iteration");

  Rng rng(seed);
  Subspace v = orthonormalize(gaussian_matrix(p, k, rng));
  for (std::size_t it = 0; it < power_iterations; ++it) {
    const Matrix y = matmul(transpose(g_pub), matmul(g_pub, v.basis));
    v = orthonormalize(y);
  }
  return v;
}

std::vector<double> gep_step(const Matrix& g_priv, const Subspace& v,
                             const GepConfig& cfg, std::uint64_t noise_seed,
                             GepStepTrace* trace) {
  require(g_priv.cols() == v.ambient_dim, Status::kDimMismatch,
          "gep_step: gradients and subspace dimensions disagree");
  require(cfg.sigma_embedding >= 0.0 && cfg.sigma_residual >= 0.0,
          Status::kInvalidArgument,
          "gep_step: noise multipliers must be resolved and non-negative");
  const std::size_t m = g_priv.rows();
  const std::size_t p = g_priv.cols();
  const std::size_t k = v.k;

  const Matrix w = matmul(g_priv, v.basis);                    // m x k
  const Matrix residual = g_priv - matmul(w, transpose(v.basis));
  const Matrix w_hat = clip_rows_allow_zero(w, cfg.clip_embedding);
  const Matrix r_hat = clip_rows_allow_zero(residual, cfg.clip_residual);

  std::vector<double> w_sum = column_sums(w_hat);
  std::vector<double> r_sum = column_sums(r_hat);
  Rng rng(noise_seed);
  const double w_noise = cfg.sigma_embedding * cfg.clip_embedding;
  for (std::size_t j = 0; j < k; ++j) {
    const double z = rng.normal();
    if (w_noise != 0.0) w_sum[j] += w_noise * z;
  }
  const double r_noise = cfg.sigma_residual * cfg.clip_residual;
  for (std::size_t j = 0; j < p; ++j) {
    const double z = rng.normal();
    if (r_noise != 0.0) r_sum[j] += r_noise * z;
  }

  std::vector<double> update(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += v.basis(i, j) * w_sum[j];
    update[i] = (s + r_sum[i]) / static_cast<double>(m);
  }

  if (trace) {
    trace->reconstruction_error = spectral_norm(residual);
    const SvdResult sv = svd(g_priv);
    trace->s1 = sv.singular_values.empty() ? 0.0 : sv.singular_values[0];
    trace->s_k_plus_1 =
        k < sv.singular_values.size() ? sv.singular_values[k] : 0.0;
    Subspace v_priv = sv.right;
    if (k < v_priv.k) {
      Matrix basis(p, k);
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < k; ++j) basis(i, j) = sv.right.basis(i, j);
      v_priv = Subspace{p, k, std::move(basis)};
    } else if (k > v_priv.k) {
      // k exceeds the private rank; pad with arbitrary orthonormal
      // directions, which leaves the bound valid (the padded projector
      // still contains the whole private row space).
      v_priv = extend_basis(v_priv, k);
    }
    trace->gsd = projection_metric(v_priv, v);
    trace->lemma1_bound =
        reconstruction_bound(trace->s1, trace->s_k_plus_1, trace->gsd);
  }
  return update;
}

double estimate_beta(const ModelSpec& spec, const Batch& batch) {
  double max_sq = 0.0;
  for (std::size_t i = 0; i < batch.features.rows(); ++i) {
    const double n = norm2(batch.features.row(i));
    max_sq = std::max(max_sq, n * n + 1.0);  // +1 for the bias coordinate
  }
  switch (spec.kind) {
    case ModelKind::kLinearRegression:
      return max_sq;
    case ModelKind::kLogisticRegression:
      return 0.25 * max_sq;
    case ModelKind::kSoftmaxRegression:
      return 0.5 * max_sq;
    case ModelKind::kMlp:
      return max_sq;  // heuristic only; the convex guarantees do not apply
  }
  return max_sq;
}

GepResult gep_train(const Batch& private_train, const Batch& private_test,
                    const Batch& public_batch, const ModelParams& model0,
                    const GepConfig& cfg, const PrivacyParams& privacy) {
  cfg.validate();
  validate_batch(model0.spec, private_train);
  validate_batch(model0.spec, public_batch);
  require(model0.spec.is_convex() || cfg.allow_nonconvex,
          Status::kInvalidArgument,
          "gep_train: non-convex model kinds need allow_nonconvex");

  const std::size_t p = model0.spec.param_count();
  require(cfg.k <= p, Status::kBadK, "gep_train: k exceeds parameter count");

  GepConfig run = cfg;
  if (run.iterations == 0) {
    const double beta = estimate_beta(model0.spec, private_train);
    const double t = std::round(static_cast<double>(private_train.size()) *
                                beta * privacy.epsilon /
                                std::sqrt(static_cast<double>(p)));
    run.iterations = static_cast<std::size_t>(std::max(1.0, t));
  }
  if (run.sigma_embedding < 0.0 || run.sigma_residual < 0.0) {
    PrivacyParams cal = privacy;
    cal.iterations = run.iterations;
    const double sigma = gep_noise_scale(cal).sigma;
    if (run.sigma_embedding < 0.0) run.sigma_embedding = sigma;
    if (run.sigma_residual < 0.0) run.sigma_residual = sigma;
  }

  ModelParams model = model0;
  std::vector<double> theta_sum(p, 0.0);
  GepResult out;
  out.trace.reserve(run.iterations);
  for (std::size_t t = 0; t < run.iterations; ++t) {
    Rng batch_rng(derive_seed(run.seed, kTagBatch, t));
    const auto idx = sample_without_replacement(private_train.size(),
                                                run.batch_size, batch_rng);
    const Batch mini = take_rows(private_train, idx);

    const Matrix g_priv = per_sample_gradients(model, mini);
    const Matrix g_pub = per_sample_gradients(model, public_batch);
    const Subspace v = public_subspace(g_pub, run.k, run.power_iterations,
                                       derive_seed(run.seed, kTagSubspace, t));
    GepStepTrace trace;
    trace.step = t;
    trace.train_loss = evaluate(model, mini).loss;
    const std::vector<double> update =
        gep_step(g_priv, v, run, derive_seed(run.seed, kTagNoise, t), &trace);
    for (std::size_t j = 0; j < p; ++j) {
      model.theta[j] -= run.learning_rate * update[j];
      theta_sum[j] += model.theta[j];
    }
    out.trace.push_back(trace);
  }

  out.final_model = model;
  out.averaged_model = model0;
  for (std::size_t j = 0; j < p; ++j)
    out.averaged_model.theta[j] =
        theta_sum[j] / static_cast<double>(run.iterations);
  if (private_test.size() > 0) {
    out.final_test = evaluate(out.final_model, private_test);
    out.averaged_test = evaluate(out.averaged_model, private_test);
  }
  out.sigma_embedding_used = run.sigma_embedding;
  out.sigma_residual_used = run.sigma_residual;
  out.iterations_run = run.iterations;
  return out;
}

std::string trace_to_csv(const std::vector<GepStepTrace>& trace) {
  std::string out = "t,r_t,d_t,gsd_t,s1_t,sk1_t,loss\n";
  for (const GepStepTrace& s : trace) {
    out += std::to_string(s.step);
    out.push_back(',');
    out += format_double(s.reconstruction_error);
    out.push_back(',');
    out += format_double(s.lemma1_bound);
    out.push_back(',');
    out += format_double(s.gsd);
    out.push_back(',');
    out += format_double(s.s1);
    out.push_back(',');
    out += format_double(s.s_k_plus_1);
    out.push_back(',');
    out += format_double(s.train_loss);
    out.push_back('\n');
  }
  return out;
}

}  // namespace gsdlab
