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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/gsd.hpp"
#include "core/linalg.hpp"
#include "core/model.hpp"
#include "core/privacy.hpp"

namespace gsdlab {

struct GepConfig {
  std::size_t k = 4;
  std::size_t power_iterations = 20;  // rounds of orthogonal iteration
  double learning_rate = 0.1;
  std::size_t iterations = 0;  // 0 = schedule default round(n·beta·eps/sqrt(p))
  double clip_embedding = 1.0;  // S1
  double clip_residual = 1.0;   // S2; 0 discards the residual entirely
  double sigma_embedding = -1.0;  // < 0 = calibrate from the privacy params
  double sigma_residual = -1.0;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  bool allow_nonconvex = false;

  void validate() const;
};

struct GepStepTrace {
  std::size_t step = 0;
  double reconstruction_error = 0.0;  // r_t = |G - G·V·Vᵀ|_2
  double lemma1_bound = 0.0;          // d_t = sqrt(2)·s1·gsd + s_{k+1}
  double gsd = 0.0;                   // distance between private top-k and V
  double s1 = 0.0;
  double s_k_plus_1 = 0.0;
  double train_loss = 0.0;  // minibatch loss at the pre-update iterate
};

struct GepResult {
  ModelParams final_model;
  ModelParams averaged_model;  // mean of the post-update iterates
  std::vector<GepStepTrace> trace;
  Metrics final_test;
  Metrics averaged_test;
  double sigma_embedding_used = 0.0;
  double sigma_residual_used = 0.0;
  std::size_t iterations_run = 0;
};

// Orthogonal (subspace) iteration on GᵀG from a seeded Gaussian start,
// re-orthonormalized every round. Converges to the top-k right subspace
// whenever the eigengap at k is positive.
Subspace public_subspace(const Matrix& g_pub, std::size_t k,
                         std::size_t power_iterations, std::uint64_t seed);

// One GEP update from a private gradient matrix and a public subspace:
// embed rows on V, clip to S1; residual rows clipped to S2; perturb the two
// sums with N(0, sigma1²·S1²·I_k) and N(0, sigma2²·S2²·I_p); update is
// (V·w + r)/m. The trace captures the reconstruction error and its bound.
std::vector<double> gep_step(const Matrix& g_priv, const Subspace& v,
                             const GepConfig& cfg, std::uint64_t noise_seed,
                             GepStepTrace* trace);

// Smoothness constant estimate for the convex models on the given features.
double estimate_beta(const ModelSpec& spec, const Batch& batch);

// Full training loop: at each step a fresh private minibatch and fresh
// public gradients at the current iterate, public subspace by power
// iteration, one perturbed projected update.
GepResult gep_train(const Batch& private_train, const Batch& private_test,
                    const Batch& public_batch, const ModelParams& model0,
                    const GepConfig& cfg, const PrivacyParams& privacy);

// Trace rows as CSV: t,r_t,d_t,gsd_t,s1_t,sk1_t,loss.
std::string trace_to_csv(const std::vector<GepStepTrace>& trace);

}  // namespace gsdlab
