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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/linalg.hpp"
#include "core/model.hpp"
#include "core/rng.hpp"

namespace gsdlab {

// Result of one gradient-subspace-distance computation. distance_raw lives in
// [0, sqrt(k)]; distance_normalized = distance_raw / sqrt(k) in [0, 1].
struct GsdReport {
  std::size_t k = 0;
  PrincipalAngles angles;
  double distance_raw = 0.0;
  double distance_normalized = 0.0;
  std::vector<double> priv_singular_values;  // full spectrum (empty when the
                                             // private side was computed
                                             // privately)
  std::vector<double> pub_singular_values;
  std::size_t m_priv = 0;
  std::size_t m_pub = 0;
  std::size_t p = 0;
};

std::string gsd_report_to_json_text(const GsdReport& r, bool headline_raw);

struct GsdOptions {
  // When set, both batches are relabeled uniformly at random before taking
  // gradients (classifiers: uniform class; regression: uniform in [-1, 1]).
  bool random_labels = false;
  std::uint64_t label_seed = 0;
};

Batch with_random_labels(const Batch& batch, const ModelSpec& spec, Rng& rng);

// Per-sample gradients of both batches at the given weights, top-k right
// singular subspaces, projection metric between them.
GsdReport gsd(const Batch& priv, const Batch& pub, const ModelParams& model,
              std::size_t k, const GsdOptions& options = {});

// Distance computed from already materialized gradient matrices.
GsdReport gsd_from_gradients(const Matrix& g_priv, const Matrix& g_pub,
                             std::size_t k);

// Spectral norm of g_priv - g_priv·V·Vᵀ, the private gradient mass lost by
// projecting on span(V).
double reconstruction_error(const Matrix& g_priv, const Subspace& v_pub);

// sqrt(2)·s1·distance + s_{k+1}: the bound the reconstruction error must
// respect for any pair of k-dimensional subspaces.
double reconstruction_bound(double s1, double s_k_plus_1, double distance_raw);

struct SgdConfig {
  std::size_t steps = 1;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
};

struct TrajectoryStep {
  std::size_t iteration = 0;
  std::vector<GsdReport> reports;  // one per public dataset, input order
};

struct TrajectoryReport {
  std::vector<TrajectoryStep> steps;
  // Fraction of steps whose ranking of the public datasets matches the
  // ranking at step 0 (step 0 included, so a single step scores 1.0).
  double order_agreement = 0.0;
};

// Plain (non-private) SGD on the private task; at every iteration the
// distance between the current private minibatch and each public batch is
// recorded at the current weights.
TrajectoryReport gsd_trajectory(const Batch& private_train,
                                const std::vector<Batch>& publics,
                                const ModelParams& model0, std::size_t k,
                                const SgdConfig& sgd);

struct RankedPublic {
  std::string name;
  double distance_raw = 0.0;
  double distance_normalized = 0.0;
};

// Ascending by raw distance, ties broken by name; first entry is the
// recommended public dataset.
std::vector<RankedPublic> rank_publics(
    const std::vector<std::pair<std::string, GsdReport>>& reports);

}  // namespace gsdlab
