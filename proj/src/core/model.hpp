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

#include "core/matrix.hpp"

namespace gsdlab {

enum class ModelKind {
  kLinearRegression,
  kLogisticRegression,
  kSoftmaxRegression,
  kMlp,
};

enum class Activation { kTanh, kRelu };

const char* model_kind_name(ModelKind k);
const char* activation_name(Activation a);

// Architecture of a small differentiable model. Parameters are stored as one
// flat vector, layer by layer: weights (out x in, row-major) then biases.
struct ModelSpec {
  ModelKind kind = ModelKind::kLogisticRegression;
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;  // mlp only
  std::size_t num_classes = 2;           // classifiers only
  Activation activation = Activation::kTanh;

  std::size_t param_count() const;
  bool is_classifier() const { return kind != ModelKind::kLinearRegression; }
  bool is_convex() const { return kind != ModelKind::kMlp; }
  void validate() const;
};

ModelSpec model_spec_from_json_text(const std::string& text);
std::string model_spec_to_json_text(const ModelSpec& spec);

struct ModelParams {
  ModelSpec spec;
  std::vector<double> theta;
};

// features: m x input_dim; labels: class index for classifiers (stored as an
// integral double), real target for regression.
struct Batch {
  Matrix features;
  std::vector<double> labels;

  std::size_t size() const { return features.rows(); }
};

struct Metrics {
  double loss = 0.0;
  double accuracy = 0.0;  // fraction argmax-correct; 0.0 for regression
};

// Weights ~ Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) drawn in parameter
// order; biases zero. Deterministic per (spec, seed).
ModelParams init_model(const ModelSpec& spec, std::uint64_t seed);

// Per-example loss: 0.5*(yhat-y)^2 for linear regression, cross-entropy
// otherwise.
double example_loss(const ModelParams& model, std::span<const double> x,
                    double label);

// Row i is the gradient of example_loss at example i (hand-written backprop).
Matrix per_sample_gradients(const ModelParams& model, const Batch& batch);

Metrics evaluate(const ModelParams& model, const Batch& batch);

void validate_batch(const ModelSpec& spec, const Batch& batch);

// Copies the selected examples into a new batch, in index order.
Batch take_rows(const Batch& b, const std::vector<std::size_t>& idx);

}  // namespace gsdlab
