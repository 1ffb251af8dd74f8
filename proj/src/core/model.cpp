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

#include "core/model.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "core/rng.hpp"

namespace gsdlab {

namespace {

using nlohmann::json;

// Layer sizes including input and output, e.g. mlp d=8,h=[16],C=3 -> {8,16,3}.
std::vector<std::size_t> layer_dims(const ModelSpec& spec) {
  std::vector<std::size_t> dims{spec.input_dim};
  if (spec.kind == ModelKind::kMlp)
    dims.insert(dims.end(), spec.hidden_dims.begin(), spec.hidden_dims.end());
  switch (spec.kind) {
    case ModelKind::kLinearRegression:
    case ModelKind::kLogisticRegression:
      dims.push_back(1);
      break;
    case ModelKind::kSoftmaxRegression:
    case ModelKind::kMlp:
      dims.push_back(spec.num_classes);
      break;
  }
  return dims;
}

double activate(Activation a, double z) {
  return a == Activation::kTanh ? std::tanh(z) : std::max(0.0, z);
}

double activate_grad(Activation a, double z) {
  if (a == Activation::kTanh) {
    const double t = std::tanh(z);
    return 1.0 - t * t;
  }
  return z > 0.0 ? 1.0 : 0.0;
}

// Numerically stable binary cross-entropy of a logit against y in {0, 1}.
double logistic_loss(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

struct Forward {
  // pre[l] are the pre-activations of layer l, post[l] the activations;
  // post.back() holds logits (or the scalar prediction).
  std::vector<std::vector<double>> pre, post;
};

Forward forward_pass(const ModelParams& model, std::span<const double> x) {
  const auto dims = layer_dims(model.spec);
  const std::size_t layers = dims.size() - 1;
  Forward f;
  f.pre.resize(layers);
  f.post.resize(layers);
  std::size_t off = 0;
  std::vector<double> cur(x.begin(), x.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = dims[l], out = dims[l + 1];
    std::vector<double> z(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      double s = 0.0;
      const double* wrow = model.theta.data() + off + o * in;
      for (std::size_t i = 0; i < in; ++i) s += wrow[i] * cur[i];
      z[o] = s + model.theta[off + out * in + o];
    }
    off += out * in + out;
    f.pre[l] = z;
    if (l + 1 < layers)
      for (double& v : z) v = activate(model.spec.activation, v);
    f.post[l] = std::move(z);
    cur = f.post[l];
  }
  return f;
}

std::vector<double> softmax(const std::vector<double>& z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - zmax);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

double logsumexp(const std::vector<double>& z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - zmax);
  return zmax + std::log(s);
}

// Gradient of the output loss wrt the logits.
std::vector<double> output_delta(const ModelSpec& spec,
                                 const std::vector<double>& logits,
                                 double label) {
  switch (spec.kind) {
    case ModelKind::kLinearRegression:
      return {logits[0] - label};
    case ModelKind::kLogisticRegression: {
      const double p = 1.0 / (1.0 + std::exp(-logits[0]));
      return {p - label};
    }
    case ModelKind::kSoftmaxRegression:
    case ModelKind::kMlp: {
      std::vector<double> d = softmax(logits);
      d[static_cast<std::size_t>(label)] -= 1.0;
      return d;
    }
  }
  fail(Status::kInternal, "unreachable");
}

void backward_into_row(const ModelParams& model, std::span<const double> x,
                       double label, std::span<double> grad_row) {
  const auto dims = layer_dims(model.spec);
  const std::size_t layers = dims.size() - 1;
  const Forward f = forward_pass(model, x);
  std::vector<double> delta = output_delta(model.spec, f.pre[layers - 1], label);

  // Offsets of each layer's parameter block.
  std::vector<std::size_t> offs(layers, 0);
  for (std::size_t l = 1; l < layers; ++l)
    offs[l] = offs[l - 1] + dims[l] * dims[l - 1] + dims[l];

  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = dims[l], out = dims[l + 1];
    const std::span<const double> input =
        l == 0 ? x : std::span<const double>(f.post[l - 1]);
    for (std::size_t o = 0; o < out; ++o) {
      double* wg = grad_row.data() + offs[l] + o * in;
      for (std::size_t i = 0; i < in; ++i) wg[i] = delta[o] * input[i];
      grad_row[offs[l] + out * in + o] = delta[o];
    }
    if (l == 0) break;
    std::vector<double> prev(in, 0.0);
    const double* wbase = model.theta.data() + offs[l];
    for (std::size_t i = 0; i < in; ++i) {
      double s = 0.0;
      for (std::size_t o = 0; o < out; ++o) s += wbase[o * in + i] * delta[o];
      prev[i] = s * activate_grad(model.spec.activation, f.pre[l - 1][i]);
    }
    delta = std::move(prev);
  }
}

}  // namespace

const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::kLinearRegression: return "linear-regression";
    case ModelKind::kLogisticRegression: return "logistic-regression";
    case ModelKind::kSoftmaxRegression: return "softmax-regression";
    case ModelKind::kMlp: return "mlp";
  }
  return "unknown";
}

const char* activation_name(Activation a) {
  return a == Activation::kTanh ? "tanh" : "relu";
}

std::size_t ModelSpec::param_count() const {
  const auto dims = layer_dims(*this);
  std::size_t p = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l)
    p += dims[l] * dims[l + 1] + dims[l + 1];
  return p;
}

void ModelSpec::validate() const {
  require(input_dim >= 1, Status::kInvalidArgument,
          "model spec: input_dim must be positive");
  if (kind == ModelKind::kLogisticRegression)
    require(num_classes == 2, Status::kInvalidArgument,
            "model spec: logistic regression requires num_classes == 2");
  if (is_classifier())
    require(num_classes >= 2, Status::kInvalidArgument,
            "model spec: classifiers need at least two classes");
  if (kind == ModelKind::kMlp) {
    require(!hidden_dims.empty(), Status::kInvalidArgument,
            "model spec: mlp needs at least one hidden layer");
    for (std::size_t h : hidden_dims)
      require(h >= 1, Status::kInvalidArgument,
              "model spec: hidden dims must be positive");
  }
}

ModelSpec model_spec_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Status::kParseError, std::string("model spec: ") + e.what());
  }
  ModelSpec spec;
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear-regression") spec.kind = ModelKind::kLinearRegression;
    else if (kind == "logistic-regression") spec.kind = ModelKind::kLogisticRegression;
    else if (kind == "softmax-regression") spec.kind = ModelKind::kSoftmaxRegression;
    else if (kind == "mlp") spec.kind = ModelKind::kMlp;
    else fail(Status::kParseError, "model spec: unknown kind '" + kind + "'");
    spec.input_dim = j.at("input_dim").get<std::size_t>();
    if (j.contains("hidden_dims"))
      spec.hidden_dims = j["hidden_dims"].get<std::vector<std::size_t>>();
    if (j.contains("num_classes"))
      spec.num_classes = j["num_classes"].get<std::size_t>();
    if (j.contains("activation")) {
      const std::string a = j["activation"].get<std::string>();
      if (a == "tanh") spec.activation = Activation::kTanh;
      else if (a == "relu") spec.activation = Activation::kRelu;
      else fail(Status::kParseError, "model spec: unknown activation '" + a + "'");
    }
  } catch (const json::exception& e) {
    fail(Status::kParseError, std::string("model spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string model_spec_to_json_text(const ModelSpec& spec) {
  json j;
  j["kind"] = model_kind_name(spec.kind);
  j["input_dim"] = spec.input_dim;
  if (spec.kind == ModelKind::kMlp) {
    j["hidden_dims"] = spec.hidden_dims;
    j["activation"] = activation_name(spec.activation);
  }
  if (spec.is_classifier()) j["num_classes"] = spec.num_classes;
  return j.dump();
}

ModelParams init_model(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  ModelParams model;
  model.spec = spec;
  model.theta.assign(spec.param_count(), 0.0);
  Rng rng(seed);
  const auto dims = layer_dims(spec);
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t in = dims[l], out = dims[l + 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (std::size_t w = 0; w < in * out; ++w)
      model.theta[off + w] = rng.uniform(-scale, scale);
    off += in * out + out;  // biases stay zero
  }
  return model;
}

double example_loss(const ModelParams& model, std::span<const double> x,
                    double label) {
  const auto dims = layer_dims(model.spec);
  const Forward f = forward_pass(model, x);
  const std::vector<double>& logits = f.pre.back();
  switch (model.spec.kind) {
    case ModelKind::kLinearRegression: {
      const double d = logits[0] - label;
      return 0.5 * d * d;
    }
    case ModelKind::kLogisticRegression:
      return logistic_loss(logits[0], label);
    case ModelKind::kSoftmaxRegression:
    case ModelKind::kMlp:
      return logsumexp(logits) - logits[static_cast<std::size_t>(label)];
  }
  fail(Status::kInternal, "unreachable");
}

void validate_batch(const ModelSpec& spec, const Batch& batch) {
  require(batch.features.rows() >= 1, Status::kEmptyMatrix,
          "batch: no examples");
  require(batch.features.cols() == spec.input_dim, Status::kDimMismatch,
          "batch: feature dimension does not match model input_dim");
  require(batch.labels.size() == batch.features.rows(), Status::kDimMismatch,
          "batch: label count does not match example count");
  if (spec.is_classifier()) {
    for (double y : batch.labels) {
      require(y == std::floor(y) && y >= 0.0 &&
                  y < static_cast<double>(spec.num_classes),
              Status::kInvalidArgument,
              "batch: classifier label out of range");
    }
  }
}

Matrix per_sample_gradients(const ModelParams& model, const Batch& batch) {
  validate_batch(model.spec, batch);
  const std::size_t m = batch.size();
  const std::size_t p = model.spec.param_count();
  require(model.theta.size() == p, Status::kDimMismatch,
          "model: parameter vector has the wrong length");
  Matrix g(m, p);
  for (std::size_t i = 0; i < m; ++i)
    backward_into_row(model, batch.features.row(i), batch.labels[i], g.row(i));
  return g;
}

Batch take_rows(const Batch& b, const std::vector<std::size_t>& idx) {
  Batch out;
  out.features = Matrix(idx.size(), b.features.cols());
  out.labels.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto src = b.features.row(idx[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.labels[i] = b.labels[idx[i]];
  }
  return out;
}

Metrics evaluate(const ModelParams& model, const Batch& batch) {
  validate_batch(model.spec, batch);
  Metrics out;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto x = batch.features.row(i);
    const double y = batch.labels[i];
    out.loss += example_loss(model, x, y);
    if (model.spec.is_classifier()) {
      const Forward f = forward_pass(model, x);
      const std::vector<double>& logits = f.pre.back();
      std::size_t pred = 0;
      if (model.spec.kind == ModelKind::kLogisticRegression) {
        pred = logits[0] > 0.0 ? 1 : 0;
      } else {
        for (std::size_t c = 1; c < logits.size(); ++c)
          if (logits[c] > logits[pred]) pred = c;
      }
      if (static_cast<double>(pred) == y) ++correct;
    }
  }
  out.loss /= static_cast<double>(batch.size());
  out.accuracy = model.spec.is_classifier()
                     ? static_cast<double>(correct) / static_cast<double>(batch.size())
                     : 0.0;
  return out;
}

}  // namespace gsdlab
