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

#include "core/gsd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "core/rng.hpp"

namespace gsdlab {

namespace {

using nlohmann::json;

constexpr std::uint64_t kTagMinibatch = 0x6d696e69ULL;

Subspace truncate_right(const SvdResult& full, std::size_t k) {
  Matrix b(full.right.basis.rows(), k);
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j) b(i, j) = full.right.basis(i, j);
  return Subspace{full.right.ambient_dim, k, std::move(b)};
}

// Ranking of the publics by (distance, index); used for order agreement.
std::vector<std::size_t> ranking_of(const std::vector<GsdReport>& reports) {
  std::vector<std::size_t> order(reports.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return reports[a].distance_raw < reports[b].distance_raw;
  });
  return order;
}

}  // namespace

std::string gsd_report_to_json_text(const GsdReport& r, bool headline_raw) {
  json j;
  j["k"] = r.k;
  j["p"] = r.p;
  j["m_priv"] = r.m_priv;
  j["m_pub"] = r.m_pub;
  j["angles"] = r.angles.angles;
  j["distance_raw"] = r.distance_raw;
  j["distance_normalized"] = r.distance_normalized;
  j["distance"] = headline_raw ? r.distance_raw : r.distance_normalized;
  j["priv_singular_values"] = r.priv_singular_values;
  j["pub_singular_values"] = r.pub_singular_values;
  return j.dump(2);
}

Batch with_random_labels(const Batch& batch, const ModelSpec& spec, Rng& rng) {
  Batch out = batch;
  for (double& y : out.labels) {
    y = spec.is_classifier()
            ? static_cast<double>(rng.below(spec.num_classes))
            : rng.uniform(-1.0, 1.0);
  }
  return out;
}

GsdReport gsd_from_gradients(const Matrix& g_priv, const Matrix& g_pub,
                             std::size_t k) {
  require(g_priv.cols() == g_pub.cols(), Status::kDimMismatch,
          "gsd: gradient matrices have different parameter dimension");
  const std::size_t p = g_priv.cols();
  require(k >= 1 && k <= std::min({g_priv.rows(), g_pub.rows(), p}),
          Status::kBadK, "gsd: k must be in 1..min(m_priv, m_pub, p)");
  const SvdResult sv_priv = svd(g_priv);
  const SvdResult sv_pub = svd(g_pub);
  const Subspace v_priv = truncate_right(sv_priv, k);
  const Subspace v_pub = truncate_right(sv_pub, k);

  GsdReport r;
  r.k = k;
  r.p = p;
  r.m_priv = g_priv.rows();
  r.m_pub = g_pub.rows();
  r.angles = principal_angles(v_priv, v_pub);
  r.distance_raw = projection_metric(r.angles);
  r.distance_normalized = r.distance_raw / std::sqrt(static_cast<double>(k));
  r.priv_singular_values = sv_priv.singular_values;
  r.pub_singular_values = sv_pub.singular_values;
  return r;
}

GsdReport gsd(const Batch& priv, const Batch& pub, const ModelParams& model,
              std::size_t k, const GsdOptions& options) {
  Matrix g_priv, g_pub;
  if (options.random_labels) {
    Rng rng(options.label_seed);
    const Batch rpriv = with_random_labels(priv, model.spec, rng);
    const Batch rpub = with_random_labels(pub, model.spec, rng);
    g_priv = per_sample_gradients(model, rpriv);
    g_pub = per_sample_gradients(model, rpub);
  } else {
    g_priv = per_sample_gradients(model, priv);
    g_pub = per_sample_gradients(model, pub);
  }
  return gsd_from_gradients(g_priv, g_pub, k);
}

double reconstruction_error(const Matrix& g_priv, const Subspace& v_pub) {
  require(g_priv.cols() == v_pub.ambient_dim, Status::kDimMismatch,
          "reconstruction_error: dimensions disagree");
  const Matrix w = matmul(g_priv, v_pub.basis);
  const Matrix residual = g_priv - matmul(w, transpose(v_pub.basis));
  return spectral_norm(residual);
}

double reconstruction_bound(double s1, double s_k_plus_1,
                            double distance_raw) {
  return std::sqrt(2.0) * s1 * distance_raw + s_k_plus_1;
}

TrajectoryReport gsd_trajectory(const Batch& private_train,
                                const std::vector<Batch>& publics,
                                const ModelParams& model0, std::size_t k,
                                const SgdConfig& sgd) {
  require(!publics.empty(), Status::kInvalidArgument,
          "gsd_trajectory: need at least one public dataset");
  require(sgd.steps >= 1, Status::kInvalidArgument,
          "gsd_trajectory: need at least one step");
  validate_batch(model0.spec, private_train);

  ModelParams model = model0;
  TrajectoryReport out;
  out.steps.reserve(sgd.steps);
  std::vector<std::size_t> baseline;
  std::size_t agree = 0;
  for (std::size_t t = 0; t < sgd.steps; ++t) {
    Rng rng(derive_seed(sgd.seed, kTagMinibatch, t));
    const auto idx = sample_without_replacement(private_train.size(),
                                                sgd.batch_size, rng);
    const Batch mini = take_rows(private_train, idx);

    TrajectoryStep step;
    step.iteration = t;
    step.reports.reserve(publics.size());
    for (const Batch& pub : publics)
      step.reports.push_back(gsd(mini, pub, model, k));
    const auto rank = ranking_of(step.reports);
    if (t == 0) baseline = rank;
    if (rank == baseline) ++agree;
    out.steps.push_back(std::move(step));

    // Plain SGD update with the mean minibatch gradient.
    const Matrix g = per_sample_gradients(model, mini);
    const double inv_m = 1.0 / static_cast<double>(g.rows());
    for (std::size_t j = 0; j < g.cols(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < g.rows(); ++i) s += g(i, j);
      model.theta[j] -= sgd.learning_rate * s * inv_m;
    }
  }
  out.order_agreement =
      static_cast<double>(agree) / static_cast<double>(sgd.steps);
  return out;
}

std::vector<RankedPublic> rank_publics(
    const std::vector<std::pair<std::string, GsdReport>>& reports) {
  require(!reports.empty(), Status::kInvalidArgument,
          "rank_publics: empty input");
  std::vector<RankedPublic> out;
  out.reserve(reports.size());
  for (const auto& [name, report] : reports)
    out.push_back({name, report.distance_raw, report.distance_normalized});
  std::sort(out.begin(), out.end(), [](const RankedPublic& a, const RankedPublic& b) {
    if (a.distance_raw != b.distance_raw) return a.distance_raw < b.distance_raw;
    return a.name < b.name;
  });
  return out;
}

}  // namespace gsdlab
