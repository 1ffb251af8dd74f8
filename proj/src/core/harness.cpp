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

#include "core/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace gsdlab {

namespace {

using nlohmann::json;

constexpr std::uint64_t kTagModel = 0x6d6f64656cULL;
constexpr std::uint64_t kTagShift = 0x7368696674ULL;
constexpr std::uint64_t kTagGep = 0x676570ULL;
constexpr std::uint64_t kTagTrajectory = 0x7472616aULL;
constexpr std::uint64_t kTagTask = 0x7461736bULL;
constexpr std::uint64_t kTagInstance = 0x696e7374ULL;
constexpr std::uint64_t kTagDraw = 0x64726177ULL;
constexpr std::uint64_t kTagTrial = 0x7472696cULL;

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

Batch head_rows(const Batch& b, std::size_t count) {
  count = std::min(count, b.size());
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  return take_rows(b, idx);
}

std::string shift_kind_name(ShiftKind k) {
  switch (k) {
    case ShiftKind::kRotation: return "rotation";
    case ShiftKind::kLabelFlip: return "label-flip";
    case ShiftKind::kFeatureMask: return "feature-mask";
  }
  return "unknown";
}

json shift_to_json(const ShiftSpec& s) {
  json j;
  j["kind"] = shift_kind_name(s.kind);
  j["magnitude"] = s.magnitude;
  return j;
}

// Indices of cfg.shifts sorted by (kind, magnitude); aggregates are emitted
// in this order so shuffling the input list does not change them.
std::vector<std::size_t> canonical_shift_order(
    const std::vector<ShiftSpec>& shifts) {
  std::vector<std::size_t> order(shifts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const std::string ka = shift_kind_name(shifts[a].kind);
    const std::string kb = shift_kind_name(shifts[b].kind);
    if (ka != kb) return ka < kb;
    return shifts[a].magnitude < shifts[b].magnitude;
  });
  return order;
}

json base_report(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = 1;
  j["experiment"] = experiment_kind_name(cfg.kind);
  j["config"] = experiment_config_to_json(cfg);
  j["warnings"] = json::array();
  return j;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

// Rescales features (jointly over the given batches) so that the longest
// [x; 1] vector has length exactly 2; a zero-weight logistic model then
// produces gradient rows of norm at most 1.
void rescale_for_unit_rows(std::vector<Batch*> batches) {
  double max_norm = 0.0;
  for (Batch* b : batches) {
    for (std::size_t i = 0; i < b->features.rows(); ++i) {
      const double n2 = dot(b->features.row(i), b->features.row(i)) + 1.0;
      max_norm = std::max(max_norm, std::sqrt(n2));
    }
  }
  const double factor = 2.0 / max_norm;
  for (Batch* b : batches)
    for (double& v : b->features.data()) v *= factor;
}

ModelParams zero_model(const ModelSpec& spec) {
  ModelParams m;
  m.spec = spec;
  m.theta.assign(spec.param_count(), 0.0);
  return m;
}

}  // namespace

const char* experiment_kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kMonotonicity: return "monotonicity";
    case ExperimentKind::kOrderingStability: return "ordering-stability";
    case ExperimentKind::kLemma1Audit: return "lemma1-audit";
    case ExperimentKind::kSpectrum: return "spectrum";
    case ExperimentKind::kDppcaUtility: return "dppca-utility";
    case ExperimentKind::kDpgsdCloseness: return "dpgsd-closeness";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  require(!seeds.empty(), Status::kInvalidArgument,
          "experiment: need at least one seed");
  if (kind != ExperimentKind::kDppcaUtility) {
    task.validate();
    model.validate();
  }
  switch (kind) {
    case ExperimentKind::kMonotonicity:
      require(!shifts.empty(), Status::kInvalidArgument,
              "monotonicity: need at least one shift");
      break;
    case ExperimentKind::kOrderingStability:
      require(shifts.size() >= 2, Status::kInvalidArgument,
              "ordering-stability: need at least two public datasets");
      require(sgd.steps >= 1, Status::kInvalidArgument,
              "ordering-stability: need at least one SGD step");
      break;
    case ExperimentKind::kLemma1Audit:
      require(instances >= 1, Status::kInvalidArgument,
              "lemma1-audit: need at least one instance");
      break;
    case ExperimentKind::kSpectrum:
      require(energy_k >= 1, Status::kInvalidArgument,
              "spectrum: energy_k must be positive");
      require(checkpoint_every >= 1, Status::kInvalidArgument,
              "spectrum: checkpoint_every must be positive");
      break;
    case ExperimentKind::kDppcaUtility: {
      require(!m_grid.empty(), Status::kInvalidArgument,
              "dppca-utility: empty m grid");
      require(std::is_sorted(m_grid.begin(), m_grid.end()),
              Status::kInvalidArgument, "dppca-utility: m grid must ascend");
      require(ambient_dim >= 2, Status::kInvalidArgument,
              "dppca-utility: ambient dimension too small");
      require(m_grid.front() >= ambient_dim, Status::kInvalidArgument,
              "dppca-utility: need m >= ambient dimension");
      require(eigengap > 0.0 && eigengap < 1.0, Status::kInvalidArgument,
              "dppca-utility: eigengap must lie in (0, 1)");
      break;
    }
    case ExperimentKind::kDpgsdCloseness:
      close.validate();
      require(trials >= 1, Status::kInvalidArgument,
              "dpgsd-closeness: need at least one trial");
      require(probe_samples >= 10, Status::kInvalidArgument,
              "dpgsd-closeness: probe too small");
      break;
  }
}

ExperimentReport run_monotonicity(const ExperimentConfig& cfg) {
  cfg.validate();
  Timer timer;
  const std::size_t ns = cfg.seeds.size();
  const std::size_t nshift = cfg.shifts.size();
  std::vector<std::vector<double>> gsd_vals(nshift, std::vector<double>(ns));
  std::vector<std::vector<double>> acc_vals(nshift, std::vector<double>(ns));

  parallel_for(ns, [&](std::size_t si) {
    const std::uint64_t s = cfg.seeds[si];
    TaskSpec ts = cfg.task;
    ts.seed = derive_seed(cfg.task.seed, derive_seed(kTagTask, s));
    const Dataset ds = make_task(ts);
    const ModelParams model = init_model(cfg.model, derive_seed(s, kTagModel));
    const Batch priv = head_rows(ds.train, cfg.gsd_batch);
    for (std::size_t j = 0; j < nshift; ++j) {
      const Dataset pub =
          make_shifted_public(ds, cfg.shifts[j], derive_seed(s, kTagShift, j));
      gsd_vals[j][si] = gsd(priv, pub.train, model, cfg.gsd_k).distance_raw;
      GepConfig gc = cfg.gep;
      gc.seed = derive_seed(s, kTagGep, j);
      const GepResult res =
          gep_train(ds.train, ds.test, pub.train, model, gc, cfg.privacy);
      acc_vals[j][si] = cfg.use_averaged_model ? res.averaged_test.accuracy
                                               : res.final_test.accuracy;
    }
  });

  json j = base_report(cfg);
  json per_seed = json::array();
  std::string csv = "seed,shift,gsd_raw,accuracy\n";
  for (std::size_t si = 0; si < ns; ++si) {
    json rec;
    rec["seed"] = cfg.seeds[si];
    json results = json::array();
    for (std::size_t jx = 0; jx < nshift; ++jx) {
      json r;
      r["shift"] = cfg.shifts[jx].name();
      r["gsd_raw"] = gsd_vals[jx][si];
      r["accuracy"] = acc_vals[jx][si];
      results.push_back(r);
      csv += std::to_string(cfg.seeds[si]) + "," + cfg.shifts[jx].name() + "," +
             format_double(gsd_vals[jx][si]) + "," +
             format_double(acc_vals[jx][si]) + "\n";
    }
    rec["results"] = results;
    per_seed.push_back(rec);
  }
  j["per_seed"] = per_seed;

  const auto order = canonical_shift_order(cfg.shifts);
  std::vector<double> med_gsd, med_acc;
  json agg_shifts = json::array();
  for (std::size_t idx : order) {
    const double mg = median(gsd_vals[idx]);
    const double ma = median(acc_vals[idx]);
    med_gsd.push_back(mg);
    med_acc.push_back(ma);
    json a = shift_to_json(cfg.shifts[idx]);
    a["shift"] = cfg.shifts[idx].name();
    a["median_gsd_raw"] = mg;
    a["median_accuracy"] = ma;
    agg_shifts.push_back(a);
  }
  json agg;
  agg["per_shift"] = agg_shifts;
  bool pass = true;
  if (nshift >= 2) {
    std::vector<double> neg_gsd;
    for (double g : med_gsd) neg_gsd.push_back(-g);
    const double rho = spearman(neg_gsd, med_acc);
    agg["spearman_neg_gsd_accuracy"] = rho;
    bool gsd_up = true, acc_down = true;
    for (std::size_t i = 1; i < med_gsd.size(); ++i) {
      gsd_up = gsd_up && med_gsd[i] > med_gsd[i - 1];
      acc_down = acc_down && med_acc[i] < med_acc[i - 1];
    }
    agg["gsd_strictly_increasing"] = gsd_up;
    agg["accuracy_strictly_decreasing"] = acc_down;
    pass = gsd_up && acc_down && std::abs(rho - 1.0) < 1e-12;
  } else {
    agg["spearman_neg_gsd_accuracy"] = nullptr;
    j["warnings"].push_back(
        "single shift: rank correlation is undefined; nothing to compare");
  }
  j["aggregates"] = agg;
  j["thresholds"] = {{"spearman", 1.0},
                     {"gsd_strictly_increasing", true},
                     {"accuracy_strictly_decreasing", true}};
  j["pass"] = pass;
  j["wall_clock_seconds"] = timer.seconds();

  ExperimentReport out;
  out.doc = std::move(j);
  out.passed = pass;
  out.side_table_csv = std::move(csv);
  return out;
}

ExperimentReport run_ordering_stability(const ExperimentConfig& cfg) {
  cfg.validate();
  Timer timer;
  const std::size_t ns = cfg.seeds.size();
  std::vector<double> agreements(ns);
  std::vector<std::vector<double>> step0(ns);
  std::vector<std::string> csv_parts(ns);

  parallel_for(ns, [&](std::size_t si) {
    const std::uint64_t s = cfg.seeds[si];
    TaskSpec ts = cfg.task;
    ts.seed = derive_seed(cfg.task.seed, derive_seed(kTagTask, s));
    const Dataset ds = make_task(ts);
    const ModelParams model = init_model(cfg.model, derive_seed(s, kTagModel));
    std::vector<Batch> publics;
    for (std::size_t jx = 0; jx < cfg.shifts.size(); ++jx)
      publics.push_back(
          make_shifted_public(ds, cfg.shifts[jx], derive_seed(s, kTagShift, jx))
              .train);
    SgdConfig sgd = cfg.sgd;
    sgd.seed = derive_seed(s, kTagTrajectory);
    const TrajectoryReport traj =
        gsd_trajectory(ds.train, publics, model, cfg.gsd_k, sgd);
    agreements[si] = traj.order_agreement;
    for (const GsdReport& r : traj.steps.front().reports)
      step0[si].push_back(r.distance_raw);
    std::string csv;
    for (const TrajectoryStep& st : traj.steps)
      for (std::size_t pi = 0; pi < st.reports.size(); ++pi)
        csv += std::to_string(s) + "," + std::to_string(st.iteration) + "," +
               cfg.shifts[pi].name() + "," +
               format_double(st.reports[pi].distance_raw) + "\n";
    csv_parts[si] = std::move(csv);
  });

  json j = base_report(cfg);
  json per_seed = json::array();
  for (std::size_t si = 0; si < ns; ++si) {
    json rec;
    rec["seed"] = cfg.seeds[si];
    rec["order_agreement"] = agreements[si];
    rec["step0_distances"] = step0[si];
    per_seed.push_back(rec);
  }
  j["per_seed"] = per_seed;
  const double med = median(agreements);
  j["aggregates"] = {{"median_order_agreement", med}};
  j["thresholds"] = {{"median_order_agreement_min", 0.9}};
  const bool pass = med >= 0.9;
  j["pass"] = pass;
  j["wall_clock_seconds"] = timer.seconds();

  ExperimentReport out;
  out.doc = std::move(j);
  out.passed = pass;
  out.side_table_csv = "seed,step,shift,distance_raw\n";
  for (const std::string& part : csv_parts) out.side_table_csv += part;
  return out;
}

ExperimentReport run_lemma1_audit(const ExperimentConfig& cfg) {
  cfg.validate();
  Timer timer;
  const std::uint64_t base = cfg.seeds.front();

  std::vector<double> violations(cfg.instances);
  parallel_for(cfg.instances, [&](std::size_t i) {
    Rng rng(derive_seed(base, kTagInstance, i));
    const std::size_t m = 4 + rng.below(29);
    const std::size_t p = 4 + rng.below(29);
    const std::size_t r = std::min(m, p);
    const std::size_t k = 1 + rng.below(r);
    const Matrix g = gaussian_matrix(m, p, rng);
    const Subspace v = orthonormalize(gaussian_matrix(p, k, rng));
    const double rec = reconstruction_error(g, v);
    const SvdResult sv = top_k_svd(g, k);
    const std::vector<double> all = singular_values(g);
    const double s1 = all[0];
    const double sk1 = k < all.size() ? all[k] : 0.0;
    const double dist = projection_metric(sv.right, v);
    violations[i] = rec - reconstruction_bound(s1, sk1, dist);
  });
  double max_violation =
      *std::max_element(violations.begin(), violations.end());

  // Additionally audit every trace of a real GEP run per seed.
  json gep_audits = json::array();
  for (const std::uint64_t s : cfg.seeds) {
    TaskSpec ts = cfg.task;
    ts.seed = derive_seed(cfg.task.seed, derive_seed(kTagTask, s));
    const Dataset ds = make_task(ts);
    const ModelParams model = init_model(cfg.model, derive_seed(s, kTagModel));
    const ShiftSpec shift = cfg.shifts.empty() ? ShiftSpec{} : cfg.shifts.front();
    const Dataset pub = make_shifted_public(ds, shift, derive_seed(s, kTagShift));
    GepConfig gc = cfg.gep;
    gc.seed = derive_seed(s, kTagGep);
    const GepResult res =
        gep_train(ds.train, ds.test, pub.train, model, gc, cfg.privacy);
    double worst = -1e300;
    for (const GepStepTrace& t : res.trace)
      worst = std::max(worst, t.reconstruction_error - t.lemma1_bound);
    max_violation = std::max(max_violation, worst);
    json a;
    a["seed"] = s;
    a["steps"] = res.trace.size();
    a["max_violation"] = worst;
    gep_audits.push_back(a);
  }

  json j = base_report(cfg);
  j["per_seed"] = gep_audits;
  j["aggregates"] = {{"random_instances", cfg.instances},
                     {"max_violation", max_violation}};
  j["thresholds"] = {{"max_violation", 1e-8}};
  const bool pass = max_violation <= 1e-8;
  j["pass"] = pass;
  j["wall_clock_seconds"] = timer.seconds();

  ExperimentReport out;
  out.doc = std::move(j);
  out.passed = pass;
  out.side_table_csv = "instance,violation\n";
  for (std::size_t i = 0; i < violations.size(); ++i)
    out.side_table_csv +=
        std::to_string(i) + "," + format_double(violations[i]) + "\n";
  return out;
}

ExperimentReport run_spectrum(const ExperimentConfig& cfg) {
  cfg.validate();
  Timer timer;
  const std::size_t ns = cfg.seeds.size();
  std::vector<double> min_ratio(ns);
  std::vector<std::string> csv_parts(ns);
  std::vector<json> profiles(ns);

  parallel_for(ns, [&](std::size_t si) {
    const std::uint64_t s = cfg.seeds[si];
    TaskSpec ts = cfg.task;
    ts.seed = derive_seed(cfg.task.seed, derive_seed(kTagTask, s));
    const Dataset ds = make_task(ts);
    ModelParams model = init_model(cfg.model, derive_seed(s, kTagModel));
    const Batch eval_batch = head_rows(ds.train, cfg.gsd_batch);

    double worst = 1.0;
    json prof = json::array();
    std::string csv;
    auto checkpoint = [&](std::size_t t) {
      const Matrix g = per_sample_gradients(model, eval_batch);
      const std::vector<double> sv = singular_values(g);
      double total = 0.0, top = 0.0;
      for (std::size_t i = 0; i < sv.size(); ++i) {
        total += sv[i] * sv[i];
        if (i < cfg.energy_k) top += sv[i] * sv[i];
      }
      const double ratio = total > 0.0 ? top / total : 1.0;
      worst = std::min(worst, ratio);
      json e;
      e["step"] = t;
      e["energy_ratio"] = ratio;
      e["singular_values"] = sv;
      prof.push_back(e);
      for (std::size_t i = 0; i < sv.size(); ++i)
        csv += std::to_string(s) + "," + std::to_string(t) + "," +
               std::to_string(i) + "," + format_double(sv[i]) + "\n";
    };

    for (std::size_t t = 0; t < cfg.sgd.steps; ++t) {
      if (t % cfg.checkpoint_every == 0) checkpoint(t);
      Rng rng(derive_seed(s, kTagTrajectory, t));
      const auto idx = sample_without_replacement(ds.train.size(),
                                                  cfg.sgd.batch_size, rng);
      const Batch mini = take_rows(ds.train, idx);
      const Matrix g = per_sample_gradients(model, mini);
      const double inv_m = 1.0 / static_cast<double>(g.rows());
      for (std::size_t col = 0; col < g.cols(); ++col) {
        double sum = 0.0;
        for (std::size_t row = 0; row < g.rows(); ++row) sum += g(row, col);
        model.theta[col] -= cfg.sgd.learning_rate * sum * inv_m;
      }
    }
    checkpoint(cfg.sgd.steps);
    min_ratio[si] = worst;
    profiles[si] = std::move(prof);
    csv_parts[si] = std::move(csv);
  });

  json j = base_report(cfg);
  json per_seed = json::array();
  for (std::size_t si = 0; si < ns; ++si) {
    json rec;
    rec["seed"] = cfg.seeds[si];
    rec["min_energy_ratio"] = min_ratio[si];
    rec["checkpoints"] = profiles[si];
    per_seed.push_back(rec);
  }
  j["per_seed"] = per_seed;
  const double med = median(min_ratio);
  j["aggregates"] = {{"median_min_energy_ratio", med},
                     {"energy_k", cfg.energy_k}};
  j["thresholds"] = {{"median_min_energy_ratio_min", 0.9}};
  const bool pass = med >= 0.9;
  j["pass"] = pass;
  j["wall_clock_seconds"] = timer.seconds();

  ExperimentReport out;
  out.doc = std::move(j);
  out.passed = pass;
  out.side_table_csv = "seed,step,singular_index,value\n";
  for (const std::string& part : csv_parts) out.side_table_csv += part;
  return out;
}

ExperimentReport run_dppca_utility(const ExperimentConfig& cfg) {
  cfg.validate();
  Timer timer;
  const std::size_t p = cfg.ambient_dim;
  std::vector<double> lambda(p);
  lambda[0] = 1.0;
  const double lam2 = 1.0 - cfg.eigengap;
  for (std::size_t i = 1; i < p; ++i)
    lambda[i] = lam2 * static_cast<double>(p - i) / static_cast<double>(p - 1);

  const std::size_t ns = cfg.seeds.size();
  const std::size_t total = cfg.m_grid.size() * ns;
  std::vector<double> overlap(total);
  parallel_for(total, [&](std::size_t idx) {
    const std::size_t mi = idx / ns;
    const std::size_t si = idx % ns;
    const std::size_t m = cfg.m_grid[mi];
    Rng rng(derive_seed(cfg.seeds[si], kTagDraw, m));
    const Subspace u = orthonormalize(gaussian_matrix(m, p, rng));
    const Subspace q = orthonormalize(gaussian_matrix(p, p, rng));
    // G = sqrt(m)·U·diag(sqrt(lambda))·Qᵀ, so (1/m)·GᵀG has exactly the
    // prescribed spectrum with top eigenvector Q·e1.
    Matrix scaled = u.basis;
    for (std::size_t c = 0; c < p; ++c) {
      const double f = std::sqrt(static_cast<double>(m) * lambda[c]);
      for (std::size_t r = 0; r < m; ++r) scaled(r, c) *= f;
    }
    const Matrix g = matmul(scaled, transpose(q.basis));
    const Subspace v = dp_pca(g, cfg.privacy.epsilon, cfg.privacy.clip_norm,
                              derive_seed(cfg.seeds[si], kTagTrial, m));
    double d = 0.0;
    for (std::size_t r = 0; r < p; ++r) d += v.basis(r, 0) * q.basis(r, 0);
    overlap[idx] = std::abs(d);
  });

  json j = base_report(cfg);
  json per_seed = json::array();
  std::string csv = "m,seed,overlap\n";
  for (std::size_t mi = 0; mi < cfg.m_grid.size(); ++mi)
    for (std::size_t si = 0; si < ns; ++si) {
      json rec;
      rec["m"] = cfg.m_grid[mi];
      rec["seed"] = cfg.seeds[si];
      rec["overlap"] = overlap[mi * ns + si];
      per_seed.push_back(rec);
      csv += std::to_string(cfg.m_grid[mi]) + "," +
             std::to_string(cfg.seeds[si]) + "," +
             format_double(overlap[mi * ns + si]) + "\n";
    }
  j["per_seed"] = per_seed;

  json agg = json::array();
  std::vector<double> medians;
  for (std::size_t mi = 0; mi < cfg.m_grid.size(); ++mi) {
    std::vector<double> vals(overlap.begin() + mi * ns,
                             overlap.begin() + (mi + 1) * ns);
    const double med = median(vals);
    medians.push_back(med);
    json a;
    a["m"] = cfg.m_grid[mi];
    a["median_overlap"] = med;
    agg.push_back(a);
  }
  bool nondecreasing = true;
  for (std::size_t i = 1; i < medians.size(); ++i)
    nondecreasing = nondecreasing && medians[i] >= medians[i - 1];
  const bool pass = nondecreasing && medians.back() >= 0.9;
  j["aggregates"] = {{"per_m", agg},
                     {"medians_nondecreasing", nondecreasing},
                     {"final_median_overlap", medians.back()}};
  j["thresholds"] = {{"final_median_overlap_min", 0.9},
                     {"medians_nondecreasing", true}};
  j["pass"] = pass;
  j["wall_clock_seconds"] = timer.seconds();

  ExperimentReport out;
  out.doc = std::move(j);
  out.passed = pass;
  out.side_table_csv = std::move(csv);
  return out;
}

ExperimentReport run_dpgsd_closeness(const ExperimentConfig& cfg) {
  cfg.validate();
  Timer timer;
  const ModelParams model = zero_model(cfg.model);
  const std::size_t p = cfg.model.param_count();

  // Probe phase: estimate lambda1 and the eigengap of the clipped gradient
  // second-moment matrix on a large sample, then size m from the bound.
  TaskSpec probe_spec = cfg.task;
  probe_spec.n_train = cfg.probe_samples;
  probe_spec.n_test = 1;
  probe_spec.n_public = 1;
  probe_spec.seed = derive_seed(cfg.task.seed, 0x70726f6265ULL);
  Dataset probe = make_task(probe_spec);
  rescale_for_unit_rows({&probe.train});
  const Matrix g_probe = clip_rows(
      per_sample_gradients(model, probe.train), cfg.privacy.clip_norm);
  Matrix a = gram(g_probe);
  const double inv_m = 1.0 / static_cast<double>(g_probe.rows());
  for (double& v : a.data()) v *= inv_m;
  const SymmetricEigen eig = symmetric_eigen(a);
  DpPcaDiagnostics diag;
  diag.top_eigenvalue = eig.values[0];
  diag.eigengap = eig.values[0] - eig.values[1];
  diag.ambient_dim = p;
  diag.samples = g_probe.rows();

  const double m_star = required_sample_size(diag, cfg.close,
                                             cfg.privacy.epsilon,
                                             cfg.privacy.clip_norm);
  const std::size_t m_used = static_cast<std::size_t>(std::ceil(m_star));
  require(m_used <= cfg.max_m, Status::kInvalidArgument,
          "dpgsd-closeness: required sample size " + std::to_string(m_used) +
              " exceeds max_m; adjust the task so the eigengap grows");

  std::vector<double> exact(cfg.trials), noisy(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t i) {
    TaskSpec ts = cfg.task;
    ts.n_train = m_used;
    ts.n_public = m_used;
    ts.n_test = 1;
    ts.seed = derive_seed(cfg.task.seed, kTagTrial, i);
    Dataset ds = make_task(ts);
    Batch priv = ds.train;
    Batch pub = cfg.shifts.empty()
                    ? ds.pool
                    : make_shifted_public(ds, cfg.shifts.front(),
                                          derive_seed(ts.seed, kTagShift))
                          .train;
    rescale_for_unit_rows({&priv, &pub});
    exact[i] = gsd(priv, pub, model, 1).distance_raw;
    PrivacyParams params = cfg.privacy;
    noisy[i] = dp_gsd(priv, pub, model, params,
                      derive_seed(cfg.seeds.front(), kTagDraw, i))
                   .report.distance_raw;
  });

  std::size_t covered = 0;
  std::string csv = "trial,exact,private,abs_error\n";
  json trials_json = json::array();
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    const double err = std::abs(noisy[i] - exact[i]);
    if (err <= cfg.close.rho) ++covered;
    json t;
    t["trial"] = i;
    t["exact"] = exact[i];
    t["private"] = noisy[i];
    t["abs_error"] = err;
    trials_json.push_back(t);
    csv += std::to_string(i) + "," + format_double(exact[i]) + "," +
           format_double(noisy[i]) + "," + format_double(err) + "\n";
  }
  const double coverage =
      static_cast<double>(covered) / static_cast<double>(cfg.trials);
  const double needed = 1.0 - cfg.close.eta - 0.05;  // Monte-Carlo slack

  json j = base_report(cfg);
  j["per_seed"] = trials_json;
  j["aggregates"] = {{"coverage", coverage},
                     {"m_star", m_star},
                     {"m_used", m_used},
                     {"probe_lambda1", diag.top_eigenvalue},
                     {"probe_eigengap", diag.eigengap}};
  j["thresholds"] = {{"coverage_min", needed}};
  const bool pass = coverage >= needed;
  j["pass"] = pass;
  j["wall_clock_seconds"] = timer.seconds();

  ExperimentReport out;
  out.doc = std::move(j);
  out.passed = pass;
  out.side_table_csv = std::move(csv);
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  ExperimentReport report;
  switch (cfg.kind) {
    case ExperimentKind::kMonotonicity: report = run_monotonicity(cfg); break;
    case ExperimentKind::kOrderingStability:
      report = run_ordering_stability(cfg);
      break;
    case ExperimentKind::kLemma1Audit: report = run_lemma1_audit(cfg); break;
    case ExperimentKind::kSpectrum: report = run_spectrum(cfg); break;
    case ExperimentKind::kDppcaUtility: report = run_dppca_utility(cfg); break;
    case ExperimentKind::kDpgsdCloseness:
      report = run_dpgsd_closeness(cfg);
      break;
  }
  if (!cfg.output.empty()) {
    write_text_file(cfg.output, report.to_json_text());
    std::string side = cfg.output;
    const std::string suffix = ".json";
    if (side.size() > suffix.size() &&
        side.compare(side.size() - suffix.size(), suffix.size(), suffix) == 0)
      side.resize(side.size() - suffix.size());
    side += "_table.csv";
    write_text_file(side, report.side_table_csv);
  }
  return report;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size() && a.size() >= 2, Status::kInvalidArgument,
          "spearman: need two same-length vectors of at least two entries");
  auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
      std::size_t jx = i;
      while (jx + 1 < n && v[order[jx + 1]] == v[order[i]]) ++jx;
      const double avg = 0.5 * static_cast<double>(i + jx) + 1.0;
      for (std::size_t t = i; t <= jx; ++t) r[order[t]] = avg;
      i = jx + 1;
    }
    return r;
  };
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= static_cast<double>(ra.size());
  mb /= static_cast<double>(rb.size());
  double num = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  require(va > 0.0 && vb > 0.0, Status::kInvalidArgument,
          "spearman: a vector is constant; correlation undefined");
  return num / std::sqrt(va * vb);
}

double median(std::vector<double> v) {
  require(!v.empty(), Status::kInvalidArgument, "median: empty vector");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TaskSpec task_spec_from_json(const json& j) {
  TaskSpec t;
  if (j.contains("input_dim")) t.input_dim = j["input_dim"].get<std::size_t>();
  if (j.contains("num_classes")) t.num_classes = j["num_classes"].get<std::size_t>();
  if (j.contains("n_train")) t.n_train = j["n_train"].get<std::size_t>();
  if (j.contains("n_test")) t.n_test = j["n_test"].get<std::size_t>();
  if (j.contains("n_public")) t.n_public = j["n_public"].get<std::size_t>();
  if (j.contains("margin")) t.margin = j["margin"].get<double>();
  if (j.contains("noise")) t.noise = j["noise"].get<double>();
  if (j.contains("seed")) t.seed = j["seed"].get<std::uint64_t>();
  return t;
}

json task_spec_to_json(const TaskSpec& t) {
  json j;
  j["input_dim"] = t.input_dim;
  j["num_classes"] = t.num_classes;
  j["n_train"] = t.n_train;
  j["n_test"] = t.n_test;
  j["n_public"] = t.n_public;
  j["margin"] = t.margin;
  j["noise"] = t.noise;
  j["seed"] = t.seed;
  return j;
}

ShiftSpec shift_spec_from_json(const json& j) {
  ShiftSpec s;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "rotation") s.kind = ShiftKind::kRotation;
  else if (kind == "label-flip") s.kind = ShiftKind::kLabelFlip;
  else if (kind == "feature-mask") s.kind = ShiftKind::kFeatureMask;
  else fail(Status::kParseError, "shift: unknown kind '" + kind + "'");
  s.magnitude = j.at("magnitude").get<double>();
  s.validate();
  return s;
}

ModelSpec model_spec_from_json(const json& j) {
  return model_spec_from_json_text(j.dump());
}

GepConfig gep_config_from_json(const json& j) {
  GepConfig g;
  if (j.contains("k")) g.k = j["k"].get<std::size_t>();
  if (j.contains("power_iterations"))
    g.power_iterations = j["power_iterations"].get<std::size_t>();
  if (j.contains("learning_rate")) g.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("iterations")) g.iterations = j["iterations"].get<std::size_t>();
  if (j.contains("clip_embedding")) g.clip_embedding = j["clip_embedding"].get<double>();
  if (j.contains("clip_residual")) g.clip_residual = j["clip_residual"].get<double>();
  if (j.contains("sigma_embedding") && !j["sigma_embedding"].is_null())
    g.sigma_embedding = j["sigma_embedding"].get<double>();
  if (j.contains("sigma_residual") && !j["sigma_residual"].is_null())
    g.sigma_residual = j["sigma_residual"].get<double>();
  if (j.contains("batch_size")) g.batch_size = j["batch_size"].get<std::size_t>();
  if (j.contains("seed")) g.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("allow_nonconvex")) g.allow_nonconvex = j["allow_nonconvex"].get<bool>();
  return g;
}

json gep_config_to_json(const GepConfig& g) {
  json j;
  j["k"] = g.k;
  j["power_iterations"] = g.power_iterations;
  j["learning_rate"] = g.learning_rate;
  j["iterations"] = g.iterations;
  j["clip_embedding"] = g.clip_embedding;
  j["clip_residual"] = g.clip_residual;
  if (g.sigma_embedding < 0.0) j["sigma_embedding"] = nullptr;
  else j["sigma_embedding"] = g.sigma_embedding;
  if (g.sigma_residual < 0.0) j["sigma_residual"] = nullptr;
  else j["sigma_residual"] = g.sigma_residual;
  j["batch_size"] = g.batch_size;
  j["seed"] = g.seed;
  j["allow_nonconvex"] = g.allow_nonconvex;
  return j;
}

PrivacyParams privacy_params_from_json(const json& j) {
  PrivacyParams p;
  if (j.contains("epsilon")) p.epsilon = j["epsilon"].get<double>();
  if (j.contains("delta")) p.delta = j["delta"].get<double>();
  if (j.contains("clip_norm")) p.clip_norm = j["clip_norm"].get<double>();
  if (j.contains("iterations")) p.iterations = j["iterations"].get<std::size_t>();
  return p;
}

json privacy_params_to_json(const PrivacyParams& p) {
  json j;
  j["epsilon"] = p.epsilon;
  j["delta"] = p.delta;
  j["clip_norm"] = p.clip_norm;
  j["iterations"] = p.iterations;
  return j;
}

SgdConfig sgd_config_from_json(const json& j) {
  SgdConfig s;
  if (j.contains("steps")) s.steps = j["steps"].get<std::size_t>();
  if (j.contains("batch_size")) s.batch_size = j["batch_size"].get<std::size_t>();
  if (j.contains("learning_rate")) s.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  return s;
}

ExperimentConfig experiment_config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Status::kParseError, std::string("experiment config: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    const std::string kind = j.at("experiment").get<std::string>();
    if (kind == "monotonicity") cfg.kind = ExperimentKind::kMonotonicity;
    else if (kind == "ordering-stability") cfg.kind = ExperimentKind::kOrderingStability;
    else if (kind == "lemma1-audit") cfg.kind = ExperimentKind::kLemma1Audit;
    else if (kind == "spectrum") cfg.kind = ExperimentKind::kSpectrum;
    else if (kind == "dppca-utility") cfg.kind = ExperimentKind::kDppcaUtility;
    else if (kind == "dpgsd-closeness") cfg.kind = ExperimentKind::kDpgsdCloseness;
    else fail(Status::kParseError, "experiment config: unknown kind '" + kind + "'");
    if (j.contains("description")) cfg.description = j["description"].get<std::string>();
    if (j.contains("task")) cfg.task = task_spec_from_json(j["task"]);
    if (j.contains("shifts"))
      for (const json& js : j["shifts"]) cfg.shifts.push_back(shift_spec_from_json(js));
    if (j.contains("model")) cfg.model = model_spec_from_json(j["model"]);
    if (j.contains("gep")) cfg.gep = gep_config_from_json(j["gep"]);
    if (j.contains("privacy")) cfg.privacy = privacy_params_from_json(j["privacy"]);
    if (j.contains("sgd")) cfg.sgd = sgd_config_from_json(j["sgd"]);
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("gsd_k")) cfg.gsd_k = j["gsd_k"].get<std::size_t>();
    if (j.contains("gsd_batch")) cfg.gsd_batch = j["gsd_batch"].get<std::size_t>();
    if (j.contains("use_averaged_model"))
      cfg.use_averaged_model = j["use_averaged_model"].get<bool>();
    if (j.contains("instances")) cfg.instances = j["instances"].get<std::size_t>();
    if (j.contains("energy_k")) cfg.energy_k = j["energy_k"].get<std::size_t>();
    if (j.contains("checkpoint_every"))
      cfg.checkpoint_every = j["checkpoint_every"].get<std::size_t>();
    if (j.contains("m_grid")) cfg.m_grid = j["m_grid"].get<std::vector<std::size_t>>();
    if (j.contains("ambient_dim")) cfg.ambient_dim = j["ambient_dim"].get<std::size_t>();
    if (j.contains("eigengap")) cfg.eigengap = j["eigengap"].get<double>();
    if (j.contains("rho")) cfg.close.rho = j["rho"].get<double>();
    if (j.contains("eta")) cfg.close.eta = j["eta"].get<double>();
    if (j.contains("trials")) cfg.trials = j["trials"].get<std::size_t>();
    if (j.contains("probe_samples"))
      cfg.probe_samples = j["probe_samples"].get<std::size_t>();
    if (j.contains("max_m")) cfg.max_m = j["max_m"].get<std::size_t>();
    if (j.contains("output")) cfg.output = j["output"].get<std::string>();
  } catch (const json::exception& e) {
    fail(Status::kParseError, std::string("experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = experiment_kind_name(cfg.kind);
  if (!cfg.description.empty()) j["description"] = cfg.description;
  j["task"] = task_spec_to_json(cfg.task);
  json shifts = json::array();
  for (const ShiftSpec& s : cfg.shifts) {
    json e;
    e["kind"] = s.kind == ShiftKind::kRotation      ? "rotation"
                : s.kind == ShiftKind::kLabelFlip   ? "label-flip"
                                                    : "feature-mask";
    e["magnitude"] = s.magnitude;
    shifts.push_back(e);
  }
  j["shifts"] = shifts;
  j["model"] = json::parse(model_spec_to_json_text(cfg.model));
  j["gep"] = gep_config_to_json(cfg.gep);
  j["privacy"] = privacy_params_to_json(cfg.privacy);
  j["sgd"] = {{"steps", cfg.sgd.steps},
              {"batch_size", cfg.sgd.batch_size},
              {"learning_rate", cfg.sgd.learning_rate},
              {"seed", cfg.sgd.seed}};
  j["seeds"] = cfg.seeds;
  j["gsd_k"] = cfg.gsd_k;
  j["gsd_batch"] = cfg.gsd_batch;
  j["use_averaged_model"] = cfg.use_averaged_model;
  switch (cfg.kind) {
    case ExperimentKind::kLemma1Audit:
      j["instances"] = cfg.instances;
      break;
    case ExperimentKind::kSpectrum:
      j["energy_k"] = cfg.energy_k;
      j["checkpoint_every"] = cfg.checkpoint_every;
      break;
    case ExperimentKind::kDppcaUtility:
      j["m_grid"] = cfg.m_grid;
      j["ambient_dim"] = cfg.ambient_dim;
      j["eigengap"] = cfg.eigengap;
      break;
    case ExperimentKind::kDpgsdCloseness:
      j["rho"] = cfg.close.rho;
      j["eta"] = cfg.close.eta;
      j["trials"] = cfg.trials;
      j["probe_samples"] = cfg.probe_samples;
      j["max_m"] = cfg.max_m;
      break;
    default:
      break;
  }
  return j;
}

}  // namespace gsdlab
