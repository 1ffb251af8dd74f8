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

#include "core/privacy.hpp"

#include <algorithm>
#include <cmath>

#include "core/rng.hpp"

namespace gsdlab {

namespace {

constexpr double kPi = 3.14159265358979323846264338;

double wrap_angle(double phi) {
  phi = std::fmod(phi, kTwoPi);
  return phi < 0.0 ? phi + kTwoPi : phi;
}

// One draw from the density on [0, 2pi) proportional to exp(c·cos²(phi)).
//
// c <= 2: plain rejection under a uniform envelope (acceptance >= e^-2).
// c > 2: the density concentrates at phi = 0 and pi; propose from truncated
// normals at the two modes with variance pi²/(8c) and accept with
// exp(c·(4/pi²)·d² - c·sin²(d)), valid because sin²(d) >= (2d/pi)² on
// [-pi/2, pi/2].
double sample_cos2_angle(double c, Rng& rng) {
  if (c < 0.0) return wrap_angle(sample_cos2_angle(-c, rng) + kPi / 2.0);
  if (c <= 2.0) {
    while (true) {
      const double phi = rng.uniform(0.0, kTwoPi);
      const double cs = std::cos(phi);
      if (std::log(rng.uniform01_pos()) <= c * (cs * cs - 1.0)) return phi;
    }
  }
  const double sd = kPi / std::sqrt(8.0 * c);
  while (true) {
    const double d = sd * rng.normal();
    if (std::abs(d) > kPi / 2.0) continue;
    const double sn = std::sin(d);
    const double log_acc = c * ((4.0 / (kPi * kPi)) * d * d - sn * sn);
    if (std::log(rng.uniform01_pos()) <= log_acc) {
      const double mode = rng.uniform01() < 0.5 ? 0.0 : kPi;
      return wrap_angle(mode + d);
    }
  }
}

// Coordinate-pair Gibbs sweep in the eigenbasis: the conditional law of the
// angle inside a coordinate 2-plane is exp((lam_i - lam_j)·r²·cos²(phi)).
void gibbs_sweeps(std::vector<double>& u, const std::vector<double>& lam,
                  std::size_t sweeps, Rng& rng) {
  const std::size_t p = u.size();
  for (std::size_t s = 0; s < sweeps; ++s) {
    for (std::size_t i = 0; i < p; ++i) {
      std::size_t j = rng.below(p - 1);
      if (j >= i) ++j;
      const double r2 = u[i] * u[i] + u[j] * u[j];
      if (r2 <= 0.0) continue;
      const double r = std::sqrt(r2);
      const double phi = sample_cos2_angle((lam[i] - lam[j]) * r2, rng);
      u[i] = r * std::cos(phi);
      u[j] = r * std::sin(phi);
    }
  }
  double nrm = 0.0;
  for (double x : u) nrm += x * x;
  nrm = std::sqrt(nrm);
  for (double& x : u) x /= nrm;
}

// Solves sum_i 1/(b + 2·beta_i) = 1 for b in (0, p]; beta_i >= 0 with
// min(beta) = 0, so the left side decreases from +inf to <= 1.
double solve_envelope_parameter(const std::vector<double>& beta) {
  const std::size_t p = beta.size();
  double lo = 1e-12, hi = static_cast<double>(p);
  auto f = [&](double b) {
    double s = 0.0;
    for (double bi : beta) s += 1.0 / (b + 2.0 * bi);
    return s;
  };
  while (f(lo) < 1.0) lo *= 0.5;  // paranoia; f(1e-12) >> 1 since beta_0 = 0
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 1.0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void PrivacyParams::validate() const {
  require(epsilon > 0.0, Status::kInvalidArgument,
          "privacy: epsilon must be positive");
  require(delta > 0.0 && delta < 1.0, Status::kInvalidArgument,
          "privacy: delta must lie in (0, 1)");
  require(clip_norm > 0.0, Status::kInvalidArgument,
          "privacy: clip norm must be positive");
  require(iterations >= 1, Status::kInvalidArgument,
          "privacy: iteration count must be positive");
}

void CloseApprox::validate() const {
  require(rho > 0.0 && rho < 1.0, Status::kInvalidArgument,
          "closeness: rho must lie in (0, 1)");
  require(eta > 0.0 && eta < 1.0, Status::kInvalidArgument,
          "closeness: eta must lie in (0, 1)");
}

Matrix clip_rows(const Matrix& g, double c) {
  require(c > 0.0, Status::kInvalidArgument, "clip_rows: c must be positive");
  Matrix out = g;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    const double nrm = row_norm(out, i);
    if (nrm > c) {
      const double f = c / nrm;
      for (double& v : out.row(i)) v *= f;
    }
  }
  return out;
}

std::vector<double> bingham_sample(const Matrix& a, std::uint64_t seed,
                                   const BinghamOptions& options) {
  require(a.rows() == a.cols(), Status::kDimMismatch,
          "bingham_sample: matrix must be square");
  require(a.all_finite(), Status::kNonFinite,
          "bingham_sample: non-finite entries");
  const std::size_t p = a.rows();
  require(p >= 1, Status::kEmptyMatrix, "bingham_sample: empty matrix");
  const double amax = max_abs(a);
  double asym = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j)
      asym = std::max(asym, std::abs(a(i, j) - a(j, i)));
  require(asym <= 1e-9 * std::max(amax, 1e-300), Status::kNonSymmetric,
          "bingham_sample: matrix is not symmetric");

  Matrix sym(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) sym(i, j) = 0.5 * (a(i, j) + a(j, i));
  const SymmetricEigen eig = symmetric_eigen(sym);

  // In the eigenbasis the density is exp(sum lam_i u_i²); shifting by
  // -lam_max turns it into exp(-uᵀB u) with B = diag(beta), beta_i >= 0,
  // beta_0 = 0.
  std::vector<double> beta(p);
  for (std::size_t i = 0; i < p; ++i) beta[i] = eig.values[0] - eig.values[i];

  Rng rng(seed);
  std::vector<double> u(p, 0.0);
  bool sampled = false;

  if (!options.force_gibbs) {
    const double b = solve_envelope_parameter(beta);
    // ACG envelope with Omega = I + (2/b)·B; bound constant
    // M = exp((b-p)/2)·(p/b)^(p/2).
    std::vector<double> inv_sd(p);
    for (std::size_t i = 0; i < p; ++i)
      inv_sd[i] = 1.0 / std::sqrt(1.0 + 2.0 * beta[i] / b);
    const double log_m_part =
        (static_cast<double>(p) - b) / 2.0;  // + (p/2)·log(b·t/p) below
    for (std::size_t tries = 0; tries < options.max_rejections; ++tries) {
      double nrm2 = 0.0;
      for (std::size_t i = 0; i < p; ++i) {
        u[i] = rng.normal() * inv_sd[i];
        nrm2 += u[i] * u[i];
      }
      if (nrm2 == 0.0) continue;
      const double nrm = std::sqrt(nrm2);
      double ubu = 0.0, uou = 0.0;
      for (std::size_t i = 0; i < p; ++i) {
        const double ui = u[i] / nrm;
        u[i] = ui;
        ubu += beta[i] * ui * ui;
        uou += (1.0 + 2.0 * beta[i] / b) * ui * ui;
      }
      const double log_acc = -ubu + log_m_part +
                             0.5 * static_cast<double>(p) *
                                 std::log(b * uou / static_cast<double>(p));
      if (std::log(rng.uniform01_pos()) <= log_acc) {
        sampled = true;
        break;
      }
    }
  }

  if (!sampled) {
    // Gibbs fallback in the eigenbasis, started at the dominant direction.
    std::fill(u.begin(), u.end(), 0.0);
    u[0] = 1.0;
    std::vector<double> lam(p);
    for (std::size_t i = 0; i < p; ++i) lam[i] = -beta[i];
    gibbs_sweeps(u, lam, options.gibbs_sweeps, rng);
  }

  // Rotate back: v = Q·u, renormalized to unit length.
  std::vector<double> v(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    if (u[i] == 0.0) continue;
    for (std::size_t r = 0; r < p; ++r) v[r] += eig.vectors(r, i) * u[i];
  }
  double nrm = 0.0;
  for (double x : v) nrm += x * x;
  nrm = std::sqrt(nrm);
  for (double& x : v) x /= nrm;
  return v;
}

Subspace dp_pca(const Matrix& g, double epsilon, double clip_norm,
                std::uint64_t seed) {
  require(g.rows() >= 1 && g.cols() >= 1, Status::kEmptyMatrix,
          "dp_pca: empty gradient matrix");
  require(epsilon > 0.0, Status::kInvalidArgument,
          "dp_pca: epsilon must be positive");
  require(clip_norm > 0.0, Status::kInvalidArgument,
          "dp_pca: clip norm must be positive");
  const double m = static_cast<double>(g.rows());
  Matrix a = gram(g);
  const double scale = (m * epsilon / 2.0) * (1.0 / m);  // (m·eps/2)·(1/m)GᵀG
  for (double& v : a.data()) v *= scale;
  const std::vector<double> v = bingham_sample(a, seed);
  Matrix basis(g.cols(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) basis(i, 0) = v[i];
  return Subspace{g.cols(), 1, std::move(basis)};
}

DpGsdResult dp_gsd(const Batch& priv, const Batch& pub,
                   const ModelParams& model, const PrivacyParams& params,
                   std::uint64_t seed, const GsdOptions& options) {
  params.validate();
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
  // The private gradients are touched only through clip + Bingham sampling;
  // everything after the draw is post-processing.
  const Matrix clipped = clip_rows(g_priv, params.clip_norm);
  const Subspace v_priv = dp_pca(clipped, params.epsilon, params.clip_norm, seed);

  const SvdResult sv_pub = svd(g_pub);
  Matrix pub_basis(sv_pub.right.basis.rows(), 1);
  for (std::size_t i = 0; i < pub_basis.rows(); ++i)
    pub_basis(i, 0) = sv_pub.right.basis(i, 0);
  const Subspace v_pub{g_pub.cols(), 1, std::move(pub_basis)};

  DpGsdResult out;
  out.report.k = 1;
  out.report.p = g_priv.cols();
  out.report.m_priv = g_priv.rows();
  out.report.m_pub = g_pub.rows();
  out.report.angles = principal_angles(v_priv, v_pub);
  out.report.distance_raw = projection_metric(out.report.angles);
  out.report.distance_normalized = out.report.distance_raw;
  out.report.pub_singular_values = sv_pub.singular_values;
  out.epsilon_effective = params.epsilon / (params.clip_norm * params.clip_norm);
  out.mechanism = "clip+bingham-exponential-mechanism";
  return out;
}

double required_sample_size(const DpPcaDiagnostics& diag,
                            const CloseApprox& close, double epsilon,
                            double clip_norm) {
  close.validate();
  require(epsilon > 0.0, Status::kInvalidArgument,
          "required_sample_size: epsilon must be positive");
  require(clip_norm > 0.0, Status::kInvalidArgument,
          "required_sample_size: clip norm must be positive");
  require(diag.ambient_dim >= 1, Status::kInvalidArgument,
          "required_sample_size: ambient dimension must be positive");
  require(diag.eigengap > 0.0, Status::kZeroGap,
          "required_sample_size: eigengap must be positive");
  require(diag.top_eigenvalue > 0.0, Status::kInvalidArgument,
          "required_sample_size: top eigenvalue must be positive");
  const double p = static_cast<double>(diag.ambient_dim);
  const double rho = close.rho, eta = close.eta;
  const double lead = p * clip_norm * clip_norm /
                      (epsilon * diag.eigengap *
                       (1.0 - std::sqrt(1.0 - rho * rho)));
  const double inner =
      4.0 * std::log(1.0 / eta) / p +
      2.0 * std::log(8.0 * diag.top_eigenvalue / (rho * rho * diag.eigengap));
  return lead * inner;
}

NoiseScale gep_noise_scale(const PrivacyParams& params) {
  params.validate();
  NoiseScale out;
  out.sigma = 2.0 *
              std::sqrt(2.0 * static_cast<double>(params.iterations) *
                        std::log(1.0 / params.delta)) /
              params.epsilon;
  out.epsilon_in_range = params.epsilon < 2.0 * std::log(1.0 / params.delta);
  return out;
}

}  // namespace gsdlab
