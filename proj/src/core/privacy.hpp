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

namespace gsdlab {

struct PrivacyParams {
  double epsilon = 1.0;
  double delta = 1e-5;
  double clip_norm = 1.0;  // c
  std::size_t iterations = 1;  // T, used by the noise calibration

  void validate() const;
};

struct CloseApprox {
  double rho = 0.5;
  double eta = 0.1;

  void validate() const;
};

struct DpPcaDiagnostics {
  double top_eigenvalue = 0.0;  // lambda_1 of (1/m)GᵀG
  double eigengap = 0.0;        // lambda_1 - lambda_2
  std::size_t ambient_dim = 0;  // p
  std::size_t samples = 0;      // m
};

// Each row g becomes g·min(1, c/|g|); rows already inside the ball are
// untouched. Idempotent and 1-Lipschitz per row.
Matrix clip_rows(const Matrix& g, double c);

struct BinghamOptions {
  // Rejection attempts before falling back to the Gibbs sampler. The
  // angular-central-Gaussian envelope accepts well above 1% across the
  // concentration range exercised here, so the fallback only engages when
  // the acceptance rate is genuinely degenerate.
  std::size_t max_rejections = 2000;
  std::size_t gibbs_sweeps = 400;
  bool force_gibbs = false;  // test hook
};

// One draw from the density proportional to exp(vᵀAv) on the unit sphere
// (vector Bingham). Rejection sampling with an angular-central-Gaussian
// envelope in the eigenbasis of A; coordinate-pair Gibbs updates as the
// fallback. Throws NonSymmetric when |A - Aᵀ|_max > 1e-9·|A|_max.
std::vector<double> bingham_sample(const Matrix& a, std::uint64_t seed,
                                   const BinghamOptions& options = {});

// Samples the top direction of A = (1/m)GᵀG from the Bingham density with
// concentration (m·epsilon/2)·A. Rows of g must already be clipped by the
// caller; the composed clip-then-sample mechanism is epsilon/c²-DP.
Subspace dp_pca(const Matrix& g, double epsilon, double clip_norm,
                std::uint64_t seed);

struct DpGsdResult {
  GsdReport report;  // k = 1; priv_singular_values left empty
  double epsilon_effective = 0.0;
  std::string mechanism;
};

// Private side: clip rows, then one Bingham draw of the top direction.
// Public side: exact top-1 SVD. The distance is post-processing of the
// private draw. k is fixed to 1.
DpGsdResult dp_gsd(const Batch& priv, const Batch& pub,
                   const ModelParams& model, const PrivacyParams& params,
                   std::uint64_t seed, const GsdOptions& options = {});

// Sample count above which the private distance is (rho, eta)-close to the
// exact one:
//   m > p·c² / (eps·alpha·(1 - sqrt(1 - rho²)))
//       · (4·log(1/eta)/p + 2·log(8·lambda1/(rho²·alpha))).
// Throws ZeroGap when the eigengap is not positive.
double required_sample_size(const DpPcaDiagnostics& diag,
                            const CloseApprox& close, double epsilon,
                            double clip_norm);

struct NoiseScale {
  double sigma = 0.0;
  // The calibration is stated for epsilon < 2·log(1/delta); callers should
  // warn when this is false.
  bool epsilon_in_range = true;
};

// sigma = 2·sqrt(2·T·log(1/delta)) / epsilon.
NoiseScale gep_noise_scale(const PrivacyParams& params);

}  // namespace gsdlab
