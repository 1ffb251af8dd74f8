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

// Brute-force reference implementations used only by tests. These stay
// independent of the library's own numerical paths: the eigensolver here is
// a plain textbook Jacobi sweep over the explicit Gram matrix, gradients are
// finite differences of the loss, and integrals are Simpson sums.

#pragma once

#include <functional>
#include <vector>

#include "core/matrix.hpp"
#include "core/model.hpp"

namespace gsdlab::oracle {

struct EigenPairs {
  std::vector<double> values;  // descending
  Matrix vectors;              // columns match values
};

// Classical two-sided Jacobi on a symmetric matrix; convergence is driven
// by the off-diagonal Frobenius mass.
EigenPairs jacobi_eigen(const Matrix& sym);

// Singular values of m via the eigenvalues of the smaller Gram matrix.
std::vector<double> singular_values_via_gram(const Matrix& m);

// Top-k right singular subspace of m via the eigenvectors of mᵀm.
Matrix top_right_subspace_via_gram(const Matrix& m, std::size_t k);

// Largest singular value from the full Gram spectrum.
double spectral_norm_via_gram(const Matrix& m);

// Central finite differences of the per-example loss wrt every parameter.
std::vector<double> finite_diff_gradient(const ModelParams& model,
                                         std::span<const double> x,
                                         double label, double h);

// Composite Simpson rule with n (even) panels.
double simpson(const std::function<double(double)>& f, double a, double b,
               int n);

// Pearson's chi-square statistic for observed counts vs expected counts.
double chi_square_stat(const std::vector<double>& observed,
                       const std::vector<double>& expected);

// Two-sided Kolmogorov-Smirnov distance of samples against a cdf.
double ks_stat(std::vector<double> samples,
               const std::function<double(double)>& cdf);

// chi-square(35) upper 0.001 quantile, frozen from an independent
// high-precision evaluation.
inline constexpr double kChi2Crit35_999 = 66.61882884370104;

// KS critical value at level 0.001: sqrt(ln(2/alpha)/2)/sqrt(n).
inline constexpr double kKsCoef999 = 1.9494746035204051;

}  // namespace gsdlab::oracle
