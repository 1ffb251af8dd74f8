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

#include "common/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gsdlab::oracle {

EigenPairs jacobi_eigen(const Matrix& sym) {
  const std::size_t n = sym.rows();
  Matrix a = sym;
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off <= 1e-28 * (1.0 + frobenius_norm(a) * frobenius_norm(a))) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = 0.5 * std::atan2(2.0 * a(p, q), a(q, q) - a(p, p));
        const double c = std::cos(theta), s = std::sin(theta);
        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a(r, p), arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a(p, r), aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  EigenPairs out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

std::vector<double> singular_values_via_gram(const Matrix& m) {
  const Matrix g = m.cols() <= m.rows() ? gram(m) : gram(transpose(m));
  const EigenPairs e = jacobi_eigen(g);
  std::vector<double> s;
  s.reserve(e.values.size());
  for (double v : e.values) s.push_back(std::sqrt(std::max(0.0, v)));
  return s;
}

Matrix top_right_subspace_via_gram(const Matrix& m, std::size_t k) {
  const EigenPairs e = jacobi_eigen(gram(m));
  Matrix out(m.cols(), k);
  for (std::size_t i = 0; i < m.cols(); ++i)
    for (std::size_t j = 0; j < k; ++j) out(i, j) = e.vectors(i, j);
  return out;
}

double spectral_norm_via_gram(const Matrix& m) {
  const std::vector<double> s = singular_values_via_gram(m);
  return s.empty() ? 0.0 : s.front();
}

std::vector<double> finite_diff_gradient(const ModelParams& model,
                                         std::span<const double> x,
                                         double label, double h) {
  std::vector<double> grad(model.theta.size(), 0.0);
  ModelParams work = model;
  for (std::size_t j = 0; j < model.theta.size(); ++j) {
    work.theta[j] = model.theta[j] + h;
    const double up = example_loss(work, x, label);
    work.theta[j] = model.theta[j] - h;
    const double dn = example_loss(work, x, label);
    work.theta[j] = model.theta[j];
    grad[j] = (up - dn) / (2.0 * h);
  }
  return grad;
}

double simpson(const std::function<double(double)>& f, double a, double b,
               int n) {
  if (n % 2 == 1) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double chi_square_stat(const std::vector<double>& observed,
                       const std::vector<double>& expected) {
  double s = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    s += d * d / expected[i];
  }
  return s;
}

double ks_stat(std::vector<double> samples,
               const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double c = cdf(samples[i]);
    d = std::max(d, std::abs(c - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - c));
  }
  return d;
}

}  // namespace gsdlab::oracle
