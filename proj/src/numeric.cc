// src/numeric.cc

// Copyright 2026  tdnnas contributors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "tdnnas/numeric.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tdnnas {

std::vector<double> Softmax(const std::vector<double> &logits) {
  if (logits.empty()) throw std::invalid_argument("empty logits");
  const double m = *std::max_element(logits.begin(), logits.end());
  if (!std::isfinite(m)) throw std::invalid_argument("non-finite logits");
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); i++) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double &v : out) v /= sum;
  return out;
}

double GumbelFromUniform(double u) { return -std::log(-std::log(u)); }

std::vector<double> GumbelSoftmaxSample(const std::vector<double> &log_alpha,
                                        double temperature, Rng *rng,
                                        std::vector<double> *noise) {
  if (temperature <= 0.0) throw std::invalid_argument("invalid temperature");
  std::vector<double> g(log_alpha.size());
  for (size_t i = 0; i < g.size(); i++) g[i] = GumbelFromUniform(rng->Uniform01());
  if (noise != nullptr) *noise = g;
  return GumbelSoftmaxFromNoise(log_alpha, g, temperature);
}

std::vector<double> GumbelSoftmaxFromNoise(const std::vector<double> &log_alpha,
                                           const std::vector<double> &noise,
                                           double temperature) {
  if (temperature <= 0.0) throw std::invalid_argument("invalid temperature");
  if (noise.size() != log_alpha.size()) {
    throw std::invalid_argument("noise length does not match log_alpha");
  }
  std::vector<double> z(log_alpha.size());
  for (size_t i = 0; i < z.size(); i++) z[i] = (log_alpha[i] + noise[i]) / temperature;
  return Softmax(z);
}

double Entropy(const std::vector<double> &p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

void SemiOrthogonalStep(Matrix *w, int n, double nu) {
  if (n > w->rows) {
    throw std::invalid_argument("semi_orthogonal_step: cannot be column-orthonormal (" +
                                ShapeStr(*w) + ", n=" + std::to_string(n) + ")");
  }
  if (nu <= 0.0 || nu > 0.5) throw std::invalid_argument("semi_orthogonal_step: nu out of (0, 0.5]");
  // E = W^T W - I on the first n columns.
  Matrix e(n, n);
  for (int i = 0; i < n; i++) {
    for (int j = 0; j < n; j++) {
      double acc = 0.0;
      for (int r = 0; r < w->rows; r++) acc += (*w)(r, i) * (*w)(r, j);
      e(i, j) = acc - (i == j ? 1.0 : 0.0);
    }
  }
  // W <- W - nu * W * E
  Matrix delta(w->rows, n);
  for (int r = 0; r < w->rows; r++) {
    for (int k = 0; k < n; k++) {
      const double wv = (*w)(r, k);
      if (wv == 0.0) continue;
      for (int j = 0; j < n; j++) delta(r, j) += wv * e(k, j);
    }
  }
  for (int r = 0; r < w->rows; r++) {
    for (int j = 0; j < n; j++) (*w)(r, j) -= nu * delta(r, j);
  }
}

Matrix FiniteDiffGrad(const std::function<double()> &loss, Matrix *params, double eps) {
  Matrix grad(params->rows, params->cols);
  for (size_t i = 0; i < params->data.size(); i++) {
    const double saved = params->data[i];
    params->data[i] = saved + eps;
    const double lp = loss();
    params->data[i] = saved - eps;
    const double lm = loss();
    params->data[i] = saved;
    if (!std::isfinite(lp) || !std::isfinite(lm)) {
      throw std::runtime_error("finite_diff_grad: non-finite loss");
    }
    grad.data[i] = (lp - lm) / (2.0 * eps);
  }
  return grad;
}

std::vector<double> FiniteDiffGrad(const std::function<double()> &loss,
                                   std::vector<double> *params, double eps) {
  std::vector<double> grad(params->size());
  for (size_t i = 0; i < params->size(); i++) {
    const double saved = (*params)[i];
    (*params)[i] = saved + eps;
    const double lp = loss();
    (*params)[i] = saved - eps;
    const double lm = loss();
    (*params)[i] = saved;
    if (!std::isfinite(lp) || !std::isfinite(lm)) {
      throw std::runtime_error("finite_diff_grad: non-finite loss");
    }
    grad[i] = (lp - lm) / (2.0 * eps);
  }
  return grad;
}

}  // namespace tdnnas
