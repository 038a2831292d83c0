// tdnnas/numeric.h

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

#ifndef TDNNAS_NUMERIC_H_
#define TDNNAS_NUMERIC_H_

#include <functional>
#include <vector>

#include "tdnnas/matrix.h"
#include "tdnnas/rng.h"

namespace tdnnas {

// Numerically stabilized softmax (max subtraction).  Throws on empty input.
std::vector<double> Softmax(const std::vector<double> &logits);

// Gumbel transform of a uniform variate u in (0,1): -log(-log(u)).
double GumbelFromUniform(double u);

// Draws one Gumbel-Softmax sample: softmax((log_alpha + g) / temperature).
// The raw Gumbel noise is written to *noise when non-null so the draw can be
// replayed (frozen-noise gradient checks).  Throws if temperature <= 0.
std::vector<double> GumbelSoftmaxSample(const std::vector<double> &log_alpha,
                                        double temperature, Rng *rng,
                                        std::vector<double> *noise = nullptr);

// Same draw from pre-sampled noise.
std::vector<double> GumbelSoftmaxFromNoise(const std::vector<double> &log_alpha,
                                           const std::vector<double> &noise,
                                           double temperature);

// Shannon entropy of a simplex vector, in nats.
double Entropy(const std::vector<double> &p);

// One step of the iterative semi-orthogonal projection applied to the first
// n columns of w:  W <- W - nu * W (W^T W - I).  Requires n <= rows and
// nu in (0, 0.5].  Repeated application drives ||W^T W - I||_F toward 0.
void SemiOrthogonalStep(Matrix *w, int n, double nu);

// Central finite differences of `loss` with respect to every entry of
// `params`, perturbing in place.  `loss` must be deterministic: any
// randomness has to be fixed or replayed across the two evaluations.
// Throws if `loss` returns a non-finite value.
Matrix FiniteDiffGrad(const std::function<double()> &loss, Matrix *params, double eps);

std::vector<double> FiniteDiffGrad(const std::function<double()> &loss,
                                   std::vector<double> *params, double eps);

}  // namespace tdnnas

#endif  // TDNNAS_NUMERIC_H_
