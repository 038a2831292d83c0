// tdnnas/supernet.h

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

#ifndef TDNNAS_SUPERNET_H_
#define TDNNAS_SUPERNET_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tdnnas/bigcount.h"
#include "tdnnas/matrix.h"
#include "tdnnas/optim.h"
#include "tdnnas/rng.h"
#include "tdnnas/tdnnf.h"

namespace tdnnas {

// A layer can expose up to four independently searched axes.  A layer's
// effective candidate set is the cross product of its axes; the mixture
// weight of one joint choice is the product of the per-axis weights.
enum class AxisKind { kContextLeft, kContextRight, kBottleneckDim, kSkip };

std::string AxisKindToString(AxisKind k);
AxisKind AxisKindFromString(const std::string &s);

struct AxisSpace {
  AxisKind kind;
  std::vector<int> candidates;        // c / d / n values, or {0,1} for skip
  std::vector<int64_t> param_counts;  // C_i for each candidate
};

// Reference geometry used when pricing one axis's candidates: the other
// axes are held at the layer's reference values (fixed value when the axis
// is not searched, otherwise the largest candidate).
struct LayerGeometry {
  int in_dim = 0;
  int out_dim = 0;
  int ref_dim = 0;
  int ref_taps_left = 1;
  int ref_taps_right = 1;
};

// Number of parameters attributable to one candidate of one axis:
//   dim n:      taps_left*in*n + taps_right*n*out + out
//   left c:     taps(c)*in*ref_dim
//   right d:    taps(d)*ref_dim*out
//   skip:       0
// Throws on a degenerate dimensionality candidate (n < 1).
int64_t CandidateParamCount(const LayerGeometry &geom, AxisKind kind, int value);

// Full parameter count of a resolved layer choice (taps from c and d).
int64_t LayerParamCountResolved(int in_dim, int out_dim, int c, int d, int n);

struct LayerSpace {
  int fixed_left = 0;
  int fixed_right = 0;
  int fixed_dim = 0;  // 0 keeps the derived spec's dim unspecified
  bool fixed_skip = false;
  std::vector<AxisSpace> axes;

  int FindAxis(AxisKind k) const;  // index or -1
};

struct SearchSpace {
  int num_layers = 0;
  int input_dim = 0;
  int hidden_dim = 0;
  int classes = 0;
  int default_dim = 0;  // dim used to instantiate dim-unspecified layers
  std::vector<LayerSpace> layers;

  void Validate() const;
  LayerGeometry Geometry(int layer) const;
  void FillParamCounts();

  // picks[layer][axis] indexes into that axis's candidate list.
  CandidateSpec ResolveChoices(const std::vector<std::vector<int>> &picks) const;
  std::vector<std::vector<int>> SampleUniform(Rng *rng) const;
  std::vector<std::vector<int>> FirstChoices() const;
  bool NextChoices(std::vector<std::vector<int>> *picks) const;  // odometer
};

// Exact number of candidate architectures (product of axis sizes).
BigCount SearchSpaceSize(const SearchSpace &space);

// Log-domain architecture parameters, one vector per (layer, axis).
struct ArchWeights {
  std::vector<std::vector<Matrix>> log_alpha;  // 1 x N each
  std::vector<std::vector<Matrix>> grad;

  void InitZero(const SearchSpace &space);
  void ZeroGrads();
  void Register(SgdOptimizer *opt);
};

// lambda[layer][axis][i]; every [layer][axis] slice lies on the simplex.
using LambdaSet = std::vector<std::vector<std::vector<double>>>;
using GumbelNoiseSet = std::vector<std::vector<std::vector<double>>>;

LambdaSet SoftmaxLambdas(const SearchSpace &space, const ArchWeights &arch);
LambdaSet SampleGumbelLambdas(const SearchSpace &space, const ArchWeights &arch,
                              double temperature, Rng *rng, GumbelNoiseSet *noise);
LambdaSet GumbelLambdasFromNoise(const SearchSpace &space, const ArchWeights &arch,
                                 const GumbelNoiseSet &noise, double temperature);
LambdaSet OneHotLambdas(const SearchSpace &space, const std::vector<std::vector<int>> &picks);

// Architecture gradient for one axis, shared by the softmax (factor = 1) and
// Gumbel (factor = 1/T) estimators:
//   g_k += factor * sum_j mu_j * (1{axis_index_j == k} - lambda_k) * dot_j
// where mu_j is the joint branch weight and dot_j = <dL/dh, branch output>.
void AccumulateAxisArchGrad(const std::vector<double> &lambda_axis,
                            const std::vector<double> &joint_mu,
                            const std::vector<int> &joint_axis_index,
                            const std::vector<double> &joint_dots, double factor,
                            double *grad);

// Resource penalty (the size-penalized objective term): returns
// eta * sum_{l,axis,i} lambda_i C_i and, when arch is non-null, accumulates
// its gradient with respect to log alpha scaled by arch_factor (1 for the
// softmax weights, 1/T per Gumbel sample) times sample_weight.
double PenalizedLossTerm(const SearchSpace &space, const LambdaSet &lambdas, double eta,
                         ArchWeights *arch, double arch_factor, double sample_weight);

// Weight-sharing parent network.  Candidates view shared storage: the
// bottleneck dimensionality axis uses the first n columns of each block and
// every context tap offset owns one block shared by all candidates using it.
class Supernet {
 public:
  explicit Supernet(const SearchSpace &space);

  void Init(Rng *rng);

  const SearchSpace &space() const { return space_; }
  ArchWeights &arch() { return arch_; }
  const ArchWeights &arch() const { return arch_; }

  void ZeroModelGrads();
  void RegisterModelParams(SgdOptimizer *opt);
  void OrthonormalStep(double nu);
  double MaxOrthoError() const;

  // Mean masked loss over the batch under the given mixture weights.  With
  // with_grad set, model gradients accumulate sample_weight * d(mean)/d(theta);
  // architecture gradients additionally use arch_factor (0 disables them).
  double ForwardLoss(const std::vector<const Sequence *> &batch, const LambdaSet &lambdas,
                     LossKind kind, bool with_grad, double arch_factor,
                     double sample_weight = 1.0);

  // Logits for one sequence under the given weights (evaluation path).
  Matrix ForwardLogits(const Matrix &frames, const LambdaSet &lambdas) const;

  // Standalone candidate whose parameters are copies of the shared
  // sub-views (weight-sharing contract; used by equivalence checks).
  CandidateModel Instantiate(const CandidateSpec &spec) const;

  std::vector<std::pair<std::string, Matrix *>> ModelTensors();
  // Gradient buffers in the same order and naming as ModelTensors().
  std::vector<std::pair<std::string, Matrix *>> ModelGradTensors();
  std::vector<std::pair<std::string, Matrix *>> ArchTensors();

  int64_t ModelParamCount() const;

 private:
  struct JointBranchDef {
    int left = 0, right = 0, dim = 0;
    bool skip = false;
    std::vector<int> axis_idx;  // per searched axis, candidate index
  };
  struct LayerStore {
    int in_dim = 0, out_dim = 0, max_left = 0, max_right = 0, n_max = 0;
    std::vector<Matrix> linear, linear_grad;  // index c -> tap offset -c
    std::vector<Matrix> affine, affine_grad;  // index d -> tap offset +d
    Matrix bias, bias_grad;
    std::vector<JointBranchDef> joint;
  };

  LayerParamsView BranchView(const LayerStore &ls, const JointBranchDef &b) const;
  LayerGradsView BranchGrads(LayerStore *ls, const JointBranchDef &b);

  double ForwardBackwardSeq(const Sequence &seq, const LambdaSet &lambdas, LossKind kind,
                            bool with_grad, double arch_factor, double logit_scale,
                            int64_t *count);

  SearchSpace space_;
  std::vector<LayerStore> layers_;
  Matrix classifier_w_, classifier_b_;
  Matrix classifier_w_grad_, classifier_b_grad_;
  ArchWeights arch_;
};

}  // namespace tdnnas

#endif  // TDNNAS_SUPERNET_H_
