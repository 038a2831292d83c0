// tdnnas/tdnnf.h

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

#ifndef TDNNAS_TDNNF_H_
#define TDNNAS_TDNNF_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tdnnas/matrix.h"
#include "tdnnas/optim.h"
#include "tdnnas/rng.h"

namespace tdnnas {

// Per-layer temporal context: the left factor reads taps {-left, 0} and the
// affine factor reads taps {0, right}.  A zero offset collapses to the
// single tap {0}, so each side has at most two taps.
struct ContextSpec {
  int left = 0;   // c >= 0, reads frames t-c and t
  int right = 0;  // d >= 0, reads frames t and t+d

  std::vector<int> LeftTaps() const;
  std::vector<int> RightTaps() const;

  bool operator==(const ContextSpec &) const = default;
};

std::vector<int> TapsForLeft(int c);   // {-c, 0} or {0}
std::vector<int> TapsForRight(int d);  // {0, d} or {0}

// One concrete architecture choice for a layer.  dim == 0 means "use the
// model's configured bottleneck width" (a spec derived from a context-only
// search carries no dimensionality information).
struct LayerChoice {
  int left = 0;
  int right = 0;
  int dim = 0;
  bool skip = false;

  bool operator==(const LayerChoice &) const = default;
};

struct CandidateSpec {
  int input_dim = 0;
  int hidden_dim = 0;
  int classes = 0;
  std::vector<LayerChoice> layers;

  bool operator==(const CandidateSpec &) const = default;
};

// Copies rows of seq at clamped offsets:  row t of the result is the
// concatenation of seq[clamp(t+o)] over the given offsets.
Matrix Splice(const Matrix &seq, const std::vector<int> &offsets);

// Exact adjoint of Splice: scatter-adds slices of grad back onto the
// clamped source frames.  grad is T x (D*|offsets|); returns T x D.
Matrix SpliceBackward(const Matrix &grad, int frame_dim, const std::vector<int> &offsets);

// Non-owning view of a factored layer's parameters.  Each tap has one weight
// block; blocks may be wider than `dim`, in which case only the first `dim`
// columns participate (candidate sub-views of shared supernet parameters).
struct LayerParamsView {
  std::vector<int> left_taps;
  std::vector<const Matrix *> linear;  // in_dim x >=dim, one per left tap
  std::vector<int> right_taps;
  std::vector<const Matrix *> affine;  // out_dim x >=dim, one per right tap
  const Matrix *bias = nullptr;        // 1 x out_dim
  int dim = 0;
  int out_dim = 0;
};

struct LayerGradsView {
  std::vector<Matrix *> linear;
  std::vector<Matrix *> affine;
  Matrix *bias = nullptr;
};

struct LayerCache {
  Matrix bottleneck;               // T x dim
  std::vector<uint8_t> relu_mask;  // T*out_dim, 1 where pre-activation > 0
  int frames = 0;
};

// b = sum_taps shift(x, tap) * W-tilde_tap[:, 0:dim]
// y = relu(sum_taps shift(b, tap) * W-hat_tap[:, 0:dim]^T + bias)
Matrix FactoredLayerForward(const Matrix &x, const LayerParamsView &p, LayerCache *cache);

// Analytic gradients for one layer.  grad_out is d(loss)/d(y); parameter
// gradients are accumulated into `grads`, and d(loss)/d(x) into *grad_in
// when non-null.  The cache must come from a matching Forward call.
void FactoredLayerBackward(const Matrix &x, const LayerParamsView &p,
                           const LayerCache &cache, const Matrix &grad_out,
                           const LayerGradsView &grads, Matrix *grad_in);

// Owned parameters of one standalone factored layer.
struct LayerParams {
  ContextSpec context;
  int in_dim = 0;
  int out_dim = 0;
  int dim = 0;
  std::vector<Matrix> linear;
  std::vector<Matrix> affine;
  Matrix bias;
  std::vector<Matrix> linear_grad;
  std::vector<Matrix> affine_grad;
  Matrix bias_grad;

  void Allocate(const ContextSpec &ctx, int in, int out, int bottleneck);
  void Init(Rng *rng);
  void ZeroGrads();
  void Register(SgdOptimizer *opt);
  LayerParamsView View() const;
  LayerGradsView GradsView();
  int64_t ParamCount() const;

  // Semi-orthogonal projection step on the vertically stacked linear factor.
  void OrthonormalStep(double nu);
  void OrthonormalizeExact();
  double OrthoError() const;
};

struct Sequence {
  Matrix frames;                // T x F
  std::vector<int32_t> labels;  // length T
  std::vector<uint8_t> mask;    // length T, 1 = counted in the loss
};

enum class LossKind { kCrossEntropy, kMse };

LossKind LossKindFromString(const std::string &s);
std::string LossKindToString(LossKind k);

// Sum of per-frame losses over masked-in frames; *count accumulates the
// number of such frames.  When grad_logits is non-null it receives
// d(loss_sum)/d(logits) (zero rows on masked-out frames).  The mean loss is
// loss_sum / count; callers scale gradients accordingly.
double MaskedLossSum(const Matrix &logits, const std::vector<int32_t> &labels,
                     const std::vector<uint8_t> &mask, LossKind kind, int64_t *count,
                     Matrix *grad_logits);

// A stack of factored layers with optional per-layer additive skip
// connections, followed by one affine classifier.
class CandidateModel {
 public:
  CandidateModel(const CandidateSpec &spec, int default_dim);

  void Init(Rng *rng);
  void ZeroGrads();
  void Register(SgdOptimizer *opt);
  void OrthonormalStep(double nu);
  double MaxOrthoError() const;

  Matrix ForwardLogits(const Matrix &frames) const;

  // Forward + backward over one sequence.  Parameter gradients accumulate
  // d(loss_sum)/d(theta) * grad_scale.  Returns the masked loss sum and adds
  // the masked frame count to *count.
  double ForwardBackward(const Sequence &seq, LossKind kind, double grad_scale,
                         int64_t *count);

  int64_t ParamCount() const;
  const CandidateSpec &spec() const { return spec_; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  const LayerParams &layer(int i) const { return layers_[i]; }
  LayerParams &layer(int i) { return layers_[i]; }
  const Matrix &classifier_weight() const { return classifier_w_; }
  Matrix &classifier_weight() { return classifier_w_; }
  const Matrix &classifier_bias() const { return classifier_b_; }

  std::vector<std::pair<std::string, Matrix *>> NamedTensors();

 private:
  CandidateSpec spec_;
  std::vector<LayerParams> layers_;
  Matrix classifier_w_;  // classes x hidden
  Matrix classifier_b_;  // 1 x classes
  Matrix classifier_w_grad_;
  Matrix classifier_b_grad_;
};

// Mean masked loss over a batch; accumulates parameter gradients scaled by
// 1/(total masked frames) when with_grad is set.  Throws "no supervised
// frames" when every frame of the batch is masked out.
double ModelForwardLoss(CandidateModel *model, const std::vector<const Sequence *> &batch,
                        LossKind kind, bool with_grad);

}  // namespace tdnnas

#endif  // TDNNAS_TDNNF_H_
