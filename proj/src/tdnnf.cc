// src/tdnnf.cc

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

#include "tdnnas/tdnnf.h"

#include <cmath>
#include <stdexcept>

#include "tdnnas/numeric.h"

namespace tdnnas {

std::vector<int> TapsForLeft(int c) {
  if (c < 0) throw std::invalid_argument("left context offset must be >= 0");
  if (c == 0) return {0};
  return {-c, 0};
}

std::vector<int> TapsForRight(int d) {
  if (d < 0) throw std::invalid_argument("right context offset must be >= 0");
  if (d == 0) return {0};
  return {0, d};
}

std::vector<int> ContextSpec::LeftTaps() const { return TapsForLeft(left); }
std::vector<int> ContextSpec::RightTaps() const { return TapsForRight(right); }

Matrix Splice(const Matrix &seq, const std::vector<int> &offsets) {
  if (offsets.empty()) throw std::invalid_argument("splice: empty offsets");
  const int T = seq.rows, D = seq.cols;
  Matrix out(T, D * static_cast<int>(offsets.size()));
  for (int t = 0; t < T; t++) {
    double *or_ = out.Row(t);
    for (size_t i = 0; i < offsets.size(); i++) {
      const double *sr = seq.Row(ClampRow(t + offsets[i], T));
      for (int k = 0; k < D; k++) or_[i * D + k] = sr[k];
    }
  }
  return out;
}

Matrix SpliceBackward(const Matrix &grad, int frame_dim, const std::vector<int> &offsets) {
  if (offsets.empty()) throw std::invalid_argument("splice: empty offsets");
  if (grad.cols != frame_dim * static_cast<int>(offsets.size())) {
    throw std::invalid_argument("splice backward: width mismatch");
  }
  const int T = grad.rows;
  Matrix out(T, frame_dim);
  for (int t = 0; t < T; t++) {
    const double *gr = grad.Row(t);
    for (size_t i = 0; i < offsets.size(); i++) {
      double *or_ = out.Row(ClampRow(t + offsets[i], T));
      for (int k = 0; k < frame_dim; k++) or_[k] += gr[i * frame_dim + k];
    }
  }
  return out;
}

namespace {

void CheckLayerView(const Matrix &x, const LayerParamsView &p) {
  if (p.left_taps.size() != p.linear.size() || p.right_taps.size() != p.affine.size() ||
      p.bias == nullptr || p.linear.empty() || p.affine.empty()) {
    throw std::invalid_argument("factored layer: malformed parameter view");
  }
  for (const Matrix *w : p.linear) {
    if (w->rows != x.cols || w->cols < p.dim) {
      throw std::invalid_argument("factored layer: dimension mismatch, input " +
                                  ShapeStr(x) + " vs linear block " + ShapeStr(*w));
    }
  }
  for (const Matrix *w : p.affine) {
    if (w->rows != p.out_dim || w->cols < p.dim) {
      throw std::invalid_argument("factored layer: dimension mismatch, affine block " +
                                  ShapeStr(*w) + " vs out_dim " + std::to_string(p.out_dim));
    }
  }
  if (p.bias->rows != 1 || p.bias->cols != p.out_dim) {
    throw std::invalid_argument("factored layer: bias shape " + ShapeStr(*p.bias));
  }
}

}  // namespace

Matrix FactoredLayerForward(const Matrix &x, const LayerParamsView &p, LayerCache *cache) {
  CheckLayerView(x, p);
  const int T = x.rows;
  Matrix b(T, p.dim);
  for (size_t i = 0; i < p.left_taps.size(); i++) {
    GemmShiftAccum(x, p.left_taps[i], *p.linear[i], p.dim, &b);
  }
  Matrix y(T, p.out_dim);
  for (int t = 0; t < T; t++) {
    double *yr = y.Row(t);
    const double *br = p.bias->Row(0);
    for (int j = 0; j < p.out_dim; j++) yr[j] = br[j];
  }
  for (size_t i = 0; i < p.right_taps.size(); i++) {
    GemmShiftNTAccum(b, p.right_taps[i], *p.affine[i], p.dim, &y);
  }
  if (cache != nullptr) {
    cache->relu_mask.assign(static_cast<size_t>(T) * p.out_dim, 0);
    cache->frames = T;
  }
  for (int t = 0; t < T; t++) {
    double *yr = y.Row(t);
    for (int j = 0; j < p.out_dim; j++) {
      if (yr[j] > 0.0) {
        if (cache != nullptr) cache->relu_mask[static_cast<size_t>(t) * p.out_dim + j] = 1;
      } else {
        yr[j] = 0.0;
      }
    }
  }
  if (cache != nullptr) cache->bottleneck = std::move(b);
  return y;
}

void FactoredLayerBackward(const Matrix &x, const LayerParamsView &p,
                           const LayerCache &cache, const Matrix &grad_out,
                           const LayerGradsView &grads, Matrix *grad_in) {
  if (cache.frames != x.rows || cache.bottleneck.cols != p.dim ||
      static_cast<int>(cache.relu_mask.size()) != x.rows * p.out_dim) {
    throw std::invalid_argument("factored layer backward: stale cache");
  }
  if (grad_out.rows != x.rows || grad_out.cols != p.out_dim) {
    throw std::invalid_argument("factored layer backward: grad shape mismatch");
  }
  const int T = x.rows;
  Matrix g_pre(T, p.out_dim);
  for (int t = 0; t < T; t++) {
    const double *gr = grad_out.Row(t);
    double *pr = g_pre.Row(t);
    const uint8_t *mr = cache.relu_mask.data() + static_cast<size_t>(t) * p.out_dim;
    for (int j = 0; j < p.out_dim; j++) pr[j] = mr[j] ? gr[j] : 0.0;
  }
  if (grads.bias != nullptr) {
    for (int t = 0; t < T; t++) {
      const double *pr = g_pre.Row(t);
      double *br = grads.bias->Row(0);
      for (int j = 0; j < p.out_dim; j++) br[j] += pr[j];
    }
  }
  Matrix g_b(T, p.dim);
  for (size_t i = 0; i < p.right_taps.size(); i++) {
    const int o = p.right_taps[i];
    if (i < grads.affine.size() && grads.affine[i] != nullptr) {
      GemmTNShiftAccum(g_pre, cache.bottleneck, o, p.dim, grads.affine[i]);
    }
    GemmNNScatterAccum(g_pre, *p.affine[i], p.dim, o, &g_b);
  }
  for (size_t i = 0; i < p.left_taps.size(); i++) {
    const int o = p.left_taps[i];
    if (i < grads.linear.size() && grads.linear[i] != nullptr) {
      GemmShiftTransAccum(x, o, g_b, p.dim, grads.linear[i]);
    }
    if (grad_in != nullptr) {
      GemmNTScatterAccum(g_b, *p.linear[i], p.dim, o, grad_in);
    }
  }
}

void LayerParams::Allocate(const ContextSpec &ctx, int in, int out, int bottleneck) {
  if (bottleneck < 1) throw std::invalid_argument("factored layer: bottleneck dim must be >= 1");
  context = ctx;
  in_dim = in;
  out_dim = out;
  dim = bottleneck;
  linear.clear();
  affine.clear();
  linear_grad.clear();
  affine_grad.clear();
  for (size_t i = 0; i < ctx.LeftTaps().size(); i++) {
    linear.emplace_back(in, bottleneck);
    linear_grad.emplace_back(in, bottleneck);
  }
  for (size_t i = 0; i < ctx.RightTaps().size(); i++) {
    affine.emplace_back(out, bottleneck);
    affine_grad.emplace_back(out, bottleneck);
  }
  bias = Matrix(1, out);
  bias_grad = Matrix(1, out);
}

namespace {

Matrix StackBlocks(const std::vector<Matrix> &blocks) {
  int rows = 0;
  for (const Matrix &b : blocks) rows += b.rows;
  Matrix s(rows, blocks[0].cols);
  int r0 = 0;
  for (const Matrix &b : blocks) {
    for (int r = 0; r < b.rows; r++) {
      for (int c = 0; c < b.cols; c++) s(r0 + r, c) = b(r, c);
    }
    r0 += b.rows;
  }
  return s;
}

void UnstackBlocks(const Matrix &s, std::vector<Matrix> *blocks) {
  int r0 = 0;
  for (Matrix &b : *blocks) {
    for (int r = 0; r < b.rows; r++) {
      for (int c = 0; c < b.cols; c++) b(r, c) = s(r0 + r, c);
    }
    r0 += b.rows;
  }
}

}  // namespace

void LayerParams::Init(Rng *rng) {
  for (Matrix &w : linear) {
    for (double &v : w.data) v = rng->Gaussian();
  }
  OrthonormalizeExact();
  const double scale =
      1.0 / std::sqrt(static_cast<double>(dim) * static_cast<double>(affine.size()));
  for (Matrix &w : affine) {
    for (double &v : w.data) v = rng->Gaussian() * scale;
  }
  bias.SetZero();
}

void LayerParams::ZeroGrads() {
  for (Matrix &g : linear_grad) g.SetZero();
  for (Matrix &g : affine_grad) g.SetZero();
  bias_grad.SetZero();
}

void LayerParams::Register(SgdOptimizer *opt) {
  for (size_t i = 0; i < linear.size(); i++) opt->Register(&linear[i], &linear_grad[i]);
  for (size_t i = 0; i < affine.size(); i++) opt->Register(&affine[i], &affine_grad[i]);
  opt->Register(&bias, &bias_grad);
}

LayerParamsView LayerParams::View() const {
  LayerParamsView v;
  v.left_taps = context.LeftTaps();
  v.right_taps = context.RightTaps();
  for (const Matrix &w : linear) v.linear.push_back(&w);
  for (const Matrix &w : affine) v.affine.push_back(&w);
  v.bias = &bias;
  v.dim = dim;
  v.out_dim = out_dim;
  return v;
}

LayerGradsView LayerParams::GradsView() {
  LayerGradsView g;
  for (Matrix &w : linear_grad) g.linear.push_back(&w);
  for (Matrix &w : affine_grad) g.affine.push_back(&w);
  g.bias = &bias_grad;
  return g;
}

int64_t LayerParams::ParamCount() const {
  int64_t n = 0;
  for (const Matrix &w : linear) n += w.NumElements();
  for (const Matrix &w : affine) n += w.NumElements();
  return n + bias.NumElements();
}

void LayerParams::OrthonormalStep(double nu) {
  Matrix s = StackBlocks(linear);
  SemiOrthogonalStep(&s, dim, nu);
  UnstackBlocks(s, &linear);
}

void LayerParams::OrthonormalizeExact() {
  Matrix s = StackBlocks(linear);
  OrthonormalizeColumns(&s, dim);
  UnstackBlocks(s, &linear);
}

double LayerParams::OrthoError() const {
  Matrix s = StackBlocks(linear);
  return OrthonormalityError(s, dim);
}

LossKind LossKindFromString(const std::string &s) {
  if (s == "cross-entropy") return LossKind::kCrossEntropy;
  if (s == "mse") return LossKind::kMse;
  throw std::invalid_argument("unknown loss kind: " + s);
}

std::string LossKindToString(LossKind k) {
  return k == LossKind::kCrossEntropy ? "cross-entropy" : "mse";
}

double MaskedLossSum(const Matrix &logits, const std::vector<int32_t> &labels,
                     const std::vector<uint8_t> &mask, LossKind kind, int64_t *count,
                     Matrix *grad_logits) {
  const int T = logits.rows, C = logits.cols;
  if (static_cast<int>(labels.size()) != T || static_cast<int>(mask.size()) != T) {
    throw std::invalid_argument("loss: labels/mask length mismatch");
  }
  double loss = 0.0;
  for (int t = 0; t < T; t++) {
    if (!mask[t]) continue;
    const int32_t y = labels[t];
    if (y < 0 || y >= C) throw std::invalid_argument("loss: label out of range");
    const double *lr = logits.Row(t);
    if (kind == LossKind::kCrossEntropy) {
      double m = lr[0];
      for (int j = 1; j < C; j++) m = std::max(m, lr[j]);
      double z = 0.0;
      for (int j = 0; j < C; j++) z += std::exp(lr[j] - m);
      const double lse = m + std::log(z);
      loss += lse - lr[y];
      if (grad_logits != nullptr) {
        double *gr = grad_logits->Row(t);
        for (int j = 0; j < C; j++) {
          gr[j] += std::exp(lr[j] - lse) - (j == y ? 1.0 : 0.0);
        }
      }
    } else {
      for (int j = 0; j < C; j++) {
        const double d = lr[j] - (j == y ? 1.0 : 0.0);
        loss += d * d;
        if (grad_logits != nullptr) (*grad_logits)(t, j) += 2.0 * d;
      }
    }
    if (count != nullptr) (*count)++;
  }
  return loss;
}

CandidateModel::CandidateModel(const CandidateSpec &spec, int default_dim) : spec_(spec) {
  if (spec.input_dim < 1 || spec.hidden_dim < 1 || spec.classes < 2 || spec.layers.empty()) {
    throw std::invalid_argument("candidate spec: bad geometry");
  }
  for (size_t l = 0; l < spec.layers.size(); l++) {
    const LayerChoice &ch = spec.layers[l];
    const int in = (l == 0) ? spec.input_dim : spec.hidden_dim;
    const int out = spec.hidden_dim;
    const int n = ch.dim > 0 ? ch.dim : default_dim;
    if (n < 1) {
      throw std::invalid_argument("layer " + std::to_string(l + 1) +
                                  ": unresolved bottleneck dim");
    }
    if (ch.left < 0 || ch.right < 0) {
      throw std::invalid_argument("layer " + std::to_string(l + 1) + ": negative offset");
    }
    if (ch.skip && in != out) {
      throw std::invalid_argument("layer " + std::to_string(l + 1) +
                                  ": skip requires equal adjacent layer widths");
    }
    LayerParams lp;
    lp.Allocate(ContextSpec{ch.left, ch.right}, in, out, n);
    // record the resolved dim so spec() round-trips to a concrete model
    spec_.layers[l].dim = n;
    layers_.push_back(std::move(lp));
  }
  classifier_w_ = Matrix(spec.classes, spec.hidden_dim);
  classifier_b_ = Matrix(1, spec.classes);
  classifier_w_grad_ = Matrix(spec.classes, spec.hidden_dim);
  classifier_b_grad_ = Matrix(1, spec.classes);
}

void CandidateModel::Init(Rng *rng) {
  for (LayerParams &lp : layers_) lp.Init(rng);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec_.hidden_dim));
  for (double &v : classifier_w_.data) v = rng->Gaussian() * scale;
  classifier_b_.SetZero();
}

void CandidateModel::ZeroGrads() {
  for (LayerParams &lp : layers_) lp.ZeroGrads();
  classifier_w_grad_.SetZero();
  classifier_b_grad_.SetZero();
}

void CandidateModel::Register(SgdOptimizer *opt) {
  for (LayerParams &lp : layers_) lp.Register(opt);
  opt->Register(&classifier_w_, &classifier_w_grad_);
  opt->Register(&classifier_b_, &classifier_b_grad_);
}

void CandidateModel::OrthonormalStep(double nu) {
  for (LayerParams &lp : layers_) lp.OrthonormalStep(nu);
}

double CandidateModel::MaxOrthoError() const {
  double e = 0.0;
  for (const LayerParams &lp : layers_) e = std::max(e, lp.OrthoError());
  return e;
}

Matrix CandidateModel::ForwardLogits(const Matrix &frames) const {
  Matrix h = frames;
  for (size_t l = 0; l < layers_.size(); l++) {
    Matrix y = FactoredLayerForward(h, layers_[l].View(), nullptr);
    if (spec_.layers[l].skip) {
      for (size_t i = 0; i < y.data.size(); i++) y.data[i] += h.data[i];
    }
    h = std::move(y);
  }
  Matrix logits(frames.rows, spec_.classes);
  for (int t = 0; t < logits.rows; t++) {
    for (int j = 0; j < spec_.classes; j++) logits(t, j) = classifier_b_(0, j);
  }
  GemmNTAccum(h, classifier_w_, &logits);
  return logits;
}

double CandidateModel::ForwardBackward(const Sequence &seq, LossKind kind,
                                       double grad_scale, int64_t *count) {
  const int T = seq.frames.rows;
  const int L = static_cast<int>(layers_.size());
  std::vector<Matrix> inputs(L + 1);
  std::vector<LayerCache> caches(L);
  inputs[0] = seq.frames;
  for (int l = 0; l < L; l++) {
    Matrix y = FactoredLayerForward(inputs[l], layers_[l].View(), &caches[l]);
    if (spec_.layers[l].skip) {
      for (size_t i = 0; i < y.data.size(); i++) y.data[i] += inputs[l].data[i];
    }
    inputs[l + 1] = std::move(y);
  }
  Matrix logits(T, spec_.classes);
  for (int t = 0; t < T; t++) {
    for (int j = 0; j < spec_.classes; j++) logits(t, j) = classifier_b_(0, j);
  }
  GemmNTAccum(inputs[L], classifier_w_, &logits);

  Matrix grad_logits(T, spec_.classes);
  const double loss = MaskedLossSum(logits, seq.labels, seq.mask, kind, count, &grad_logits);
  if (grad_scale != 1.0) {
    for (double &v : grad_logits.data) v *= grad_scale;
  }
  GemmTNAccum(grad_logits, inputs[L], &classifier_w_grad_);
  for (int t = 0; t < T; t++) {
    const double *gr = grad_logits.Row(t);
    for (int j = 0; j < spec_.classes; j++) classifier_b_grad_(0, j) += gr[j];
  }
  Matrix grad_h(T, spec_.hidden_dim);
  GemmNNAccum(grad_logits, classifier_w_, &grad_h);
  for (int l = L - 1; l >= 0; l--) {
    const int in_dim = layers_[l].in_dim;
    Matrix grad_in(T, in_dim);
    if (spec_.layers[l].skip) {
      for (size_t i = 0; i < grad_in.data.size(); i++) grad_in.data[i] = grad_h.data[i];
    }
    FactoredLayerBackward(inputs[l], layers_[l].View(), caches[l], grad_h,
                          layers_[l].GradsView(), &grad_in);
    grad_h = std::move(grad_in);
  }
  return loss;
}

int64_t CandidateModel::ParamCount() const {
  int64_t n = 0;
  for (const LayerParams &lp : layers_) n += lp.ParamCount();
  return n + classifier_w_.NumElements() + classifier_b_.NumElements();
}

std::vector<std::pair<std::string, Matrix *>> CandidateModel::NamedTensors() {
  std::vector<std::pair<std::string, Matrix *>> out;
  for (size_t l = 0; l < layers_.size(); l++) {
    LayerParams &lp = layers_[l];
    const std::string prefix = "model/layer" + std::to_string(l + 1) + "/";
    const std::vector<int> lt = lp.context.LeftTaps();
    const std::vector<int> rt = lp.context.RightTaps();
    for (size_t i = 0; i < lp.linear.size(); i++) {
      out.emplace_back(prefix + "linear/" + std::to_string(lt[i]), &lp.linear[i]);
    }
    for (size_t i = 0; i < lp.affine.size(); i++) {
      out.emplace_back(prefix + "affine/" + std::to_string(rt[i]), &lp.affine[i]);
    }
    out.emplace_back(prefix + "bias", &lp.bias);
  }
  out.emplace_back("model/classifier/weight", &classifier_w_);
  out.emplace_back("model/classifier/bias", &classifier_b_);
  return out;
}

double ModelForwardLoss(CandidateModel *model, const std::vector<const Sequence *> &batch,
                        LossKind kind, bool with_grad) {
  int64_t total = 0;
  for (const Sequence *s : batch) {
    for (uint8_t m : s->mask) total += m ? 1 : 0;
  }
  if (total == 0) throw std::runtime_error("no supervised frames");
  double loss_sum = 0.0;
  if (with_grad) {
    const double scale = 1.0 / static_cast<double>(total);
    int64_t seen = 0;
    for (const Sequence *s : batch) {
      loss_sum += model->ForwardBackward(*s, kind, scale, &seen);
    }
  } else {
    for (const Sequence *s : batch) {
      int64_t cnt = 0;
      loss_sum += MaskedLossSum(model->ForwardLogits(s->frames), s->labels, s->mask, kind,
                                &cnt, nullptr);
    }
  }
  if (!std::isfinite(loss_sum)) throw std::runtime_error("non-finite loss");
  return loss_sum / static_cast<double>(total);
}

}  // namespace tdnnas
