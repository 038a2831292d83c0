// src/supernet.cc

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

#include "tdnnas/supernet.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tdnnas/numeric.h"

namespace tdnnas {

std::string AxisKindToString(AxisKind k) {
  switch (k) {
    case AxisKind::kContextLeft: return "left";
    case AxisKind::kContextRight: return "right";
    case AxisKind::kBottleneckDim: return "dim";
    case AxisKind::kSkip: return "skip";
  }
  throw std::logic_error("bad axis kind");
}

AxisKind AxisKindFromString(const std::string &s) {
  if (s == "left") return AxisKind::kContextLeft;
  if (s == "right") return AxisKind::kContextRight;
  if (s == "dim") return AxisKind::kBottleneckDim;
  if (s == "skip") return AxisKind::kSkip;
  throw std::invalid_argument("unknown axis kind: " + s);
}

int64_t CandidateParamCount(const LayerGeometry &geom, AxisKind kind, int value) {
  switch (kind) {
    case AxisKind::kBottleneckDim: {
      if (value < 1) throw std::invalid_argument("degenerate bottleneck dim candidate");
      const int64_t n = value;
      return static_cast<int64_t>(geom.ref_taps_left) * geom.in_dim * n +
             static_cast<int64_t>(geom.ref_taps_right) * n * geom.out_dim + geom.out_dim;
    }
    case AxisKind::kContextLeft: {
      if (value < 0) throw std::invalid_argument("negative context candidate");
      const int64_t taps = static_cast<int64_t>(TapsForLeft(value).size());
      return taps * geom.in_dim * geom.ref_dim;
    }
    case AxisKind::kContextRight: {
      if (value < 0) throw std::invalid_argument("negative context candidate");
      const int64_t taps = static_cast<int64_t>(TapsForRight(value).size());
      return taps * geom.ref_dim * geom.out_dim;
    }
    case AxisKind::kSkip:
      return 0;
  }
  throw std::logic_error("bad axis kind");
}

int64_t LayerParamCountResolved(int in_dim, int out_dim, int c, int d, int n) {
  const int64_t tl = static_cast<int64_t>(TapsForLeft(c).size());
  const int64_t tr = static_cast<int64_t>(TapsForRight(d).size());
  return tl * in_dim * n + tr * n * out_dim + out_dim;
}

int LayerSpace::FindAxis(AxisKind k) const {
  for (size_t i = 0; i < axes.size(); i++) {
    if (axes[i].kind == k) return static_cast<int>(i);
  }
  return -1;
}

void SearchSpace::Validate() const {
  if (num_layers < 1 || static_cast<int>(layers.size()) != num_layers) {
    throw std::invalid_argument("search space: layer count mismatch");
  }
  if (input_dim < 1 || hidden_dim < 1 || classes < 2) {
    throw std::invalid_argument("search space: bad geometry");
  }
  for (int l = 0; l < num_layers; l++) {
    const LayerSpace &ls = layers[l];
    for (const AxisSpace &ax : ls.axes) {
      if (ax.candidates.empty()) {
        throw std::invalid_argument("search space: empty axis at layer " +
                                    std::to_string(l + 1));
      }
      for (size_t i = 1; i < ax.candidates.size(); i++) {
        if (ax.candidates[i] <= ax.candidates[i - 1]) {
          throw std::invalid_argument("search space: axis candidates must be ascending");
        }
      }
      if (ax.kind == AxisKind::kBottleneckDim && ax.candidates.front() < 1) {
        throw std::invalid_argument("degenerate bottleneck dim candidate");
      }
      if (ax.kind == AxisKind::kSkip) {
        for (int v : ax.candidates) {
          if (v != 0 && v != 1) {
            throw std::invalid_argument("search space: skip candidates must be 0/1");
          }
        }
        const int in = (l == 0) ? input_dim : hidden_dim;
        if (in != hidden_dim) {
          throw std::invalid_argument("layer " + std::to_string(l + 1) +
                                      ": skip requires equal adjacent layer widths");
        }
      }
      if ((ax.kind == AxisKind::kContextLeft || ax.kind == AxisKind::kContextRight) &&
          ax.candidates.front() < 0) {
        throw std::invalid_argument("search space: negative context offset");
      }
    }
    // Every candidate's linear factor must admit orthonormal columns: the
    // narrowest splice (fewest left taps) still needs at least max-dim rows.
    const int in = (l == 0) ? input_dim : hidden_dim;
    const int left_axis = ls.FindAxis(AxisKind::kContextLeft);
    const int min_left =
        left_axis >= 0 ? ls.axes[left_axis].candidates.front() : ls.fixed_left;
    const int min_taps = static_cast<int>(TapsForLeft(min_left).size());
    const int dim_axis = ls.FindAxis(AxisKind::kBottleneckDim);
    const int max_dim = dim_axis >= 0 ? ls.axes[dim_axis].candidates.back()
                                      : (ls.fixed_dim > 0 ? ls.fixed_dim : default_dim);
    if (max_dim > min_taps * in) {
      throw std::invalid_argument(
          "layer " + std::to_string(l + 1) + ": bottleneck dim " +
          std::to_string(max_dim) + " exceeds the narrowest spliced input width " +
          std::to_string(min_taps * in) + "; cannot be column-orthonormal");
    }
  }
}

LayerGeometry SearchSpace::Geometry(int layer) const {
  const LayerSpace &ls = layers[layer];
  LayerGeometry g;
  g.in_dim = (layer == 0) ? input_dim : hidden_dim;
  g.out_dim = hidden_dim;
  const int dim_axis = ls.FindAxis(AxisKind::kBottleneckDim);
  if (dim_axis >= 0) {
    g.ref_dim = ls.axes[dim_axis].candidates.back();
  } else {
    g.ref_dim = ls.fixed_dim > 0 ? ls.fixed_dim : default_dim;
  }
  const int left_axis = ls.FindAxis(AxisKind::kContextLeft);
  const int lc = left_axis >= 0 ? ls.axes[left_axis].candidates.back() : ls.fixed_left;
  g.ref_taps_left = static_cast<int>(TapsForLeft(lc).size());
  const int right_axis = ls.FindAxis(AxisKind::kContextRight);
  const int rc = right_axis >= 0 ? ls.axes[right_axis].candidates.back() : ls.fixed_right;
  g.ref_taps_right = static_cast<int>(TapsForRight(rc).size());
  return g;
}

void SearchSpace::FillParamCounts() {
  for (int l = 0; l < num_layers; l++) {
    const LayerGeometry geom = Geometry(l);
    for (AxisSpace &ax : layers[l].axes) {
      ax.param_counts.clear();
      for (int v : ax.candidates) {
        ax.param_counts.push_back(CandidateParamCount(geom, ax.kind, v));
      }
    }
  }
}

CandidateSpec SearchSpace::ResolveChoices(const std::vector<std::vector<int>> &picks) const {
  if (static_cast<int>(picks.size()) != num_layers) {
    throw std::invalid_argument("choices: layer count mismatch");
  }
  CandidateSpec spec;
  spec.input_dim = input_dim;
  spec.hidden_dim = hidden_dim;
  spec.classes = classes;
  for (int l = 0; l < num_layers; l++) {
    const LayerSpace &ls = layers[l];
    if (picks[l].size() != ls.axes.size()) {
      throw std::invalid_argument("choices: axis count mismatch at layer " +
                                  std::to_string(l + 1));
    }
    LayerChoice ch;
    ch.left = ls.fixed_left;
    ch.right = ls.fixed_right;
    ch.dim = ls.fixed_dim;
    ch.skip = ls.fixed_skip;
    for (size_t a = 0; a < ls.axes.size(); a++) {
      const AxisSpace &ax = ls.axes[a];
      const int idx = picks[l][a];
      if (idx < 0 || idx >= static_cast<int>(ax.candidates.size())) {
        throw std::invalid_argument("choices: candidate index out of range");
      }
      const int v = ax.candidates[idx];
      switch (ax.kind) {
        case AxisKind::kContextLeft: ch.left = v; break;
        case AxisKind::kContextRight: ch.right = v; break;
        case AxisKind::kBottleneckDim: ch.dim = v; break;
        case AxisKind::kSkip: ch.skip = (v != 0); break;
      }
    }
    spec.layers.push_back(ch);
  }
  return spec;
}

std::vector<std::vector<int>> SearchSpace::SampleUniform(Rng *rng) const {
  std::vector<std::vector<int>> picks(num_layers);
  for (int l = 0; l < num_layers; l++) {
    for (const AxisSpace &ax : layers[l].axes) {
      picks[l].push_back(rng->UniformInt(static_cast<int>(ax.candidates.size())));
    }
  }
  return picks;
}

std::vector<std::vector<int>> SearchSpace::FirstChoices() const {
  std::vector<std::vector<int>> picks(num_layers);
  for (int l = 0; l < num_layers; l++) picks[l].assign(layers[l].axes.size(), 0);
  return picks;
}

bool SearchSpace::NextChoices(std::vector<std::vector<int>> *picks) const {
  for (int l = num_layers - 1; l >= 0; l--) {
    for (int a = static_cast<int>(layers[l].axes.size()) - 1; a >= 0; a--) {
      int &v = (*picks)[l][a];
      if (v + 1 < static_cast<int>(layers[l].axes[a].candidates.size())) {
        v++;
        return true;
      }
      v = 0;
    }
  }
  return false;
}

BigCount SearchSpaceSize(const SearchSpace &space) {
  BigCount total(1);
  for (const LayerSpace &ls : space.layers) {
    for (const AxisSpace &ax : ls.axes) {
      total.MulU64(static_cast<uint64_t>(ax.candidates.size()));
    }
  }
  return total;
}

void ArchWeights::InitZero(const SearchSpace &space) {
  log_alpha.clear();
  grad.clear();
  log_alpha.resize(space.num_layers);
  grad.resize(space.num_layers);
  for (int l = 0; l < space.num_layers; l++) {
    for (const AxisSpace &ax : space.layers[l].axes) {
      log_alpha[l].emplace_back(1, static_cast<int>(ax.candidates.size()));
      grad[l].emplace_back(1, static_cast<int>(ax.candidates.size()));
    }
  }
}

void ArchWeights::ZeroGrads() {
  for (auto &per_layer : grad) {
    for (Matrix &g : per_layer) g.SetZero();
  }
}

void ArchWeights::Register(SgdOptimizer *opt) {
  for (size_t l = 0; l < log_alpha.size(); l++) {
    for (size_t a = 0; a < log_alpha[l].size(); a++) {
      opt->Register(&log_alpha[l][a], &grad[l][a]);
    }
  }
}

namespace {

std::vector<double> RowVec(const Matrix &m) {
  return std::vector<double>(m.data.begin(), m.data.end());
}

void CheckSimplex(const std::vector<double> &lambda) {
  double sum = 0.0;
  for (double v : lambda) {
    if (v < -1e-12 || !std::isfinite(v)) {
      throw std::invalid_argument("architecture weights off the simplex");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("architecture weights off the simplex");
  }
}

double JointMu(const std::vector<std::vector<double>> &layer_lambdas,
               const std::vector<int> &axis_idx) {
  double mu = 1.0;
  for (size_t a = 0; a < axis_idx.size(); a++) mu *= layer_lambdas[a][axis_idx[a]];
  return mu;
}

}  // namespace

LambdaSet SoftmaxLambdas(const SearchSpace &space, const ArchWeights &arch) {
  LambdaSet out(space.num_layers);
  for (int l = 0; l < space.num_layers; l++) {
    for (size_t a = 0; a < arch.log_alpha[l].size(); a++) {
      out[l].push_back(Softmax(RowVec(arch.log_alpha[l][a])));
    }
  }
  return out;
}

LambdaSet SampleGumbelLambdas(const SearchSpace &space, const ArchWeights &arch,
                              double temperature, Rng *rng, GumbelNoiseSet *noise) {
  LambdaSet out(space.num_layers);
  if (noise != nullptr) noise->assign(space.num_layers, {});
  for (int l = 0; l < space.num_layers; l++) {
    for (size_t a = 0; a < arch.log_alpha[l].size(); a++) {
      std::vector<double> g;
      out[l].push_back(
          GumbelSoftmaxSample(RowVec(arch.log_alpha[l][a]), temperature, rng, &g));
      if (noise != nullptr) (*noise)[l].push_back(std::move(g));
    }
  }
  return out;
}

LambdaSet GumbelLambdasFromNoise(const SearchSpace &space, const ArchWeights &arch,
                                 const GumbelNoiseSet &noise, double temperature) {
  LambdaSet out(space.num_layers);
  for (int l = 0; l < space.num_layers; l++) {
    for (size_t a = 0; a < arch.log_alpha[l].size(); a++) {
      out[l].push_back(
          GumbelSoftmaxFromNoise(RowVec(arch.log_alpha[l][a]), noise[l][a], temperature));
    }
  }
  return out;
}

LambdaSet OneHotLambdas(const SearchSpace &space,
                        const std::vector<std::vector<int>> &picks) {
  LambdaSet out(space.num_layers);
  for (int l = 0; l < space.num_layers; l++) {
    const LayerSpace &ls = space.layers[l];
    for (size_t a = 0; a < ls.axes.size(); a++) {
      std::vector<double> lam(ls.axes[a].candidates.size(), 0.0);
      lam.at(picks[l][a]) = 1.0;
      out[l].push_back(std::move(lam));
    }
  }
  return out;
}

void AccumulateAxisArchGrad(const std::vector<double> &lambda_axis,
                            const std::vector<double> &joint_mu,
                            const std::vector<int> &joint_axis_index,
                            const std::vector<double> &joint_dots, double factor,
                            double *grad) {
  double weighted = 0.0;  // sum_j mu_j dot_j
  for (size_t j = 0; j < joint_mu.size(); j++) weighted += joint_mu[j] * joint_dots[j];
  for (size_t k = 0; k < lambda_axis.size(); k++) {
    double own = 0.0;
    for (size_t j = 0; j < joint_mu.size(); j++) {
      if (joint_axis_index[j] == static_cast<int>(k)) own += joint_mu[j] * joint_dots[j];
    }
    grad[k] += factor * (own - lambda_axis[k] * weighted);
  }
}

double PenalizedLossTerm(const SearchSpace &space, const LambdaSet &lambdas, double eta,
                         ArchWeights *arch, double arch_factor, double sample_weight) {
  if (eta < 0.0) throw std::invalid_argument("penalized_loss: eta must be >= 0");
  double total = 0.0;
  for (int l = 0; l < space.num_layers; l++) {
    const LayerSpace &ls = space.layers[l];
    for (size_t a = 0; a < ls.axes.size(); a++) {
      const AxisSpace &ax = ls.axes[a];
      if (ax.param_counts.size() != ax.candidates.size()) {
        throw std::logic_error("penalized_loss: param counts not filled");
      }
      const std::vector<double> &lam = lambdas[l][a];
      double expected = 0.0;
      for (size_t i = 0; i < lam.size(); i++) {
        expected += lam[i] * static_cast<double>(ax.param_counts[i]);
      }
      total += expected;
      if (arch != nullptr && eta > 0.0) {
        Matrix &g = arch->grad[l][a];
        for (size_t k = 0; k < lam.size(); k++) {
          g(0, static_cast<int>(k)) +=
              sample_weight * arch_factor * eta * lam[k] *
              (static_cast<double>(ax.param_counts[k]) - expected);
        }
      }
    }
  }
  return eta * total;
}

Supernet::Supernet(const SearchSpace &space) : space_(space) {
  space_.Validate();
  space_.FillParamCounts();
  arch_.InitZero(space_);
  for (int l = 0; l < space_.num_layers; l++) {
    const LayerSpace &ls = space_.layers[l];
    LayerStore store;
    store.in_dim = (l == 0) ? space_.input_dim : space_.hidden_dim;
    store.out_dim = space_.hidden_dim;
    const int left_axis = ls.FindAxis(AxisKind::kContextLeft);
    const int right_axis = ls.FindAxis(AxisKind::kContextRight);
    const int dim_axis = ls.FindAxis(AxisKind::kBottleneckDim);
    store.max_left = left_axis >= 0 ? ls.axes[left_axis].candidates.back() : ls.fixed_left;
    store.max_right =
        right_axis >= 0 ? ls.axes[right_axis].candidates.back() : ls.fixed_right;
    if (dim_axis >= 0) {
      store.n_max = ls.axes[dim_axis].candidates.back();
    } else {
      store.n_max = ls.fixed_dim > 0 ? ls.fixed_dim : space_.default_dim;
    }
    if (store.n_max < 1) {
      throw std::invalid_argument("supernet: unresolved bottleneck dim at layer " +
                                  std::to_string(l + 1));
    }
    const int stack_rows = (store.max_left + 1) * store.in_dim;
    if (store.n_max > stack_rows) {
      throw std::invalid_argument(
          "supernet: layer " + std::to_string(l + 1) +
          " bottleneck exceeds stacked input dim; cannot be column-orthonormal");
    }
    for (int c = 0; c <= store.max_left; c++) {
      store.linear.emplace_back(store.in_dim, store.n_max);
      store.linear_grad.emplace_back(store.in_dim, store.n_max);
    }
    for (int d = 0; d <= store.max_right; d++) {
      store.affine.emplace_back(store.out_dim, store.n_max);
      store.affine_grad.emplace_back(store.out_dim, store.n_max);
    }
    store.bias = Matrix(1, store.out_dim);
    store.bias_grad = Matrix(1, store.out_dim);

    // Cross product of the searched axes; fixed attributes fill the rest.
    std::vector<JointBranchDef> joint;
    JointBranchDef base;
    base.left = ls.fixed_left;
    base.right = ls.fixed_right;
    base.dim = dim_axis >= 0 ? 0 : store.n_max;
    base.skip = ls.fixed_skip;
    joint.push_back(base);
    for (size_t a = 0; a < ls.axes.size(); a++) {
      const AxisSpace &ax = ls.axes[a];
      std::vector<JointBranchDef> expanded;
      for (const JointBranchDef &j : joint) {
        for (size_t i = 0; i < ax.candidates.size(); i++) {
          JointBranchDef nj = j;
          nj.axis_idx.push_back(static_cast<int>(i));
          const int v = ax.candidates[i];
          switch (ax.kind) {
            case AxisKind::kContextLeft: nj.left = v; break;
            case AxisKind::kContextRight: nj.right = v; break;
            case AxisKind::kBottleneckDim: nj.dim = v; break;
            case AxisKind::kSkip: nj.skip = (v != 0); break;
          }
          expanded.push_back(std::move(nj));
        }
      }
      joint = std::move(expanded);
    }
    store.joint = std::move(joint);
    layers_.push_back(std::move(store));
  }
  classifier_w_ = Matrix(space_.classes, space_.hidden_dim);
  classifier_b_ = Matrix(1, space_.classes);
  classifier_w_grad_ = Matrix(space_.classes, space_.hidden_dim);
  classifier_b_grad_ = Matrix(1, space_.classes);
}

namespace {

Matrix StackLinear(const std::vector<Matrix> &blocks, int in_dim, int n_max) {
  Matrix stacked(static_cast<int>(blocks.size()) * in_dim, n_max);
  for (size_t b = 0; b < blocks.size(); b++) {
    for (int r = 0; r < in_dim; r++) {
      for (int c = 0; c < n_max; c++) {
        stacked(static_cast<int>(b) * in_dim + r, c) = blocks[b](r, c);
      }
    }
  }
  return stacked;
}

void UnstackLinear(const Matrix &stacked, int in_dim, int n_max,
                   std::vector<Matrix> *blocks) {
  for (size_t b = 0; b < blocks->size(); b++) {
    for (int r = 0; r < in_dim; r++) {
      for (int c = 0; c < n_max; c++) {
        (*blocks)[b](r, c) = stacked(static_cast<int>(b) * in_dim + r, c);
      }
    }
  }
}

}  // namespace

void Supernet::Init(Rng *rng) {
  for (LayerStore &ls : layers_) {
    for (Matrix &w : ls.linear) {
      for (double &v : w.data) v = rng->Gaussian();
    }
    // Orthonormalize the vertical stack of tap blocks.  For a pure
    // dimensionality search the stack is the largest linear factor itself,
    // so every column sub-view inherits orthonormal columns exactly.
    Matrix stacked = StackLinear(ls.linear, ls.in_dim, ls.n_max);
    OrthonormalizeColumns(&stacked, ls.n_max);
    UnstackLinear(stacked, ls.in_dim, ls.n_max, &ls.linear);
    const double scale = 1.0 / std::sqrt(static_cast<double>(ls.n_max) *
                                         (ls.max_right > 0 ? 2.0 : 1.0));
    for (Matrix &w : ls.affine) {
      for (double &v : w.data) v = rng->Gaussian() * scale;
    }
    ls.bias.SetZero();
  }
  const double cscale = 1.0 / std::sqrt(static_cast<double>(space_.hidden_dim));
  for (double &v : classifier_w_.data) v = rng->Gaussian() * cscale;
  classifier_b_.SetZero();
}

void Supernet::ZeroModelGrads() {
  for (LayerStore &ls : layers_) {
    for (Matrix &g : ls.linear_grad) g.SetZero();
    for (Matrix &g : ls.affine_grad) g.SetZero();
    ls.bias_grad.SetZero();
  }
  classifier_w_grad_.SetZero();
  classifier_b_grad_.SetZero();
}

void Supernet::RegisterModelParams(SgdOptimizer *opt) {
  for (LayerStore &ls : layers_) {
    for (size_t i = 0; i < ls.linear.size(); i++) {
      opt->Register(&ls.linear[i], &ls.linear_grad[i]);
    }
    for (size_t i = 0; i < ls.affine.size(); i++) {
      opt->Register(&ls.affine[i], &ls.affine_grad[i]);
    }
    opt->Register(&ls.bias, &ls.bias_grad);
  }
  opt->Register(&classifier_w_, &classifier_w_grad_);
  opt->Register(&classifier_b_, &classifier_b_grad_);
}

void Supernet::OrthonormalStep(double nu) {
  for (LayerStore &ls : layers_) {
    Matrix stacked = StackLinear(ls.linear, ls.in_dim, ls.n_max);
    SemiOrthogonalStep(&stacked, ls.n_max, nu);
    UnstackLinear(stacked, ls.in_dim, ls.n_max, &ls.linear);
  }
}

double Supernet::MaxOrthoError() const {
  double e = 0.0;
  for (const LayerStore &ls : layers_) {
    Matrix stacked = StackLinear(ls.linear, ls.in_dim, ls.n_max);
    e = std::max(e, OrthonormalityError(stacked, ls.n_max));
  }
  return e;
}

LayerParamsView Supernet::BranchView(const LayerStore &ls, const JointBranchDef &b) const {
  LayerParamsView v;
  v.left_taps = TapsForLeft(b.left);
  v.right_taps = TapsForRight(b.right);
  if (b.left > 0) v.linear.push_back(&ls.linear[b.left]);
  v.linear.push_back(&ls.linear[0]);
  v.affine.push_back(&ls.affine[0]);
  if (b.right > 0) v.affine.push_back(&ls.affine[b.right]);
  v.bias = &ls.bias;
  v.dim = b.dim;
  v.out_dim = ls.out_dim;
  return v;
}

LayerGradsView Supernet::BranchGrads(LayerStore *ls, const JointBranchDef &b) {
  LayerGradsView g;
  if (b.left > 0) g.linear.push_back(&ls->linear_grad[b.left]);
  g.linear.push_back(&ls->linear_grad[0]);
  g.affine.push_back(&ls->affine_grad[0]);
  if (b.right > 0) g.affine.push_back(&ls->affine_grad[b.right]);
  g.bias = &ls->bias_grad;
  return g;
}

namespace {

void ValidateLambdas(const SearchSpace &space, const LambdaSet &lambdas) {
  if (static_cast<int>(lambdas.size()) != space.num_layers) {
    throw std::invalid_argument("lambda set: layer count mismatch");
  }
  for (int l = 0; l < space.num_layers; l++) {
    if (lambdas[l].size() != space.layers[l].axes.size()) {
      throw std::invalid_argument("lambda set: axis count mismatch");
    }
    for (size_t a = 0; a < lambdas[l].size(); a++) {
      if (lambdas[l][a].size() != space.layers[l].axes[a].candidates.size()) {
        throw std::invalid_argument("lambda set: candidate count mismatch");
      }
      CheckSimplex(lambdas[l][a]);
    }
  }
}

}  // namespace

double Supernet::ForwardBackwardSeq(const Sequence &seq, const LambdaSet &lambdas,
                                    LossKind kind, bool with_grad, double arch_factor,
                                    double logit_scale, int64_t *count) {
  const int T = seq.frames.rows;
  const int L = space_.num_layers;
  struct BranchEval {
    double mu = 0.0;
    bool computed = false;
    Matrix out;
    LayerCache cache;
  };
  std::vector<Matrix> inputs(L + 1);
  std::vector<std::vector<BranchEval>> evals(L);
  inputs[0] = seq.frames;
  for (int l = 0; l < L; l++) {
    LayerStore &ls = layers_[l];
    Matrix h_next(T, ls.out_dim);
    evals[l].resize(ls.joint.size());
    for (size_t j = 0; j < ls.joint.size(); j++) {
      const JointBranchDef &def = ls.joint[j];
      BranchEval &ev = evals[l][j];
      ev.mu = JointMu(lambdas[l], def.axis_idx);
      if (ev.mu == 0.0) continue;  // zero-weight branches contribute nothing
      ev.out = FactoredLayerForward(inputs[l], BranchView(ls, def),
                                    with_grad ? &ev.cache : nullptr);
      if (def.skip) {
        for (size_t i = 0; i < ev.out.data.size(); i++) {
          ev.out.data[i] += inputs[l].data[i];
        }
      }
      ev.computed = true;
      for (size_t i = 0; i < h_next.data.size(); i++) {
        h_next.data[i] += ev.mu * ev.out.data[i];
      }
    }
    inputs[l + 1] = std::move(h_next);
  }
  Matrix logits(T, space_.classes);
  for (int t = 0; t < T; t++) {
    for (int j = 0; j < space_.classes; j++) logits(t, j) = classifier_b_(0, j);
  }
  GemmNTAccum(inputs[L], classifier_w_, &logits);
  Matrix grad_logits(T, space_.classes);
  const double loss = MaskedLossSum(logits, seq.labels, seq.mask, kind, count,
                                    with_grad ? &grad_logits : nullptr);
  if (!with_grad) return loss;

  if (logit_scale != 1.0) {
    for (double &v : grad_logits.data) v *= logit_scale;
  }
  GemmTNAccum(grad_logits, inputs[L], &classifier_w_grad_);
  for (int t = 0; t < T; t++) {
    const double *gr = grad_logits.Row(t);
    for (int j = 0; j < space_.classes; j++) classifier_b_grad_(0, j) += gr[j];
  }
  Matrix grad_h(T, space_.hidden_dim);
  GemmNNAccum(grad_logits, classifier_w_, &grad_h);

  for (int l = L - 1; l >= 0; l--) {
    LayerStore &ls = layers_[l];
    const LayerSpace &lsp = space_.layers[l];
    if (arch_factor != 0.0 && !lsp.axes.empty()) {
      std::vector<double> mu(ls.joint.size(), 0.0);
      std::vector<double> dots(ls.joint.size(), 0.0);
      for (size_t j = 0; j < ls.joint.size(); j++) {
        const BranchEval &ev = evals[l][j];
        mu[j] = ev.mu;
        if (ev.computed) dots[j] = DotAll(grad_h, ev.out);
      }
      for (size_t a = 0; a < lsp.axes.size(); a++) {
        std::vector<int> axis_index(ls.joint.size());
        for (size_t j = 0; j < ls.joint.size(); j++) {
          axis_index[j] = ls.joint[j].axis_idx[a];
        }
        AccumulateAxisArchGrad(lambdas[l][a], mu, axis_index, dots, arch_factor,
                               arch_.grad[l][a].Row(0));
      }
    }
    Matrix grad_in(T, ls.in_dim);
    Matrix grad_out_branch(T, ls.out_dim);
    for (size_t j = 0; j < ls.joint.size(); j++) {
      BranchEval &ev = evals[l][j];
      if (!ev.computed) continue;
      for (size_t i = 0; i < grad_out_branch.data.size(); i++) {
        grad_out_branch.data[i] = ev.mu * grad_h.data[i];
      }
      LayerGradsView gv = BranchGrads(&ls, ls.joint[j]);
      FactoredLayerBackward(inputs[l], BranchView(ls, ls.joint[j]), ev.cache,
                            grad_out_branch, gv, &grad_in);
      if (ls.joint[j].skip) {
        for (size_t i = 0; i < grad_in.data.size(); i++) {
          grad_in.data[i] += grad_out_branch.data[i];
        }
      }
    }
    grad_h = std::move(grad_in);
  }
  return loss;
}

double Supernet::ForwardLoss(const std::vector<const Sequence *> &batch,
                             const LambdaSet &lambdas, LossKind kind, bool with_grad,
                             double arch_factor, double sample_weight) {
  ValidateLambdas(space_, lambdas);
  int64_t total = 0;
  for (const Sequence *s : batch) {
    for (uint8_t m : s->mask) total += m ? 1 : 0;
  }
  if (total == 0) throw std::runtime_error("no supervised frames");
  const double logit_scale = sample_weight / static_cast<double>(total);
  double loss_sum = 0.0;
  int64_t seen = 0;
  for (const Sequence *s : batch) {
    loss_sum += ForwardBackwardSeq(*s, lambdas, kind, with_grad, arch_factor,
                                   logit_scale, &seen);
  }
  if (!std::isfinite(loss_sum)) throw std::runtime_error("non-finite loss");
  return loss_sum / static_cast<double>(total);
}

Matrix Supernet::ForwardLogits(const Matrix &frames, const LambdaSet &lambdas) const {
  ValidateLambdas(space_, lambdas);
  Matrix h = frames;
  for (int l = 0; l < space_.num_layers; l++) {
    const LayerStore &ls = layers_[l];
    Matrix h_next(frames.rows, ls.out_dim);
    for (size_t j = 0; j < ls.joint.size(); j++) {
      const JointBranchDef &def = ls.joint[j];
      const double mu = JointMu(lambdas[l], def.axis_idx);
      if (mu == 0.0) continue;
      Matrix out = FactoredLayerForward(h, BranchView(ls, def), nullptr);
      if (def.skip) {
        for (size_t i = 0; i < out.data.size(); i++) out.data[i] += h.data[i];
      }
      for (size_t i = 0; i < h_next.data.size(); i++) h_next.data[i] += mu * out.data[i];
    }
    h = std::move(h_next);
  }
  Matrix logits(frames.rows, space_.classes);
  for (int t = 0; t < logits.rows; t++) {
    for (int j = 0; j < space_.classes; j++) logits(t, j) = classifier_b_(0, j);
  }
  GemmNTAccum(h, classifier_w_, &logits);
  return logits;
}

CandidateModel Supernet::Instantiate(const CandidateSpec &spec) const {
  CandidateModel model(spec, space_.default_dim);
  for (int l = 0; l < space_.num_layers; l++) {
    const LayerStore &ls = layers_[l];
    LayerParams &lp = model.layer(l);
    const LayerChoice &ch = model.spec().layers[l];
    if (ch.left > ls.max_left || ch.right > ls.max_right || lp.dim > ls.n_max) {
      throw std::invalid_argument("instantiate: candidate outside supernet storage");
    }
    std::vector<const Matrix *> lsrc;
    if (ch.left > 0) lsrc.push_back(&ls.linear[ch.left]);
    lsrc.push_back(&ls.linear[0]);
    for (size_t i = 0; i < lp.linear.size(); i++) {
      for (int r = 0; r < lp.linear[i].rows; r++) {
        for (int c = 0; c < lp.dim; c++) lp.linear[i](r, c) = (*lsrc[i])(r, c);
      }
    }
    std::vector<const Matrix *> rsrc;
    rsrc.push_back(&ls.affine[0]);
    if (ch.right > 0) rsrc.push_back(&ls.affine[ch.right]);
    for (size_t i = 0; i < lp.affine.size(); i++) {
      for (int r = 0; r < lp.affine[i].rows; r++) {
        for (int c = 0; c < lp.dim; c++) lp.affine[i](r, c) = (*rsrc[i])(r, c);
      }
    }
    lp.bias = ls.bias;
  }
  auto tensors = model.NamedTensors();
  for (auto &[name, m] : tensors) {
    if (name == "model/classifier/weight") *m = classifier_w_;
    if (name == "model/classifier/bias") *m = classifier_b_;
  }
  return model;
}

std::vector<std::pair<std::string, Matrix *>> Supernet::ModelTensors() {
  std::vector<std::pair<std::string, Matrix *>> out;
  for (int l = 0; l < space_.num_layers; l++) {
    LayerStore &ls = layers_[l];
    const std::string prefix = "model/layer" + std::to_string(l + 1) + "/";
    for (int c = 0; c < static_cast<int>(ls.linear.size()); c++) {
      out.emplace_back(prefix + "linear/" + std::to_string(-c), &ls.linear[c]);
    }
    for (int d = 0; d < static_cast<int>(ls.affine.size()); d++) {
      out.emplace_back(prefix + "affine/" + std::to_string(d), &ls.affine[d]);
    }
    out.emplace_back(prefix + "bias", &ls.bias);
  }
  out.emplace_back("model/classifier/weight", &classifier_w_);
  out.emplace_back("model/classifier/bias", &classifier_b_);
  return out;
}

std::vector<std::pair<std::string, Matrix *>> Supernet::ModelGradTensors() {
  std::vector<std::pair<std::string, Matrix *>> out;
  for (int l = 0; l < space_.num_layers; l++) {
    LayerStore &ls = layers_[l];
    const std::string prefix = "model/layer" + std::to_string(l + 1) + "/";
    for (int c = 0; c < static_cast<int>(ls.linear_grad.size()); c++) {
      out.emplace_back(prefix + "linear/" + std::to_string(-c), &ls.linear_grad[c]);
    }
    for (int d = 0; d < static_cast<int>(ls.affine_grad.size()); d++) {
      out.emplace_back(prefix + "affine/" + std::to_string(d), &ls.affine_grad[d]);
    }
    out.emplace_back(prefix + "bias", &ls.bias_grad);
  }
  out.emplace_back("model/classifier/weight", &classifier_w_grad_);
  out.emplace_back("model/classifier/bias", &classifier_b_grad_);
  return out;
}

std::vector<std::pair<std::string, Matrix *>> Supernet::ArchTensors() {
  std::vector<std::pair<std::string, Matrix *>> out;
  for (int l = 0; l < space_.num_layers; l++) {
    const LayerSpace &ls = space_.layers[l];
    for (size_t a = 0; a < ls.axes.size(); a++) {
      out.emplace_back("arch/layer" + std::to_string(l + 1) + "/" +
                           AxisKindToString(ls.axes[a].kind) + "/log_alpha",
                       &arch_.log_alpha[l][a]);
    }
  }
  return out;
}

int64_t Supernet::ModelParamCount() const {
  int64_t n = 0;
  for (const LayerStore &ls : layers_) {
    for (const Matrix &w : ls.linear) n += w.NumElements();
    for (const Matrix &w : ls.affine) n += w.NumElements();
    n += ls.bias.NumElements();
  }
  return n + classifier_w_.NumElements() + classifier_b_.NumElements();
}

}  // namespace tdnnas
