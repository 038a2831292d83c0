// src/optim.cc

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

#include "tdnnas/optim.h"

#include <stdexcept>

namespace tdnnas {

void SgdStep(Matrix *param, const Matrix &grad, Matrix *velocity, double lr,
             double momentum) {
  if (!param->SameShape(grad) || !param->SameShape(*velocity)) {
    throw std::invalid_argument("sgd_step: shape mismatch (param " + ShapeStr(*param) +
                                ", grad " + ShapeStr(grad) + ", velocity " +
                                ShapeStr(*velocity) + ")");
  }
  for (size_t i = 0; i < param->data.size(); i++) {
    velocity->data[i] = momentum * velocity->data[i] - lr * grad.data[i];
    param->data[i] += velocity->data[i];
  }
}

void SgdOptimizer::Register(Matrix *param, Matrix *grad) {
  if (!param->SameShape(*grad)) {
    throw std::invalid_argument("SgdOptimizer: param/grad shape mismatch");
  }
  slots_.push_back(Slot{param, grad, Matrix(param->rows, param->cols)});
}

void SgdOptimizer::Step() {
  for (Slot &s : slots_) SgdStep(s.param, *s.grad, &s.velocity, lr_, momentum_);
}

}  // namespace tdnnas
