// tdnnas/optim.h

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

#ifndef TDNNAS_OPTIM_H_
#define TDNNAS_OPTIM_H_

#include <vector>

#include "tdnnas/matrix.h"

namespace tdnnas {

// One SGD-with-momentum update:  v <- m*v - lr*g;  p <- p + v.
// Shapes of p, g, v must agree; throws otherwise.
void SgdStep(Matrix *param, const Matrix &grad, Matrix *velocity, double lr,
             double momentum);

// Momentum optimizer over a registered set of (param, grad) pairs.
// Velocity buffers are owned here and match parameter shapes.
class SgdOptimizer {
 public:
  SgdOptimizer(double lr, double momentum) : lr_(lr), momentum_(momentum) {}

  void Register(Matrix *param, Matrix *grad);
  void Step();

  double lr() const { return lr_; }
  double momentum() const { return momentum_; }

 private:
  struct Slot {
    Matrix *param;
    Matrix *grad;
    Matrix velocity;
  };
  double lr_;
  double momentum_;
  std::vector<Slot> slots_;
};

}  // namespace tdnnas

#endif  // TDNNAS_OPTIM_H_
